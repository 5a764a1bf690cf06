from .checker import TypeChecker, check_program
from .syntax import Program, parse_program, print_program
from .types import (ArityError, FunctionSignature, Level, ParameterPartition,
                    QualifiedType, QualifierSyntaxError, assignable,
                    call_consistent, parse_qualified_type, partition_of)

__all__ = [
    "ArityError", "FunctionSignature", "Level", "ParameterPartition",
    "Program", "QualifiedType", "QualifierSyntaxError", "TypeChecker",
    "assignable", "call_consistent", "check_program", "parse_program",
    "parse_qualified_type", "partition_of", "print_program",
]
