from .lexer import Diagnostic, DSLError, Span
from .parser import parse, parse_expr, parse_formula
from .printer import print_declaration, print_file, print_formula
from .syntax import (ArrayDecl, FunctionDef, ParamDecl, QuantifiedFormula,
                     SourceFile, TypecheckSection)

__all__ = [
    "ArrayDecl", "DSLError", "Diagnostic", "FunctionDef", "ParamDecl",
    "QuantifiedFormula", "SourceFile", "Span", "TypecheckSection", "parse",
    "parse_expr", "parse_formula", "print_declaration", "print_file",
    "print_formula",
]
