from __future__ import annotations

from ..core.expr import to_text
from .syntax import (ArrayDecl, FunctionDef, ParamDecl, QuantifiedFormula,
                     SourceFile, TypecheckSection)


def print_formula(f: QuantifiedFormula) -> str:
    binders = ", ".join(f"int {v}" for v in f.variables)
    return f"forall {binders}; {to_text(f.domain)}; {to_text(f.body)};"


def print_declaration(d) -> str:
    if isinstance(d, QuantifiedFormula):
        return print_formula(d)
    if isinstance(d, ParamDecl):
        if d.where is None:
            return f"param int {d.name};"
        return f"param int {d.name} where {to_text(d.where)};"
    if isinstance(d, ArrayDecl):
        return f"array int {d.name};"
    if isinstance(d, FunctionDef):
        return f"define {d.name}({', '.join(d.formals)}) = {to_text(d.body)};"
    if isinstance(d, TypecheckSection):
        from ..qualifiers.syntax import print_program

        body = print_program(d.program)
        inner = "".join(f"  {line}\n" for line in body.splitlines())
        return "typecheck {\n" + inner + "}"
    raise TypeError(f"cannot print {d!r}")


def print_file(sf: SourceFile) -> str:
    return "".join(print_declaration(d) + "\n" for d in sf.declarations)
