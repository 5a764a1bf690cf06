from __future__ import annotations

from dataclasses import dataclass, field

from ..core.expr import Expr, free_vars
from ..core.symbols import SymbolTable
from .lexer import Span


@dataclass(frozen=True)
class QuantifiedFormula:
    """``forall int v1, ..., int vk; domain; body;``"""

    variables: tuple[str, ...]
    domain: Expr
    body: Expr
    span: Span | None = field(default=None, compare=False)

    def free_variables(self) -> set[str]:
        return free_vars(self.domain) | free_vars(self.body)


@dataclass(frozen=True)
class ParamDecl:
    name: str
    where: Expr | None
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ArrayDecl:
    name: str
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FunctionDef:
    name: str
    formals: tuple[str, ...]
    body: Expr
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class TypecheckSection:
    program: object  # qualifiers.syntax.Program
    span: Span | None = field(default=None, compare=False)


@dataclass
class SourceFile:
    declarations: list
    symbols: SymbolTable

    @property
    def quantifiers(self) -> list[QuantifiedFormula]:
        return [d for d in self.declarations if isinstance(d, QuantifiedFormula)]

    @property
    def typecheck_sections(self) -> list[TypecheckSection]:
        return [d for d in self.declarations if isinstance(d, TypecheckSection)]
