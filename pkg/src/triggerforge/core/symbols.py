from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .expr import Expr, params_of


class Status(enum.Enum):
    PROVEN = "proven"
    REFUTED = "refuted"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    status: Status
    detail: str = ""
    witness: object = None

    @property
    def proven(self) -> bool:
        return self.status is Status.PROVEN

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED

    def to_json(self) -> dict:
        out = {"verdict": self.status.value}
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def proven(detail: str = "") -> Verdict:
    return Verdict(Status.PROVEN, detail)


def refuted(detail: str = "", witness=None) -> Verdict:
    return Verdict(Status.REFUTED, detail, witness)


def unknown(detail: str = "") -> Verdict:
    return Verdict(Status.UNKNOWN, detail)


class SymbolError(ValueError):
    pass


@dataclass
class SymbolTable:
    """Declared parameters (with assumed facts), arrays and functions."""

    params: dict[str, list[Expr]] = field(default_factory=dict)
    arrays: dict[str, str] = field(default_factory=dict)
    functions: dict[str, tuple[tuple[str, ...], Expr]] = field(default_factory=dict)

    def names(self) -> set[str]:
        return set(self.params) | set(self.arrays) | set(self.functions)

    def declare_param(self, name: str, facts: list[Expr] | tuple = ()) -> None:
        self._fresh(name)
        for f in facts:
            unknown_names = params_of(f) - set(self.params) - {name}
            if unknown_names:
                raise SymbolError(f"fact on {name} mentions undeclared {sorted(unknown_names)}")
        self.params[name] = list(facts)

    def declare_array(self, name: str, sort: str = "int") -> None:
        self._fresh(name)
        self.arrays[name] = sort

    def declare_function(self, name: str, formals: tuple[str, ...], body: Expr) -> None:
        self._fresh(name)
        self.functions[name] = (tuple(formals), body)

    def _fresh(self, name: str) -> None:
        if name in self.names():
            raise SymbolError(f"duplicate declaration of {name}")

    def facts(self) -> list[Expr]:
        return [f for fs in self.params.values() for f in fs]
