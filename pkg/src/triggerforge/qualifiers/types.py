"""Qualified types with per-level ``unique<i>`` numbers and ``immutable`` flags.

Like ``const`` in C, a qualifier binds to what is on its left; qualifiers
written before the base type bind to the base type.  ``unique<1> int* p``
therefore makes the pointed-to ints unique 1 while ``p`` itself carries no
number.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..core.symbols import Verdict, proven, refuted


@dataclass(frozen=True)
class Level:
    unique: int | None = None
    immutable: bool = False

    def text(self) -> str:
        parts = []
        if self.unique is not None:
            parts.append(f"unique<{self.unique}>")
        if self.immutable:
            parts.append("immutable")
        return " ".join(parts)


@dataclass(frozen=True)
class QualifiedType:
    """``levels`` run outermost first; ``levels[-1]`` is the base scalar.

    A plain ``int`` has a single level and no indirection.  Struct members
    are looked up in the program's struct table and listed here only for
    instance types produced by the checker.
    """

    base: str
    levels: tuple[Level, ...] = (Level(),)
    members: tuple = field(default=(), compare=False)
    marker: str | None = None

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def erased(self) -> tuple[str, int]:
        return (self.base, self.depth)

    def pointee(self) -> "QualifiedType":
        if self.depth == 0:
            raise ValueError(f"cannot dereference non-pointer {self}")
        return replace(self, levels=self.levels[1:])

    def address_of(self) -> "QualifiedType":
        return replace(self, levels=(Level(),) + self.levels)

    def uniqueness(self) -> tuple:
        return tuple(l.unique for l in self.levels)

    def immutability(self) -> tuple:
        return tuple(l.immutable for l in self.levels)

    def with_level(self, i: int, level: Level) -> "QualifiedType":
        levels = list(self.levels)
        levels[i] = level
        return replace(self, levels=tuple(levels))

    def renumbered(self, mapping: dict) -> "QualifiedType":
        return replace(self, levels=tuple(
            replace(l, unique=mapping.get(l.unique, l.unique)) if l.unique is not None else l
            for l in self.levels))

    def __str__(self) -> str:
        inner = list(reversed(self.levels))
        q = inner[0].text()
        out = f"{q} {self.base}" if q else self.base
        for level in inner[1:]:
            q = level.text()
            out += f"* {q} " if q else "*"
        return out.rstrip()


class QualifierSyntaxError(ValueError):
    pass


def parse_qualified_type(text: str) -> QualifiedType:
    """Parse a type such as ``unique<1> int*`` (a trailing name is ignored)."""
    from ..dsl.lexer import DSLError, TokenStream, tokenize
    from .syntax import parse_type

    try:
        ts = TokenStream(tokenize(text))
        t = parse_type(ts)
        if ts.peek().kind == "ident":
            ts.next()
        if ts.peek().kind != "eof":
            raise QualifierSyntaxError(f"trailing input in type {text!r}")
        return t
    except DSLError as exc:
        raise QualifierSyntaxError(str(exc)) from None


# -- compatibility -----------------------------------------------------------

def assignable(target: QualifiedType, source: QualifiedType) -> Verdict:
    """Can a value of ``source`` type be stored into ``target``?

    Level 0 is the copied value itself and is not compared.  Every level
    below must agree on the uniqueness number; immutability may be gained
    (a recorded one-way coercion) but never lost.
    """
    if target.erased() != source.erased():
        return refuted("E_TYPE_MISMATCH", witness=f"{source} vs {target}")
    coerced = False
    for i in range(1, len(target.levels)):
        t, s = target.levels[i], source.levels[i]
        if t.unique != s.unique:
            return refuted("E_UNIQUE_MISMATCH", witness=f"level {i}: {_num(s.unique)} vs {_num(t.unique)}")
        if s.immutable and not t.immutable:
            return refuted("E_IMMUTABLE_DROP", witness=f"level {i}")
        if t.immutable and not s.immutable:
            coerced = True
    return proven("N_COERCE" if coerced else "")


def _num(u):
    return "none" if u is None else str(u)


@dataclass(frozen=True)
class FunctionSignature:
    name: str
    params: tuple[QualifiedType, ...]
    returns: QualifiedType = QualifiedType("void")
    param_names: tuple[str, ...] = ()


@dataclass(frozen=True)
class ParameterPartition:
    groups: frozenset  # of frozensets of parameter indices

    @staticmethod
    def from_keys(keys) -> "ParameterPartition":
        buckets: dict = {}
        for i, k in enumerate(keys):
            buckets.setdefault(k, set()).add(i)
        return ParameterPartition(frozenset(frozenset(g) for g in buckets.values()))

    def sorted_groups(self) -> list[list[int]]:
        return sorted(sorted(g) for g in self.groups)


def _full_key(t: QualifiedType) -> tuple:
    return (t.erased(), t.uniqueness(), t.immutability())


def partition_of(sig: FunctionSignature) -> ParameterPartition:
    return ParameterPartition.from_keys(_full_key(p) for p in sig.params)


class ArityError(ValueError):
    pass


def call_consistent(decl: FunctionSignature, args) -> Verdict:
    """Arguments must group parameters exactly as the declaration does.

    Uniqueness numbers themselves may differ between call and declaration.
    """
    args = list(args)
    if len(args) != len(decl.params):
        raise ArityError(f"{decl.name} expects {len(decl.params)} arguments, got {len(args)}")
    keys = []
    for i, (p, a) in enumerate(zip(decl.params, args)):
        if p.erased() != a.erased():
            return refuted("E_TYPE_MISMATCH", witness=f"argument {i}: {a} vs {p}")
        for lvl in range(1, len(p.levels)):
            if a.levels[lvl].immutable and not p.levels[lvl].immutable:
                return refuted("E_IMMUTABLE_DROP", witness=f"argument {i}")
        # immutability is judged against the parameter after coercion
        keys.append((a.erased(), a.uniqueness(), p.immutability()))
    want = partition_of(decl)
    got = ParameterPartition.from_keys(keys)
    if want != got:
        return refuted("E_CALL_PARTITION", witness={"declared": want.sorted_groups(), "call": got.sorted_groups()})
    coerced = any(p.levels[l].immutable and not a.levels[l].immutable
                  for p, a in zip(decl.params, args) for l in range(1, len(p.levels)))
    return proven("N_COERCE" if coerced else "")
