"""Canonical sum-of-monomials form for integer expressions.

Division, modulo, absolute value, array reads and calls are opaque atoms
whose arguments are themselves normalized; no algebra is done on them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from . import expr as E
from .expr import Expr

_ATOM_RANK = {"var": 0, "param": 1, "access": 2, "call": 3, "abs": 4, "div": 5, "mod": 6}


def atom_key(a: Expr) -> tuple:
    return (_ATOM_RANK[a.op], E.to_text(a))


Factors = tuple  # sorted tuple of atom Exprs (a multiset)


@dataclass(frozen=True, slots=True)
class NormalForm:
    terms: tuple  # ((factors, coeff), ...) sorted, no zero coefficients

    @staticmethod
    def from_map(m: dict) -> "NormalForm":
        items = [(f, c) for f, c in m.items() if c != 0]
        items.sort(key=lambda fc: _mono_key(fc[0]))
        return NormalForm(tuple(items))

    @staticmethod
    def const(c: int) -> "NormalForm":
        return NormalForm(((((), int(c)),) if c else ()))

    @staticmethod
    def atom(a: Expr) -> "NormalForm":
        return NormalForm((((a,), 1),))

    def as_map(self) -> dict:
        return dict(self.terms)

    @property
    def is_const(self) -> bool:
        return all(not f for f, _ in self.terms)

    @property
    def const_value(self) -> int:
        for f, c in self.terms:
            if not f:
                return c
        return 0

    def without_const(self) -> "NormalForm":
        return NormalForm(tuple((f, c) for f, c in self.terms if f))

    def __add__(self, other: "NormalForm") -> "NormalForm":
        m = self.as_map()
        for f, c in other.terms:
            m[f] = m.get(f, 0) + c
        return NormalForm.from_map(m)

    def __neg__(self) -> "NormalForm":
        return NormalForm(tuple((f, -c) for f, c in self.terms))

    def __sub__(self, other: "NormalForm") -> "NormalForm":
        return self + (-other)

    def scale(self, k: int) -> "NormalForm":
        if k == 0:
            return NormalForm(())
        return NormalForm(tuple((f, c * k) for f, c in self.terms))

    def __mul__(self, other: "NormalForm") -> "NormalForm":
        m: dict = {}
        for f1, c1 in self.terms:
            for f2, c2 in other.terms:
                f = tuple(sorted(f1 + f2, key=atom_key))
                m[f] = m.get(f, 0) + c1 * c2
        return NormalForm.from_map(m)

    def atoms(self) -> set:
        return {a for f, _ in self.terms for a in f}

    def to_expr(self) -> Expr:
        return to_expr(self)

    def __str__(self) -> str:
        return E.to_text(to_expr(self))


def _mono_key(factors: tuple) -> tuple:
    # constant monomial sorts last
    if not factors:
        return (1,)
    return (0, tuple(atom_key(a) for a in factors))


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _trunc_mod(a: int, b: int) -> int:
    return a - b * _trunc_div(a, b)


def normalize(e: Expr) -> NormalForm:
    """Canonical form of an integer expression (ring axioms only)."""
    if e.sort != E.INT:
        raise E.SortError(f"normalize expects an integer expression, got {E.to_text(e)}")
    return _norm(e)


def _norm(e: Expr) -> NormalForm:
    op = e.op
    if op == "int":
        return NormalForm.const(e.data)
    if op in ("param", "var"):
        return NormalForm.atom(e)
    if op == "trigger":
        return _norm(e.args[0])
    if op == "add":
        return _norm(e.args[0]) + _norm(e.args[1])
    if op == "sub":
        return _norm(e.args[0]) - _norm(e.args[1])
    if op == "mul":
        return _norm(e.args[0]) * _norm(e.args[1])
    if op == "neg":
        return -_norm(e.args[0])
    if op in ("div", "mod"):
        a, b = _norm(e.args[0]), _norm(e.args[1])
        if a.is_const and b.is_const and b.const_value != 0:
            fold = _trunc_div if op == "div" else _trunc_mod
            return NormalForm.const(fold(a.const_value, b.const_value))
        return NormalForm.atom(Expr(op, (to_expr(a), to_expr(b))))
    if op == "abs":
        a = _norm(e.args[0])
        if a.is_const:
            return NormalForm.const(abs(a.const_value))
        return NormalForm.atom(Expr("abs", (to_expr(a),)))
    if op == "access":
        return NormalForm.atom(Expr("access", (to_expr(_norm(e.args[0])),), e.data))
    if op == "call":
        return NormalForm.atom(Expr("call", tuple(to_expr(_norm(a)) for a in e.args), e.data))
    raise E.SortError(f"cannot normalize {op}")


def _mono_expr(factors: tuple, coeff: int) -> Expr:
    """Monomial with a nonnegative-or-negative leading constant."""
    out = None
    if coeff != 1 or not factors:
        out = E.num(coeff)
    for a in factors:
        out = a if out is None else E.mul(out, a)
    return out


def to_expr(nf: NormalForm) -> Expr:
    if not nf.terms:
        return E.ZERO
    out = None
    for factors, c in nf.terms:
        if out is None:
            if c == -1 and factors:
                out = E.neg(_mono_expr(factors, 1))
            else:
                out = _mono_expr(factors, c)
        elif c < 0:
            out = E.sub(out, _mono_expr(factors, -c))
        else:
            out = E.add(out, _mono_expr(factors, c))
    return out


def canon(e: Expr) -> Expr:
    """Round-trip an integer expression through its normal form."""
    return to_expr(normalize(e))


def equivalent(a: Expr, b: Expr) -> bool:
    return normalize(a) == normalize(b)


def linear_combination(parts: Iterable[tuple[int, NormalForm]]) -> NormalForm:
    out = NormalForm(())
    for k, nf in parts:
        out = out + nf.scale(k)
    return out
