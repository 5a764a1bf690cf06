"""Conservative entailment over integer facts.

Goals are decided by refutation: the negated goal is added to the facts
and Fourier-Motzkin elimination looks for ``0 <= -1``.  Monomials are
opaque atoms, every derived row is tightened by its coefficient gcd (all
atoms are integer valued), and a small set of lemmas describes absolute
values, truncated division/modulo and products of sign-known factors.
The procedure is sound and deliberately incomplete: anything it cannot
derive is reported as unknown.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .core import expr as E
from .core.expr import Expr
from .core.normal import NormalForm, normalize
from .core.symbols import Verdict, proven, refuted, unknown

_ROW_CAP = 600
_LEMMA_ATOM_CAP = 40

# A row is (coeffs, const) meaning  sum(coeffs[m] * m) + const >= 0,
# with coeffs a sorted tuple of (monomial factors, coefficient).
Row = tuple


def _row(nf: NormalForm, shift: int = 0) -> Row | None:
    """Row for ``nf + shift >= 0``; None when it is trivially true."""
    coeffs = tuple((f, c) for f, c in nf.terms if f)
    const = nf.const_value + shift
    return _tighten(coeffs, const)


def _tighten(coeffs: tuple, const: int) -> Row | None:
    if not coeffs:
        return None if const >= 0 else ((), const)
    g = 0
    for _, c in coeffs:
        g = math.gcd(g, c)
    if g > 1:
        coeffs = tuple((f, c // g) for f, c in coeffs)
        const = const // g  # floor keeps the row implied over the integers
    return (coeffs, const)


def comparison_rows(e: Expr) -> list[Row] | None:
    """Rows equivalent to a comparison (conjunction of them); None if not linear-encodable."""
    if e.op == "not":
        inner = e.args[0]
        if inner.op in _NEGATE:
            return comparison_rows(E.binary(_NEGATE[inner.op], *inner.args))
        return None
    if e.op not in ("lt", "le", "gt", "ge", "eq"):
        return None
    d = normalize(E.sub(E.strip_triggers(e.args[0]), E.strip_triggers(e.args[1])))
    rows = []
    if e.op == "lt":
        rows.append(_row(-d, -1))
    elif e.op == "le":
        rows.append(_row(-d))
    elif e.op == "gt":
        rows.append(_row(d, -1))
    elif e.op == "ge":
        rows.append(_row(d))
    else:
        rows.extend([_row(d), _row(-d)])
    return [r for r in rows if r is not None]


_NEGATE = {"lt": "ge", "le": "gt", "gt": "le", "ge": "lt", "eq": "ne", "ne": "eq"}


def negate(e: Expr) -> Expr:
    if e.op in _NEGATE:
        return E.binary(_NEGATE[e.op], *e.args)
    if e.op == "not":
        return e.args[0]
    if e.op == "and":
        return E.binary("or", negate(e.args[0]), negate(e.args[1]))
    if e.op == "or":
        return E.binary("and", negate(e.args[0]), negate(e.args[1]))
    if e.op == "implies":
        return E.binary("and", e.args[0], negate(e.args[1]))
    if e.op == "bool":
        return E.boolean(not e.data)
    return E.not_(e)


def _row_atoms(row: Row) -> set:
    return {f for f, _ in row[0]}


def _fm_contradiction(rows: list[Row]) -> bool:
    rows = list(dict.fromkeys(rows))
    while True:
        for coeffs, const in rows:
            if not coeffs and const < 0:
                return True
        live = [r for r in rows if r[0]]
        if not live:
            return False
        counts: dict = {}
        for coeffs, _ in live:
            for f, c in coeffs:
                pos, neg = counts.get(f, (0, 0))
                counts[f] = (pos + 1, neg) if c > 0 else (pos, neg + 1)
        # eliminate the monomial producing the fewest new rows
        target = min(counts, key=lambda f: (counts[f][0] * counts[f][1] - counts[f][0] - counts[f][1], repr(f)))
        pos_rows, neg_rows, rest = [], [], []
        for r in live:
            c = dict(r[0]).get(target, 0)
            (pos_rows if c > 0 else neg_rows if c < 0 else rest).append(r)
        new = list(rest)
        for p in pos_rows:
            cp = dict(p[0])[target]
            for n in neg_rows:
                cn = -dict(n[0])[target]
                l = cp * cn // math.gcd(cp, cn)
                kp, kn = l // cp, l // cn
                m: dict = {}
                for f, c in p[0]:
                    m[f] = m.get(f, 0) + kp * c
                for f, c in n[0]:
                    m[f] = m.get(f, 0) + kn * c
                coeffs = tuple(sorted(((f, c) for f, c in m.items() if c), key=lambda fc: repr(fc[0])))
                r = _tighten(coeffs, kp * p[1] + kn * n[1])
                if r is not None:
                    new.append(r)
        rows = list(dict.fromkeys(new))
        if len(rows) > _ROW_CAP:
            return False


@dataclass
class FactSet:
    facts: list[Expr] = field(default_factory=list)

    def extended(self, more: Iterable[Expr]) -> "FactSet":
        return FactSet(self.facts + list(more))


class Prover:
    def __init__(self, facts: Iterable[Expr], depth: int = 3):
        self.depth = depth
        self.fact_exprs: list[Expr] = []
        self.rows: list[Row] = []
        for f in facts:
            for c in E.conjuncts(E.strip_triggers(f)):
                self.fact_exprs.append(c)
                rows = comparison_rows(c)
                if rows:
                    self.rows.extend(rows)
        self.rows = list(dict.fromkeys(self.rows))
        self._memo: dict = {}
        self._syntactic = {E.to_text(c) for c in self.fact_exprs}

    # -- public -------------------------------------------------------------

    def entails(self, goal: Expr) -> Verdict:
        g = E.strip_triggers(goal)
        if self._prove(g):
            return proven()
        if self._prove(negate(g)):
            return refuted(f"negation of {E.to_text(g)} is derivable")
        return unknown(f"cannot derive {E.to_text(g)}")

    def nonneg(self, nf: NormalForm, depth: int | None = None) -> bool:
        """Is ``nf >= 0`` derivable?"""
        return self._nonneg(nf, self.depth if depth is None else depth)

    # -- goals --------------------------------------------------------------

    def _prove(self, g: Expr) -> bool:
        if E.to_text(g) in self._syntactic:
            return True
        op = g.op
        if op == "bool":
            return g.data or self._inconsistent()
        if op == "and":
            return self._prove(g.args[0]) and self._prove(g.args[1])
        if op == "or":
            return self._prove(g.args[0]) or self._prove(g.args[1])
        if op == "implies":
            sub = Prover(self.fact_exprs + [g.args[0]], self.depth)
            return sub._prove(g.args[1])
        if op == "not":
            inner = g.args[0]
            if inner.op in _NEGATE or inner.op in ("and", "or", "implies", "not", "bool"):
                return self._prove(negate(inner))
            return False
        if op == "ne":
            d = normalize(E.sub(g.args[0], g.args[1]))
            return self._nonneg(d + NormalForm.const(-1), self.depth) or \
                self._nonneg(-d + NormalForm.const(-1), self.depth)
        rows = comparison_rows(g)
        if rows is None:
            return False
        return all(self._row_holds(r) for r in rows)

    def _row_holds(self, r: Row) -> bool:
        coeffs, const = r
        nf = NormalForm.from_map({**{f: c for f, c in coeffs}, (): const})
        return self._nonneg(nf, self.depth)

    def _inconsistent(self) -> bool:
        return _fm_contradiction(self.rows)

    def _nonneg(self, nf: NormalForm, depth: int) -> bool:
        if nf.is_const:
            return nf.const_value >= 0
        key = (nf, depth)
        if key in self._memo:
            return self._memo[key]
        self._memo[key] = False  # cycle guard
        neg = _row(-nf, -1)
        rows = [neg] + self.rows
        # nothing refutes a goal whose atoms are unconstrained
        if depth > 0:
            rows += self._lemmas(nf, depth - 1)
        rows = _relevant(rows, neg)
        result = _fm_contradiction(rows)
        self._memo[key] = result
        return result

    # -- lemmas -------------------------------------------------------------

    def _lemmas(self, goal: NormalForm, depth: int) -> list[Row]:
        out: list[Row] = []
        seen_monos: set = set()
        seen_atoms: set = set()
        work = [f for f, _ in goal.terms if f]
        for r in self.rows:
            work.extend(f for f, _ in r[0])
        while work and len(seen_atoms) < _LEMMA_ATOM_CAP:
            mono = work.pop(0)
            if mono in seen_monos:
                continue
            seen_monos.add(mono)
            if len(mono) > 1:
                new = self._product_lemmas(mono, depth)
                out.extend(new)
            for a in mono:
                if a in seen_atoms:
                    continue
                seen_atoms.add(a)
                new = self._atom_lemmas(a, depth)
                out.extend(new)
                for r in new:
                    work.extend(f for f, _ in r[0] if f not in seen_monos)
        return [r for r in out if r is not None]

    def _sign(self, nf: NormalForm, depth: int) -> str:
        """'pos' (>=1), 'nonneg', 'neg' (<=-1), 'nonpos' or '?'."""
        if nf.is_const:
            v = nf.const_value
            return "pos" if v > 0 else "neg" if v < 0 else "zero"
        if self._nonneg(nf + NormalForm.const(-1), depth):
            return "pos"
        if self._nonneg(nf, depth):
            return "nonneg"
        if self._nonneg(-nf + NormalForm.const(-1), depth):
            return "neg"
        if self._nonneg(-nf, depth):
            return "nonpos"
        return "?"

    def _atom_lemmas(self, a: Expr, depth: int) -> list[Row]:
        A = NormalForm.atom(a)
        rows: list = []
        if a.op == "abs":
            e = normalize(a.args[0])
            rows += [_row(A), _row(A - e), _row(A + e)]
            s = self._sign(e, depth)
            if s in ("pos", "nonneg", "zero"):
                rows += [_row(e - A)]
            elif s in ("neg", "nonpos"):
                rows += [_row(-e - A)]
        elif a.op in ("div", "mod"):
            num, den = normalize(a.args[0]), normalize(a.args[1])
            q = NormalForm.atom(E.Expr("div", a.args))
            m = NormalForm.atom(E.Expr("mod", a.args))
            ds = self._sign(den, depth)
            if ds in ("pos", "neg"):
                # num == den * (num / den) + num % den
                ident = num - den * q - m
                rows += [_row(ident), _row(-ident)]
                ns = self._sign(num, depth)
                absden = den if ds == "pos" else -den
                if ns in ("pos", "nonneg", "zero"):
                    rows += [_row(m), _row(absden - m, -1), _row(num - m)]
                    if ds == "pos":
                        rows += [_row(q), _row(num - q)]
                        if self._nonneg(num - den, depth):
                            rows += [_row(q, -1)]
                elif ns in ("neg", "nonpos"):
                    rows += [_row(-m), _row(absden + m, -1)]
                if den.is_const:
                    c = abs(den.const_value)
                    rows += [_row(-m, c - 1), _row(m, c - 1)]
        elif a.op == "var" or a.op == "param":
            pass
        return [r for r in rows if r is not None]

    def _product_lemmas(self, mono: tuple, depth: int) -> list[Row]:
        M = NormalForm(((mono, 1),))
        signs = [self._sign(NormalForm.atom(f), depth) for f in mono]
        rows = []
        if "?" not in signs:
            negs = sum(s in ("neg", "nonpos") for s in signs)
            strict = all(s in ("pos", "neg") for s in signs)
            if "zero" in signs:
                rows += [_row(M), _row(-M)]
            elif negs % 2 == 0:
                rows.append(_row(M, -1) if strict else _row(M))
            else:
                rows.append(_row(-M, -1) if strict else _row(-M))
        # bounded factor times a nonnegative cofactor
        for i, f in enumerate(mono):
            rest = mono[:i] + mono[i + 1:]
            if not rest:
                continue
            R = NormalForm(((rest, 1),))
            rs = self._sign(R, depth) if len(rest) == 1 else self._rest_sign(rest, depth)
            if rs not in ("pos", "nonneg"):
                continue
            lo, hi = self._const_bounds(f)
            if hi is not None:
                rows.append(_row(R.scale(hi) - M))
            if lo is not None:
                rows.append(_row(M - R.scale(lo)))
        return [r for r in rows if r is not None]

    def _rest_sign(self, rest: tuple, depth: int) -> str:
        signs = [self._sign(NormalForm.atom(f), depth) for f in rest]
        if all(s in ("pos", "nonneg", "neg", "nonpos") for s in signs):
            negs = sum(s in ("neg", "nonpos") for s in signs)
            if negs % 2 == 0:
                return "pos" if all(s == "pos" or s == "neg" for s in signs) else "nonneg"
        return "?"

    def _const_bounds(self, atom: Expr) -> tuple:
        lo = hi = None
        key = (atom,)
        for coeffs, const in self.rows:
            if len(coeffs) == 1 and coeffs[0][0] == key:
                c = coeffs[0][1]
                if c > 0:
                    b = -(const // c)  # atom >= ceil(-const / c)
                    lo = b if lo is None else max(lo, b)
                else:
                    b = const // (-c)
                    hi = b if hi is None else min(hi, b)
        return lo, hi


def _relevant(rows: list[Row], seed: Row) -> list[Row]:
    """Rows transitively sharing monomials with ``seed``."""
    atoms = _row_atoms(seed)
    chosen = [seed]
    pool = [r for r in rows[1:] if r != seed]
    changed = True
    while changed:
        changed = False
        rest = []
        for r in pool:
            ra = _row_atoms(r)
            if not ra or ra & atoms:
                chosen.append(r)
                atoms |= ra
                changed = True
            else:
                rest.append(r)
        pool = rest
    return chosen


def entails(facts: FactSet | Iterable[Expr], goal: Expr, depth: int = 3) -> Verdict:
    fs = facts.facts if isinstance(facts, FactSet) else list(facts)
    return Prover(fs, depth).entails(goal)
