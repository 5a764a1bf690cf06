"""Side conditions that make a linear index map invertible on its domain.

Four checks, named by what they guarantee:

* ``dimension_positive``: the outermost dimension is nonempty, ``n_k > 0``;
* ``nonzero_coefficients``: every ``a_i != 0``;
* ``uniform_sign``: all coefficients share one proven sign;
* ``non_overlap``: ``sum_{j<=i} |a_j| (x_j - min_j) < |a_{i+1}|`` on the
  domain, discharged by cheap fast paths where possible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import expr as E
from .core.expr import Expr
from .core.normal import NormalForm, normalize, to_expr
from .core.symbols import Status, Verdict, proven, refuted, unknown
from .entail import Prover
from .pattern import DomainSpec, LinearPattern

FAST_EQUAL = "fast-path-equal"
FAST_LEQ = "fast-path-leq"
FALLBACK = "symbolic-fallback"
FAILED = "failed"

CONDITION_CODES = {
    "dimension_positive": "E_DIM_SIZE",
    "nonzero_coefficients": "E_ZERO_COEF",
    "uniform_sign": "E_MIXED_SIGN",
    "non_overlap": "E_OVERLAP",
}


@dataclass
class ConditionReport:
    dimension_positive: Verdict
    nonzero_coefficients: Verdict
    uniform_sign: Verdict
    non_overlap: Verdict
    methods: list[str] = field(default_factory=list)
    sign: int | None = None
    order: tuple[str, ...] = ()

    def verdicts(self) -> list[tuple[str, Verdict]]:
        return [(n, getattr(self, n)) for n in CONDITION_CODES]

    @property
    def all_proven(self) -> bool:
        return all(v.proven for _, v in self.verdicts())

    def first_failure(self) -> tuple[str, str] | None:
        """``(code, message)`` of the first condition that is not proven."""
        for name, v in self.verdicts():
            if not v.proven:
                return CONDITION_CODES[name], f"{name} {v.status.value}: {v.detail}"
        return None

    def to_json(self) -> dict:
        out = {name: v.to_json() for name, v in self.verdicts()}
        out["non_overlap"]["methods"] = list(self.methods)
        out["order"] = list(self.order)
        return out


def _const_sign(nf: NormalForm) -> int | None:
    if nf.is_const:
        v = nf.const_value
        return (v > 0) - (v < 0)
    return None


class ConditionChecker:
    """Checks patterns against parameter facts; reusable across orders."""

    def __init__(self, facts=()):
        self.facts = list(facts)
        self.prover = Prover(self.facts)

    def entails(self, goal: Expr) -> Verdict:
        return self.prover.entails(goal)

    # -- individual conditions ---------------------------------------------

    def dimension_positive(self, p: LinearPattern, d: DomainSpec) -> Verdict:
        size = d.size(p.variables[-1])
        if size is None:
            return unknown(f"{p.variables[-1]} has no upper bound")
        goal = E.gt(size, 0)
        v = self.entails(goal)
        return Verdict(v.status, E.to_text(goal))

    def nonzero_coefficients(self, p: LinearPattern) -> Verdict:
        pending = []
        for v, a in zip(p.variables, p.coefficients):
            c = _const_sign(a)
            if c is not None:
                if c == 0:
                    return refuted(f"coefficient of {v} is 0")
                continue
            goal = E.ne(to_expr(a), 0)
            verdict = self.entails(goal)
            if verdict.refuted:
                return refuted(f"coefficient of {v} is 0: {E.to_text(goal)} is false")
            if not verdict.proven:
                pending.append(E.to_text(goal))
        if pending:
            return unknown(" && ".join(pending))
        return proven("")

    def coefficient_sign(self, a: NormalForm) -> int | None:
        c = _const_sign(a)
        if c is not None:
            return c or None
        e = to_expr(a)
        if self.entails(E.gt(e, 0)).proven:
            return 1
        if self.entails(E.lt(e, 0)).proven:
            return -1
        return None

    def uniform_sign(self, p: LinearPattern) -> tuple[Verdict, int | None]:
        signs = [self.coefficient_sign(a) for a in p.coefficients]
        known = {s for s in signs if s is not None}
        if len(known) > 1:
            pos = [v for v, s in zip(p.variables, signs) if s == 1]
            neg = [v for v, s in zip(p.variables, signs) if s == -1]
            return refuted(f"positive coefficients for {pos}, negative for {neg}"), None
        if None in signs:
            open_ = [str(a) for a, s in zip(p.coefficients, signs) if s is None]
            return unknown("sign unknown for " + ", ".join(open_)), None
        s = signs[0]
        return proven("positive" if s > 0 else "negative"), s

    @staticmethod
    def magnitude(a: NormalForm, sign: int) -> NormalForm:
        return a if sign > 0 else -a

    def fast_path(self, p: LinearPattern, d: DomainSpec, i: int, sign: int) -> str | None:
        """Method discharging variable ``i`` against ``i+1`` without the domain, if any."""
        v = p.variables[i]
        size = d.size(v)
        if size is None:
            return None
        if not self.entails(E.gt(size, 0)).proven:
            return None
        n = normalize(size)
        a, a_next = p.coefficients[i], p.coefficients[i + 1]
        if n * a == a_next:
            return FAST_EQUAL
        lhs = self.magnitude(a, sign) * n
        rhs = self.magnitude(a_next, sign)
        if self.entails(E.le(to_expr(lhs), to_expr(rhs))).proven:
            return FAST_LEQ
        return None

    def link(self, p: LinearPattern, d: DomainSpec, inner: str, outer: str) -> bool:
        i = p.variables.index(inner)
        if p.variables[i + 1] != outer:
            return False
        sign = self.coefficient_sign(p.coefficients[0])
        if sign is None:
            return False
        return self.fast_path(p, d, i, sign) is not None

    def overlap_goal(self, p: LinearPattern, d: DomainSpec, i: int, sign: int) -> Expr:
        total = NormalForm(())
        for j in range(i + 1):
            v = p.variables[j]
            shift = NormalForm.atom(E.var(v)) - normalize(d.lower[v])
            total = total + self.magnitude(p.coefficients[j], sign) * shift
        return E.lt(to_expr(total), to_expr(self.magnitude(p.coefficients[i + 1], sign)))

    def non_overlap(self, p: LinearPattern, d: DomainSpec, sign: int | None) -> tuple[Verdict, list[str]]:
        if p.k == 1:
            return proven("single variable"), []
        if sign is None:
            return unknown("requires a uniform proven sign"), []
        methods: list[str] = []
        local = None
        failed = []
        for i in range(p.k - 1):
            m = self.fast_path(p, d, i, sign)
            if m is None:
                if local is None:
                    local = Prover(self.facts + d.as_facts())
                goal = self.overlap_goal(p, d, i, sign)
                if local.entails(goal).proven:
                    m = FALLBACK
                else:
                    m = FAILED
                    failed.append(E.to_text(goal))
            methods.append(m)
        if failed:
            return unknown("cannot derive " + " && ".join(failed)), methods
        return proven(""), methods

    # -- all together ------------------------------------------------------

    def check(self, p: LinearPattern, d: DomainSpec) -> ConditionReport:
        dim = self.dimension_positive(p, d)
        nz = self.nonzero_coefficients(p)
        sign_v, sign = self.uniform_sign(p)
        if nz.proven and sign_v.proven:
            ov, methods = self.non_overlap(p, d, sign)
        else:
            ov, methods = unknown("not attempted: coefficient conditions unproven"), []
        return ConditionReport(dim, nz, sign_v, ov, methods, sign, p.variables)


def check_side_conditions(p: LinearPattern, d: DomainSpec, facts) -> ConditionReport:
    """Dimension size, nonzero coefficients and sign agreement."""
    c = ConditionChecker(facts)
    sign_v, sign = c.uniform_sign(p)
    skipped = unknown("not checked here")
    return ConditionReport(c.dimension_positive(p, d), c.nonzero_coefficients(p), sign_v, skipped, [], sign, p.variables)


def check_non_overlap(p: LinearPattern, d: DomainSpec, facts) -> tuple[Verdict, list[str]]:
    """Non-overlap verdict with the method used per consecutive variable pair."""
    c = ConditionChecker(facts)
    _, sign = c.uniform_sign(p)
    return c.non_overlap(p, d, sign)


__all__ = [
    "CONDITION_CODES", "ConditionChecker", "ConditionReport", "FAILED", "FALLBACK",
    "FAST_EQUAL", "FAST_LEQ", "Status", "check_non_overlap", "check_side_conditions",
]
