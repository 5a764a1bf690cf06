"""Fact-aware simplification of rewritten domains and inverse components.

Every rule is an equivalence under the supplied facts; rule names end up
in the rewrite report.  Integer subterms come back in normal-form order.
"""
from __future__ import annotations

from .core import expr as E
from .core.expr import Expr
from .core.evaluate import trunc_div, trunc_mod
from .core.normal import NormalForm, to_expr
from .entail import Prover

MOD_ONE = "mod-one"
DIV_ONE = "div-one"
CONST_FOLD = "constant-fold"
RECOMBINE = "div-mod-recombine"
ABS_SIGN = "abs-by-sign"
MOD_SMALL = "mod-of-small"
DIV_SMALL = "div-of-small"
ENTAILED = "entailed-comparison"
REFUTED = "refuted-comparison"
TRUE_AND = "true-conjunct"
BOOL_FOLD = "boolean-fold"

_CMP = {"lt": int.__lt__, "le": int.__le__, "gt": int.__gt__, "ge": int.__ge__,
        "eq": int.__eq__, "ne": int.__ne__}


def _has_trigger(e: Expr) -> bool:
    return any(n.op == "trigger" for n in E.walk(e))


class Simplifier:
    """``use_facts=False`` gives the cosmetic pass: only rules that need no facts."""

    def __init__(self, facts=(), use_facts: bool = True):
        self.use_facts = use_facts
        self.prover = Prover(list(facts)) if use_facts else None
        self.applied: list[str] = []

    def note(self, rule: str) -> None:
        if rule not in self.applied:
            self.applied.append(rule)

    def run(self, e: Expr) -> Expr:
        for _ in range(6):
            out = self._expr(e)
            if out == e:
                return out
            e = out
        return e

    # -- dispatch ----------------------------------------------------------

    def _expr(self, e: Expr) -> Expr:
        if _has_trigger(e) and e.sort == E.INT:
            return e
        if e.sort == E.INT:
            return to_expr(self._nf(e))
        return self._bool(e)

    def _nonneg(self, nf: NormalForm) -> bool:
        if nf.is_const:
            return nf.const_value >= 0
        return self.use_facts and self.prover.nonneg(nf)

    # -- integers ----------------------------------------------------------

    def _nf(self, e: Expr) -> NormalForm:
        op = e.op
        if op == "int":
            return NormalForm.const(e.data)
        if op in ("var", "param"):
            return NormalForm.atom(e)
        if op == "add":
            return self._recombine(self._nf(e.args[0]) + self._nf(e.args[1]))
        if op == "sub":
            return self._recombine(self._nf(e.args[0]) - self._nf(e.args[1]))
        if op == "mul":
            return self._nf(e.args[0]) * self._nf(e.args[1])
        if op == "neg":
            return -self._nf(e.args[0])
        if op == "abs":
            return self._abs(self._nf(e.args[0]))
        if op in ("div", "mod"):
            return self._divmod(op, self._nf(e.args[0]), self._nf(e.args[1]))
        if op == "access":
            if _has_trigger(e.args[0]):
                return NormalForm.atom(e)
            return NormalForm.atom(E.Expr("access", (to_expr(self._nf(e.args[0])),), e.data))
        if op == "call":
            return NormalForm.atom(E.Expr("call", tuple(self._expr(a) for a in e.args), e.data))
        raise E.SortError(f"unexpected integer node {op}")

    def _abs(self, a: NormalForm) -> NormalForm:
        if a.is_const:
            self.note(CONST_FOLD)
            return NormalForm.const(abs(a.const_value))
        if self.use_facts:
            if self._nonneg(a):
                self.note(ABS_SIGN)
                return a
            if self._nonneg(-a):
                self.note(ABS_SIGN)
                return -a
        return NormalForm.atom(E.Expr("abs", (to_expr(a),)))

    def _divmod(self, op: str, a: NormalForm, b: NormalForm) -> NormalForm:
        if a.is_const and b.is_const and b.const_value != 0:
            self.note(CONST_FOLD)
            fold = trunc_div if op == "div" else trunc_mod
            return NormalForm.const(fold(a.const_value, b.const_value))
        if b.is_const and abs(b.const_value) == 1:
            if op == "mod":
                self.note(MOD_ONE)
                return NormalForm(())
            self.note(DIV_ONE)
            return a if b.const_value == 1 else -a
        if self.use_facts and self._nonneg(b - NormalForm.const(1)) and self._nonneg(a) \
                and self._nonneg(b - a - NormalForm.const(1)):
            # 0 <= a < b
            if op == "mod":
                self.note(MOD_SMALL)
                return a
            self.note(DIV_SMALL)
            return NormalForm(())
        return NormalForm.atom(E.Expr(op, (to_expr(a), to_expr(b))))

    def _recombine(self, nf: NormalForm) -> NormalForm:
        """``c * (E / c) + E mod c`` becomes ``E`` (truncated division, c != 0)."""
        m = nf.as_map()
        changed = True
        while changed:
            changed = False
            for factors, coeff in list(m.items()):
                if len(factors) != 1 or factors[0].op != "div":
                    continue
                q = factors[0]
                num, den = q.args
                if den.op != "int" and not (den.op == "neg" and den.args[0].op == "int"):
                    continue
                c = den.data if den.op == "int" else -den.args[0].data
                if c == 0 or coeff % c:
                    continue
                r = (E.Expr("mod", q.args),)
                k = coeff // c
                if m.get(r) != k:
                    continue
                del m[factors]
                del m[r]
                rest = NormalForm.from_map(m) + self._nf(num).scale(k)
                m = rest.as_map()
                self.note(RECOMBINE)
                changed = True
                break
        return NormalForm.from_map(m)

    # -- booleans ----------------------------------------------------------

    def _bool(self, e: Expr) -> Expr:
        op = e.op
        if op == "bool":
            return e
        if op in _CMP:
            return self._compare(op, e)
        if op == "not":
            a = self._bool(e.args[0])
            if a.op == "bool":
                self.note(BOOL_FOLD)
                return E.boolean(not a.data)
            return E.not_(a)
        if op in ("and", "or", "implies"):
            a, b = self._bool(e.args[0]), self._bool(e.args[1])
            return self._connective(op, a, b)
        if op == "trigger":
            return e
        raise E.SortError(f"unexpected boolean node {op}")

    def _connective(self, op: str, a: Expr, b: Expr) -> Expr:
        if op == "and":
            if a == E.TRUE or b == E.TRUE:
                self.note(TRUE_AND)
                return b if a == E.TRUE else a
            if a == E.FALSE or b == E.FALSE:
                self.note(BOOL_FOLD)
                return E.FALSE
        elif op == "or":
            if a == E.FALSE or b == E.FALSE:
                self.note(BOOL_FOLD)
                return b if a == E.FALSE else a
            if a == E.TRUE or b == E.TRUE:
                self.note(BOOL_FOLD)
                return E.TRUE
        else:
            if a == E.TRUE:
                self.note(BOOL_FOLD)
                return b
            if a == E.FALSE or b == E.TRUE:
                self.note(BOOL_FOLD)
                return E.TRUE
        return E.binary(op, a, b)

    def _compare(self, op: str, e: Expr) -> Expr:
        if _has_trigger(e):
            return e
        lhs, rhs = self._nf(e.args[0]), self._nf(e.args[1])
        diff = lhs - rhs
        if diff.is_const:
            self.note(CONST_FOLD)
            return E.boolean(_CMP[op](diff.const_value, 0))
        out = E.binary(op, to_expr(lhs), to_expr(rhs))
        if self.use_facts:
            v = self.prover.entails(out)
            if v.proven:
                self.note(ENTAILED)
                return E.TRUE
            if v.refuted:
                self.note(REFUTED)
                return E.FALSE
        return out


def simplify(e: Expr, facts=()) -> Expr:
    return Simplifier(facts).run(e)


def cosmetic(e: Expr) -> Expr:
    """Normalize integer subterms and fold constants, without using facts."""
    return Simplifier(use_facts=False).run(e)
