"""Brute-force ground truth for rewrites under concrete parameter values.

Everything here enumerates: the original tuples ``X``, the new index set
``Y``, the linear map between them and both quantifier bodies over seeded
arrays.  Iteration order is fixed so witnesses are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import expr as E
from .core.evaluate import Binding, EvalError, evaluate
from .core.expr import Expr
from .dsl.syntax import QuantifiedFormula
from .kernels import Evaluator, RowError
from .pattern import DomainSpec, LinearPattern, PatternError, extract_domain

DEFAULT_CAP = 10**6
_FALLBACK_WIDTH = 64


class OracleError(Exception):
    code = "E_ORACLE"


class UnboundedDomain(OracleError):
    code = "E_UNBOUNDED"


class CapExceeded(OracleError):
    code = "E_CAP"


def _value(e: Expr, b: Binding, env=None) -> int:
    try:
        return int(evaluate(e, b, env or {}))
    except EvalError as exc:
        raise UnboundedDomain(f"cannot evaluate bound {E.to_text(e)}: {exc}") from None


def _grid(windows: list[tuple[int, int]], cap: int) -> np.ndarray:
    sizes = [max(hi - lo, 0) for lo, hi in windows]
    total = 1
    for s in sizes:
        total *= s
    if total > cap:
        raise CapExceeded(f"{total} candidate points exceed the cap of {cap}")
    if not windows:
        return np.zeros((1, 0), dtype=np.int64)
    if total == 0:
        return np.zeros((0, len(windows)), dtype=np.int64)
    axes = [np.arange(lo, hi, dtype=np.int64) for lo, hi in windows]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _filter(cond: Expr, variables, rows: np.ndarray, b: Binding, functions=None) -> np.ndarray:
    if len(rows) == 0:
        return rows
    mask = Evaluator(cond, variables, b, functions).rows(rows)
    return rows[np.asarray(mask, dtype=bool)]


def pattern_windows(d: DomainSpec, b: Binding, p: LinearPattern | None = None,
                    env=None) -> dict[str, tuple[int, int]]:
    """Half-open integer windows per pattern variable.

    A variable with no upper bound gets a window sized from the next
    coefficient (enough whenever the non-overlap condition holds).
    """
    out = {}
    for i, v in enumerate(d.variables):
        lo = _value(d.lower[v], b, env)
        hi_e = d.upper.get(v)
        if hi_e is not None:
            out[v] = (lo, _value(hi_e, b, env))
            continue
        width = _FALLBACK_WIDTH
        if p is not None and i + 1 < p.k:
            a = abs(_value(p.coefficients[i].to_expr(), b))
            a_next = abs(_value(p.coefficients[i + 1].to_expr(), b))
            if a:
                width = a_next // a + 1
        out[v] = (lo, lo + width)
    return out


def _check_margins(d: DomainSpec, windows: dict, b: Binding, cap: int, functions=None) -> None:
    """Unbounded variables must have no satisfying points just past their window."""
    cond = E.conj(d.bounds_expr(), d.residual)
    for v in d.variables:
        if d.upper.get(v) is not None:
            continue
        lo, hi = windows[v]
        probe = dict(windows)
        probe[v] = (hi, hi + (hi - lo))
        rows = _grid([probe[u] for u in d.variables], cap)
        if len(_filter(cond, d.variables, rows, b, functions)):
            raise UnboundedDomain(f"{v} has no upper bound and the residual does not confine it")


def enumerate_X(d: DomainSpec, b: Binding, p: LinearPattern | None = None, cap: int = DEFAULT_CAP,
                functions=None) -> list[tuple[int, ...]]:
    windows = pattern_windows(d, b, p)
    _check_margins(d, windows, b, cap, functions)
    rows = _grid([windows[v] for v in d.variables], cap)
    cond = E.conj(d.bounds_expr(), d.residual)
    return [tuple(r) for r in _filter(cond, d.variables, rows, b, functions).tolist()]


def y_window(p: LinearPattern, d: DomainSpec, b: Binding, off: Expr) -> tuple[int, int]:
    """Half-open window ``[off + min(0, a_k n_k), off + max(0, a_k n_k)]``."""
    o = _value(off, b)
    extent = _value(p.coefficients[-1].to_expr(), b) * _value(d.size(p.variables[-1]), b)
    return o + min(0, extent), o + max(0, extent) + 1


def enumerate_Y(Y: Expr, p: LinearPattern, d: DomainSpec, b: Binding, off: Expr, x: str = "x",
                cap: int = DEFAULT_CAP, functions=None) -> list[int]:
    lo, hi = y_window(p, d, b, off)
    rows = _grid([(lo, hi)], cap)
    return [r[0] for r in _filter(Y, (x,), rows, b, functions).tolist()]


def brute_non_overlap(p: LinearPattern, d: DomainSpec, b: Binding, points=None, cap: int = DEFAULT_CAP):
    """``(holds, witness)`` for the partial-sum bound on every enumerated tuple."""
    if points is None:
        points = enumerate_X(d, b, p, cap)
    coeffs = [abs(_value(a.to_expr(), b)) for a in p.coefficients]
    mins = [_value(d.lower[v], b) for v in p.variables]
    order = [d.variables.index(v) for v in p.variables]
    for t in points:
        acc = 0
        for i in range(p.k - 1):
            acc += coeffs[i] * (t[order[i]] - mins[i])
            if not acc < coeffs[i + 1]:
                return False, {"point": dict(zip(d.variables, t)), "index": i + 1,
                               "sum": acc, "bound": coeffs[i + 1]}
    return True, None


# -- reports -----------------------------------------------------------------

@dataclass
class OracleReport:
    instance: str
    size_x: int = 0
    size_y: int = 0
    injective: bool = False
    image_equal: bool = False
    inverse_laws: bool = False
    non_overlap: bool = False
    truth_equal: bool = False
    truths: list = field(default_factory=list)
    counterexample: dict | None = None
    error: str | None = None
    code: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.injective and self.image_equal and self.inverse_laws \
            and self.non_overlap and self.truth_equal

    def fail(self, what: str, witness) -> None:
        if self.counterexample is None:
            self.counterexample = {"check": what, "witness": witness}

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "passed": self.passed,
            "size_x": self.size_x,
            "size_y": self.size_y,
            "injective": self.injective,
            "image_equal": self.image_equal,
            "inverse_laws": self.inverse_laws,
            "non_overlap": self.non_overlap,
            "truth_equal": self.truth_equal,
            "counterexample": self.counterexample,
            "error": self.error,
            "code": self.code,
        }


def check_bijection(p: LinearPattern, d: DomainSpec, Y: Expr, inverse: list[Expr], b: Binding, off: Expr,
                    x: str = "x", cap: int = DEFAULT_CAP, report: OracleReport | None = None,
                    functions=None) -> OracleReport:
    """Injectivity of f on X, f(X) = Y, and both inverse laws, pointwise."""
    rep = report or OracleReport("bijection")
    X = enumerate_X(d, b, p, cap, functions)
    Yset = enumerate_Y(Y, p, d, b, off, x, cap, functions)
    rep.size_x, rep.size_y = len(X), len(Yset)
    var_order = d.variables
    f = Evaluator(p.index_expr(), var_order, b, functions)
    images = f.rows(X) if X else []
    seen: dict[int, tuple] = {}
    rep.injective = True
    for t, y in zip(X, images):
        if y in seen:
            rep.injective = False
            rep.fail("injective", {"points": [dict(zip(var_order, seen[y])), dict(zip(var_order, t))], "index": y})
            break
        seen[y] = t
    img, ys = set(images), set(Yset)
    rep.image_equal = img == ys
    if not rep.image_equal:
        diff = sorted(img ^ ys)
        w = diff[0]
        rep.fail("image", {"x": w, "in_image": w in img, "in_Y": w in ys})
    inv_eval = [Evaluator(c, (x,), b, functions) for c in inverse]
    pos = {v: i for i, v in enumerate(p.variables)}
    ok = True
    if images:
        comps = [ev.rows(np.asarray(images).reshape(-1, 1)) for ev in inv_eval]
        for j, t in enumerate(X):
            back = tuple(comps[pos[v]][j] for v in var_order)
            if back != t:
                ok = False
                rep.fail("left-inverse", {"point": dict(zip(var_order, t)), "got": dict(zip(var_order, back))})
                break
    if ok and Yset:
        comps = [ev.rows(np.asarray(Yset).reshape(-1, 1)) for ev in inv_eval]
        pts = [tuple(comps[pos[v]][j] for v in var_order) for j in range(len(Yset))]
        again = f.rows(pts)
        for yv, z in zip(Yset, again):
            if yv != z:
                ok = False
                rep.fail("right-inverse", {"x": yv, "f(f_inv(x))": z})
                break
    rep.inverse_laws = ok
    return rep


def _rows_for(formula: QuantifiedFormula, windows: dict, b: Binding, cap: int, functions=None) -> np.ndarray:
    missing = [v for v in formula.variables if v not in windows]
    if missing:
        raise UnboundedDomain(f"no finite range for {missing}")
    rows = _grid([windows[v] for v in formula.variables], cap)
    return _filter(formula.domain, formula.variables, rows, b, functions)


def quantifier_truth(formula: QuantifiedFormula, rows: np.ndarray, b: Binding, seed: int, functions=None) -> bool:
    if len(rows) == 0:
        return True
    vals = Evaluator(formula.body, formula.variables, b, functions).rows(rows, seed)
    return all(vals)


def check_equivalence(orig: QuantifiedFormula, rewritten: QuantifiedFormula, b: Binding, seeds,
                      windows_orig: dict, windows_new: dict, cap: int = DEFAULT_CAP,
                      report: OracleReport | None = None, functions=None) -> OracleReport:
    """Truth of both quantifiers must agree under every seeded array filling."""
    rep = report or OracleReport("equivalence")
    rows_o = _rows_for(orig, windows_orig, b, cap, functions)
    rows_n = _rows_for(rewritten, windows_new, b, cap, functions)
    if not (rep.size_x or rep.size_y):
        rep.size_x, rep.size_y = len(rows_o), len(rows_n)
    rep.truth_equal = True
    for seed in seeds:
        try:
            t_o = quantifier_truth(orig, rows_o, b, seed, functions)
            t_n = quantifier_truth(rewritten, rows_n, b, seed, functions)
        except RowError as exc:
            rep.truth_equal = False
            rep.error = f"evaluation error: {exc}"
            rep.code = "E_EVAL"
            return rep
        rep.truths.append([t_o, t_n])
        if t_o != t_n:
            rep.truth_equal = False
            rep.fail("truth", {"seed": seed, "original": t_o, "rewritten": t_n})
    return rep


def _syntactic_windows(formula: QuantifiedFormula, names, b: Binding) -> dict:
    out = {}
    for v in names:
        try:
            d = extract_domain(formula.domain, (v,), formula.variables)
        except PatternError:
            continue
        out[v] = (_value(d.lower[v], b), _value(d.upper[v], b))
    return out


def run_oracle(outcome, binding: Binding, seeds=range(10), cap: int = DEFAULT_CAP, functions=None) -> list[OracleReport]:
    """Full battery for every pass of a rewrite outcome."""
    reports = []
    windows: dict = {}
    formula = outcome.original
    for rec in outcome.passes:
        r = rec.result
        if r is None:
            continue
        label = E.to_text(r.pattern.index_expr())
        rep = OracleReport(f"{r.pattern.array}[{label}]")
        try:
            if r.wrapped:
                rep.injective = rep.image_equal = rep.inverse_laws = rep.non_overlap = True
                w = dict(windows)
                w.update(_syntactic_windows(formula, [v for v in formula.variables if v not in w], binding))
                check_equivalence(formula, r.formula, binding, seeds, w, w, cap, rep, functions)
                reports.append(rep)
                formula = r.formula
                continue
            rest = [v for v in formula.variables if v not in r.pattern.variables]
            if rest and E.mentions_vars(r.spec.residual, rest):
                rep.error = "bijection check needs a residual free of other variables"
                rep.code = "E_ORACLE_SCOPE"
            else:
                check_bijection(r.pattern, r.spec, _strip_rest(r.domain, rest), r.inverse, binding,
                                r.offset, r.variable, cap, rep, functions)
                ok, witness = brute_non_overlap(r.pattern, r.spec, binding, cap=cap)
                rep.non_overlap = ok
                if not ok:
                    rep.fail("non-overlap", witness)
            pw = pattern_windows(r.spec, binding, r.pattern)
            missing = [v for v in rest if v not in windows]
            windows.update(_syntactic_windows(formula, missing, binding))
            w_orig = dict(windows)
            w_orig.update(pw)
            w_new = dict(windows)
            w_new[r.variable] = y_window(r.pattern, r.spec, binding, r.offset)
            check_equivalence(formula, r.formula, binding, seeds, w_orig, w_new, cap, rep, functions)
            windows = w_new
        except OracleError as exc:
            rep.error, rep.code = str(exc), exc.code
        except RowError as exc:
            rep.error, rep.code = f"evaluation error: {exc}", "E_EVAL"
        reports.append(rep)
        formula = r.formula
    return reports


def _strip_rest(Y: Expr, rest) -> Expr:
    """Conjuncts of Y that do not mention variables kept from the original quantifier."""
    if not rest:
        return Y
    return E.conj(*[c for c in E.conjuncts(Y) if not E.mentions_vars(c, rest)])


__all__ = [
    "CapExceeded", "DEFAULT_CAP", "OracleReport", "UnboundedDomain", "brute_non_overlap",
    "check_bijection", "check_equivalence", "enumerate_X", "enumerate_Y", "pattern_windows",
    "quantifier_truth", "run_oracle", "y_window",
]
