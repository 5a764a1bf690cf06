"""Replace a multi-variable linear index by a single fresh variable.

For a pattern ``sum a_i x_i + b`` over ``min_i <= x_i (< max_i)`` the
rewrite quantifies over the index value ``x`` itself.  Each original
variable is recovered by peeling remainders off ``|x - off|`` from the
outermost coefficient inwards, and the new domain keeps exactly the
indices the original tuples hit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .conditions import ConditionChecker, ConditionReport
from .core import expr as E
from .core.expr import Expr
from .core.normal import NormalForm, canon, normalize, to_expr
from .dsl.parser import KEYWORDS
from .dsl.syntax import FunctionDef, QuantifiedFormula
from .pattern import (DomainSpec, LinearPattern, MissingUpperBoundLast, PatternError,
                      Site, extract_domain, find_sites, order_variables)
from .simplify import Simplifier, cosmetic

MUTATIONS = (
    "drop-divisibility", "flip-sign", "off+1", "off-1",
    "swap-divmod", "drop-residual", "drop-bound-folding",
)


class RewriteRefused(Exception):
    def __init__(self, code: str, message: str, report: ConditionReport | None = None):
        super().__init__(message)
        self.code, self.message, self.report = code, message, report


class WrapError(RewriteRefused):
    pass


def _magnitude(a: NormalForm, sign: int | None) -> Expr:
    if sign is None:
        c = a.const_value if a.is_const else None
        if c is None:
            return E.absval(to_expr(a))
        sign = 1 if c > 0 else -1
    return to_expr(a if sign > 0 else -a)


def _sign_of(p: LinearPattern, sign: int | None) -> int:
    if sign is not None:
        return sign
    a = p.coefficients[0]
    if a.is_const and a.const_value:
        return 1 if a.const_value > 0 else -1
    raise ValueError("coefficient sign must be known")


def build_offset(p: LinearPattern, d: DomainSpec, shift: int = 0) -> Expr:
    total = p.offset + NormalForm.const(shift)
    for v, a in zip(p.variables, p.coefficients):
        total = total + a * normalize(d.lower[v])
    return to_expr(total)


def build_base(p: LinearPattern, d: DomainSpec, i: int, x: Expr, sign: int | None = None,
               off: Expr | None = None) -> Expr:
    """Remainder chain, 1-based ``i``: ``base_k = |x - off|``, ``base_i = base_{i+1} mod |a_{i+1}|``."""
    if not 1 <= i <= p.k:
        raise IndexError(i)
    off = build_offset(p, d) if off is None else off
    base = E.absval(canon(E.sub(x, off)))
    for j in range(p.k, i, -1):
        base = E.mod(base, _magnitude(p.coefficients[j - 1], sign))
    return base


def build_f_inv(p: LinearPattern, d: DomainSpec, x: Expr, sign: int | None = None,
                off: Expr | None = None, swap: bool = False) -> list[Expr]:
    """Component ``i`` is ``base_i / |a_i| + min_i`` (``swap`` uses ``mod``, a test mutation)."""
    out = []
    for i in range(1, p.k + 1):
        base = build_base(p, d, i, x, sign, off)
        mag = _magnitude(p.coefficients[i - 1], sign)
        q = E.mod(base, mag) if swap else E.div(base, mag)
        lo = d.lower[p.variables[i - 1]]
        out.append(q if lo == E.ZERO else E.add(q, lo))
    return out


def _range(p: LinearPattern, d: DomainSpec, x: Expr, sign: int, off: Expr) -> Expr:
    ak = p.coefficients[-1]
    nk = normalize(d.size(p.variables[-1]))
    extent = to_expr(ak * nk) if (ak.is_const or nk.is_const) else E.mul(to_expr(ak), to_expr(nk))
    rel = canon(E.sub(x, off))
    if sign > 0:
        return E.conj(E.le(E.ZERO, rel), E.lt(rel, extent))
    return E.conj(E.lt(extent, rel), E.le(rel, E.ZERO))


@dataclass
class YParts:
    residual: list[Expr]
    folded: list[Expr]
    divisibility: Expr
    range: Expr


def _y_parts(p, d, x, sign, off, finv, mutations=()) -> YParts:
    mapping = dict(zip(p.variables, finv))
    residual = E.conjuncts(E.substitute(d.residual, mapping))
    folded = []
    for v, comp in zip(p.variables[:-1], finv[:-1]):
        hi = d.upper.get(v)
        if hi is not None:
            folded.append(E.lt(comp, hi))
    div = E.eq(E.mod(build_base(p, d, 1, x, sign, off), _magnitude(p.coefficients[0], sign)), E.ZERO)
    rng = _range(p, d, x, -sign if "flip-sign" in mutations else sign, off)
    return YParts(residual, folded, div, rng)


def build_domain_Y(p: LinearPattern, d: DomainSpec, x: Expr, sign: int | None = None) -> Expr:
    """Unsimplified new domain: ``C(f_inv) && folded bounds && divisibility && range``."""
    sign = _sign_of(p, sign)
    off = build_offset(p, d)
    parts = _y_parts(p, d, x, sign, off, build_f_inv(p, d, x, sign, off))
    return E.conj(*parts.residual, *parts.folded, parts.divisibility, parts.range)


# -- whole rewrite -----------------------------------------------------------

@dataclass
class RewriteResult:
    variable: str
    offset: Expr
    bases: list[Expr]
    inverse: list[Expr]
    domain: Expr
    formula: QuantifiedFormula
    report: ConditionReport
    pattern: LinearPattern
    spec: DomainSpec
    simplifications: list[str] = field(default_factory=list)
    definitions: list[FunctionDef] = field(default_factory=list)
    wrapped: bool = False

    def to_json(self) -> dict:
        return {
            "variable": self.variable,
            "offset": E.to_text(self.offset),
            "bases": [E.to_text(b) for b in self.bases],
            "inverse": [E.to_text(c) for c in self.inverse],
            "domain": E.to_text(self.domain),
            "simplifications": list(self.simplifications),
            "wrapped": self.wrapped,
        }


def fresh_name(taken) -> str:
    taken = set(taken) | KEYWORDS
    if "x" not in taken:
        return "x"
    i = 0
    while f"x{i}" in taken:
        i += 1
    return f"x{i}"


def _same_index(a: Expr, b: Expr) -> bool:
    return normalize(E.strip_triggers(a)) == normalize(E.strip_triggers(b))


def _replace_accesses(body: Expr, target: Expr, new_index: Expr) -> Expr:
    """Every access whose index equals ``target``'s (after normalization) reads ``new_index``."""
    idx = target.args[0]

    def fn(node: Expr):
        if node.op == "access" and _same_index(node.args[0], idx):
            return E.Expr("access", (new_index,), node.data)
        return None

    return _top_down(body, fn)


def _top_down(e: Expr, fn) -> Expr:
    out = fn(e)
    if out is not None:
        return out
    if not e.args:
        return e
    return E.rebuild(e, (_top_down(a, fn) for a in e.args))


def _tidy_indices(body: Expr) -> Expr:
    def fn(node: Expr):
        if node.op == "access" and not any(n.op == "trigger" for n in E.walk(node.args[0])):
            return E.Expr("access", (cosmetic(node.args[0]),), node.data)
        return None

    return E.transform(body, fn)


def rewrite(formula: QuantifiedFormula, site: Site, report: ConditionReport, symbols=None,
            spec: DomainSpec | None = None, mutations=(), taken=()) -> RewriteResult:
    """Rewrite the site's pattern variables of ``formula`` into one fresh variable."""
    if not report.all_proven:
        code, msg = report.first_failure()
        raise RewriteRefused(code, msg, report)
    unknown_m = set(mutations) - set(MUTATIONS)
    if unknown_m:
        raise ValueError(f"unknown mutations {sorted(unknown_m)}")
    p = site.pattern.reordered(report.order) if report.order else site.pattern
    if spec is None:
        spec = extract_domain(formula.domain, p.variables, formula.variables)
    d = spec
    facts = symbols.facts() if symbols is not None else []
    names = set(formula.variables) | set(taken)
    if symbols is not None:
        names |= symbols.names()
    xname = fresh_name(names)
    x = E.var(xname)
    sign = report.sign
    shift = 1 if "off+1" in mutations else -1 if "off-1" in mutations else 0
    off = build_offset(p, d, shift)
    bases = [build_base(p, d, i, x, sign, off) for i in range(1, p.k + 1)]
    finv_raw = build_f_inv(p, d, x, sign, off, swap="swap-divmod" in mutations)

    rng = cosmetic(_range(p, d, x, -sign if "flip-sign" in mutations else sign, off))
    simp = Simplifier(facts + E.conjuncts(rng))
    finv = [simp.run(c) for c in finv_raw]
    parts = _y_parts(p, d, x, sign, off, finv, mutations)

    conj: list[Expr] = []
    if "drop-residual" not in mutations:
        conj += parts.residual
    if "drop-bound-folding" not in mutations:
        conj += parts.folded
    kept = []
    for c in conj:
        s = simp.run(c)
        if s != E.TRUE:
            kept.append(s)
    if "drop-divisibility" not in mutations:
        div_s = simp.run(parts.divisibility)
        if div_s != E.TRUE:
            # readable form: the remainder chain as built, constants folded
            kept.append(cosmetic(parts.divisibility) if div_s != E.FALSE else div_s)
    kept.extend(E.conjuncts(rng))
    domain = E.conj(*kept)

    mapping = dict(zip(p.variables, finv))
    body = _replace_accesses(formula.body, site.access, x)
    body = _tidy_indices(E.substitute(body, mapping))
    rest = tuple(v for v in formula.variables if v not in p.variables)
    new = QuantifiedFormula(rest + (xname,), domain, body, formula.span)
    return RewriteResult(xname, off, bases, finv, domain, new, report, p, d,
                         list(simp.applied))


def wrap_access(result: RewriteResult, original: QuantifiedFormula, mode: str = "acc1d") -> RewriteResult:
    """Keep the original variable but route the index through ``acc1d``."""
    if mode != "acc1d":
        raise WrapError("E_WRAP_MODE", f"unsupported wrapper {mode}")
    p, d = result.pattern, result.spec
    if p.k != 1:
        raise WrapError("E_WRAP_K", f"acc1d wraps one-dimensional patterns only (k={p.k})", result.report)
    v = p.variables[0]
    call = E.call("acc1d", E.var(v), to_expr(p.offset), d.size(v), to_expr(p.coefficients[0]))
    body = _replace_accesses(original.body, E.at_path(original.body, p.path), call)
    formula = QuantifiedFormula(original.variables, original.domain, body, original.span)
    formals = ("x", "b", "n", "a")
    definition = FunctionDef("acc1d", formals, E.add(E.mul(E.var("x"), E.var("a")), E.var("b")))
    return RewriteResult(v, result.offset, result.bases, result.inverse, original.domain, formula,
                         result.report, p, d, result.simplifications, [definition], True)


# -- multi-pass driver ---------------------------------------------------------

@dataclass
class PassRecord:
    site: Site
    report: ConditionReport | None
    result: RewriteResult | None
    error: str | None = None
    code: str | None = None


@dataclass
class QuantifierOutcome:
    original: QuantifiedFormula
    formula: QuantifiedFormula
    status: str  # rewritten | pure | refused
    passes: list[PassRecord] = field(default_factory=list)
    code: str | None = None
    message: str | None = None
    definitions: list[FunctionDef] = field(default_factory=list)

    @property
    def results(self) -> list[RewriteResult]:
        return [r.result for r in self.passes if r.result is not None]


def _pure_cover(body: Expr, variables) -> set[str]:
    return {n.args[0].data for n in E.walk(body)
            if n.op == "access" and E.strip_triggers(n.args[0]).op == "var"
            and E.strip_triggers(n.args[0]).data in variables}


def _attempt(formula, site, symbols, checker, mutations, taken):
    p = site.pattern
    d = extract_domain(formula.domain, p.variables, formula.variables, require_last=False)
    p, d, report = order_variables(p, d, checker)
    if d.upper.get(p.variables[-1]) is None:
        raise MissingUpperBoundLast(p.variables[-1])
    if not report.all_proven:
        code, msg = report.first_failure()
        raise RewriteRefused(code, msg, report)
    return report, rewrite(formula, site, report, symbols, d, mutations, taken)


def rewrite_quantifier(formula: QuantifiedFormula, symbols, max_passes: int = 4,
                       wrap: str | None = None, mutations=()) -> QuantifierOutcome:
    checker = ConditionChecker(symbols.facts() if symbols is not None else [])
    current = formula
    fresh: set[str] = set()
    taken: set[str] = set(formula.variables)
    out = QuantifierOutcome(formula, formula, "pure")
    for _ in range(max_passes):
        variables = set(current.variables)
        if _pure_cover(current.body, variables) >= variables:
            break
        sites = find_sites(current.body, current.variables)
        open_sites = [s for s in sites if not (s.pattern and s.pattern.k == 1 and
                                               E.strip_triggers(s.access.args[0]).op == "var")]
        open_sites = [s for s in open_sites if not (s.pattern and set(s.pattern.variables) & fresh)]
        if not open_sites:
            if not out.passes and not sites:
                out.status, out.code, out.message = "refused", "E_NO_SITE", "no array access indexed by a bound variable"
            break
        done = None
        failures = []
        for site in open_sites:
            if site.pattern is None:
                failures.append(PassRecord(site, None, None, site.error.message, site.error.code))
                continue
            try:
                report, result = _attempt(current, site, symbols, checker, mutations, taken)
            except RewriteRefused as exc:
                failures.append(PassRecord(site, exc.report, None, exc.message, exc.code))
                continue
            except PatternError as exc:
                failures.append(PassRecord(site, None, None, exc.message, exc.code))
                continue
            if wrap:
                try:
                    result = wrap_access(result, current, wrap)
                except WrapError as exc:
                    failures.append(PassRecord(site, result.report, None, exc.message, exc.code))
                    continue
            done = PassRecord(site, report, result)
            break
        if done is None:
            if not out.passes:
                first = failures[0]
                out.status, out.code, out.message = "refused", first.code, first.error
                out.passes.extend(failures)
            break
        out.passes.append(done)
        out.status = "rewritten"
        current = done.result.formula
        out.definitions.extend(d for d in done.result.definitions if d not in out.definitions)
        fresh.add(done.result.variable)
        taken |= set(current.variables)
        if wrap:
            break
    out.formula = current
    return out
