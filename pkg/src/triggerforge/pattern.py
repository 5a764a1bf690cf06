"""Recognise linear index shapes and split a domain into bounds plus a residue."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import expr as E
from .core.expr import Expr
from .core.normal import NormalForm, canon, normalize, to_expr


class PatternError(Exception):
    code = "E_PATTERN"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class NotLinear(PatternError):
    code = "E_NOT_LINEAR"


class MissingLowerBound(PatternError):
    code = "E_MISSING_LOWER"

    def __init__(self, variable: str):
        super().__init__(f"no lower bound for {variable}")
        self.variable = variable


class MissingUpperBoundLast(PatternError):
    code = "E_MISSING_UPPER_LAST"

    def __init__(self, variable: str):
        super().__init__(f"no upper bound for the outermost pattern variable {variable}")
        self.variable = variable


class UnsupportedDomain(PatternError):
    code = "E_UNSUPPORTED_DOMAIN"


@dataclass(frozen=True)
class LinearPattern:
    """``index == sum(coefficients[i] * variables[i]) + offset``."""

    variables: tuple[str, ...]
    coefficients: tuple[NormalForm, ...]
    offset: NormalForm
    array: str | None = None
    path: tuple = ()

    @property
    def k(self) -> int:
        return len(self.variables)

    def coefficient(self, name: str) -> NormalForm:
        return self.coefficients[self.variables.index(name)]

    def index_expr(self, values: dict[str, Expr] | None = None) -> Expr:
        """The linear map applied to ``values`` (defaults to the variables themselves)."""
        total = self.offset
        for v, a in zip(self.variables, self.coefficients):
            x = normalize(values[v]) if values else NormalForm.atom(E.var(v))
            total = total + a * x
        return to_expr(total)

    def reordered(self, order) -> "LinearPattern":
        order = tuple(order)
        return LinearPattern(order, tuple(self.coefficient(v) for v in order), self.offset, self.array, self.path)

    def same_shape(self, other: "LinearPattern") -> bool:
        return dict(zip(self.variables, self.coefficients)) == dict(zip(other.variables, other.coefficients)) \
            and self.offset == other.offset

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "coefficients": [str(a) for a in self.coefficients],
            "offset": str(self.offset),
            "array": self.array,
        }


def detect_linear(index: Expr, variables, symtab=None) -> LinearPattern:
    """Split ``index`` into per-variable coefficients and a variable-free offset.

    ``variables`` are all variables bound by the quantifier; those whose
    coefficient normalizes to zero are left out of the pattern.
    """
    variables = tuple(variables)
    bound = set(variables)
    nf = normalize(E.strip_triggers(index))
    coeffs: dict[str, NormalForm] = {}
    offset = NormalForm(())
    for factors, c in nf.terms:
        hits = [a for a in factors if a.op == "var" and a.data in bound]
        for a in factors:
            if a.op != "var" and E.mentions_vars(a, bound):
                raise NotLinear(f"bound variable inside {E.to_text(a)}")
        if len(hits) > 1:
            raise NotLinear(f"product of bound variables in {E.to_text(E.strip_triggers(index))}")
        rest = NormalForm((((tuple(a for a in factors if a not in hits)), c),))
        if hits:
            name = hits[0].data
            coeffs[name] = coeffs.get(name, NormalForm(())) + rest
        else:
            offset = offset + rest
    order = tuple(v for v in variables if v in coeffs and coeffs[v].terms)
    if not order:
        raise NotLinear(f"index {E.to_text(E.strip_triggers(index))} mentions no bound variable")
    return LinearPattern(order, tuple(coeffs[v] for v in order), offset)


# -- domains -----------------------------------------------------------------

@dataclass
class DomainSpec:
    """Per-variable lower bound (inclusive) and upper bound (exclusive) plus ``C``.

    Upper bounds of all but the outermost pattern variable are optional.
    """

    variables: tuple[str, ...]
    lower: dict[str, Expr]
    upper: dict[str, Expr | None]
    residual: Expr = E.TRUE
    bound_conjuncts: dict[str, list[Expr]] = field(default_factory=dict)

    def size(self, name: str) -> Expr | None:
        hi = self.upper.get(name)
        if hi is None:
            return None
        return canon(E.sub(hi, self.lower[name]))

    def bounds_expr(self) -> Expr:
        parts = []
        for v in self.variables:
            parts.append(E.le(self.lower[v], E.var(v)))
            if self.upper.get(v) is not None:
                parts.append(E.lt(E.var(v), self.upper[v]))
        return E.conj(*parts)

    def as_facts(self) -> list[Expr]:
        return E.conjuncts(self.bounds_expr()) + E.conjuncts(self.residual)

    def reordered(self, order) -> "DomainSpec":
        return DomainSpec(tuple(order), self.lower, self.upper, self.residual, self.bound_conjuncts)

    def to_json(self) -> dict:
        return {
            "lower": {v: E.to_text(self.lower[v]) for v in self.variables},
            "upper": {v: (E.to_text(self.upper[v]) if self.upper.get(v) is not None else None)
                      for v in self.variables},
            "residual": E.to_text(self.residual),
        }


def _classify(c: Expr, names: set, bound: set):
    """``(variable, 'lower'|'upper', expr)`` for a bound conjunct, else None."""
    if c.op not in ("lt", "le", "gt", "ge"):
        return None
    lhs, rhs = (E.strip_triggers(a) for a in c.args)
    op = c.op
    if lhs.op == "var" and lhs.data in names and not E.mentions_vars(rhs, bound):
        v, e, flipped = lhs.data, rhs, False
    elif rhs.op == "var" and rhs.data in names and not E.mentions_vars(lhs, bound):
        v, e, flipped = rhs.data, lhs, True
    else:
        return None
    if flipped:
        op = {"lt": "gt", "le": "ge", "gt": "lt", "ge": "le"}[op]
    # now the shape is  v op e
    if op == "lt":
        return v, "upper", e
    if op == "le":
        return v, "upper", canon(E.add(e, E.ONE))
    if op == "ge":
        return v, "lower", e
    return v, "lower", canon(E.add(e, E.ONE))


def extract_domain(domain: Expr, variables, bound=None, require_last: bool = True) -> DomainSpec:
    """Partition the conjuncts of ``domain`` into bounds on ``variables`` and ``C``.

    ``variables`` are the pattern variables, innermost first.  ``bound``
    lists every variable of the quantifier; bound expressions must avoid
    all of them.  ``require_last=False`` defers the outermost-upper-bound
    check to the caller (useful before the variables are ordered).
    """
    variables = tuple(variables)
    names = set(variables)
    bound = set(bound) if bound is not None else names
    chosen: dict = {}
    all_bounds: dict[str, list[Expr]] = {v: [] for v in variables}
    residual: list[Expr] = []
    candidates: list[tuple[int, Expr, tuple]] = []
    for idx, c in enumerate(E.conjuncts(domain)):
        if c.op in ("or", "implies"):
            raise UnsupportedDomain(f"domain is not a conjunction: {E.to_text(c)}")
        hit = _classify(c, names, bound)
        if hit is None:
            residual.append((idx, c))
        else:
            candidates.append((idx, c, hit))
    for idx, c, (v, side, e) in candidates:
        key = (v, side)
        all_bounds[v].append(c)
        if key not in chosen:
            chosen[key] = (idx, c, e)
            continue
        _, old_c, old_e = chosen[key]
        new_nf, old_nf = normalize(e), normalize(old_e)
        tighter = new_nf.is_const and old_nf.is_const and (
            new_nf.const_value > old_nf.const_value if side == "lower" else new_nf.const_value < old_nf.const_value)
        if tighter:
            residual.append((chosen[key][0], old_c))
            chosen[key] = (idx, c, e)
        else:
            residual.append((idx, c))
    lower, upper = {}, {}
    for v in variables:
        if (v, "lower") not in chosen:
            raise MissingLowerBound(v)
        lower[v] = chosen[(v, "lower")][2]
        upper[v] = chosen[(v, "upper")][2] if (v, "upper") in chosen else None
    if require_last and upper[variables[-1]] is None:
        raise MissingUpperBoundLast(variables[-1])
    residual.sort(key=lambda ic: ic[0])
    return DomainSpec(variables, lower, upper, E.conj(*[c for _, c in residual]), all_bounds)


# -- sites -------------------------------------------------------------------

@dataclass(frozen=True)
class Site:
    path: tuple
    access: Expr
    pattern: LinearPattern | None
    error: PatternError | None = None
    marked: bool = False

    @property
    def array(self) -> str:
        return self.access.data


def find_sites(body: Expr, variables) -> list[Site]:
    """Every array access whose index mentions a bound variable; marked ones first."""
    bound = set(variables)
    marked_paths = set()
    for path, node in E.walk_paths(body):
        if node.op == "trigger":
            for sub, inner in E.walk_paths(node.args[0], path + (0,)):
                if inner.op == "access":
                    marked_paths.add(sub)
                    break
    sites = []
    for path, node in E.walk_paths(body):
        if node.op != "access" or not E.mentions_vars(node.args[0], bound):
            continue
        try:
            p = detect_linear(node.args[0], variables)
            p = LinearPattern(p.variables, p.coefficients, p.offset, node.data, path)
            sites.append(Site(path, node, p, None, path in marked_paths))
        except NotLinear as exc:
            sites.append(Site(path, node, None, exc, path in marked_paths))
    return sorted(sites, key=lambda s: not s.marked)


# -- ordering ----------------------------------------------------------------

_MAX_ORDERS = 24


def order_variables(p: LinearPattern, d: DomainSpec, checker):
    """Find an order of the pattern variables the checker accepts.

    ``checker`` provides ``check(p, d) -> ConditionReport`` and
    ``link(p, d, inner, outer) -> bool`` (a cheap fast path holds
    between consecutive variables).  Returns ``(pattern, domain, report)``;
    when nothing is accepted the declaration order comes back with its
    report.
    """
    first = checker.check(p, d)
    if p.k == 1 or first.all_proven:
        return p, d, first
    perms = [perm for perm in itertools.permutations(p.variables) if perm != p.variables]

    def links(perm) -> int:
        q, e = p.reordered(perm), d.reordered(perm)
        return sum(bool(checker.link(q, e, perm[i], perm[i + 1])) for i in range(len(perm) - 1))

    perms.sort(key=lambda perm: -links(perm))
    for perm in perms[:_MAX_ORDERS]:
        q = p.reordered(perm)
        try:
            e = d.reordered(perm)
            if e.upper.get(perm[-1]) is None:
                continue
        except KeyError:
            continue
        report = checker.check(q, e)
        if report.all_proven:
            return q, e, report
    return p, d, first
