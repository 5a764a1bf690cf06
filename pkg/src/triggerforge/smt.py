"""SMT-LIB 2 text for quantified formulas with E-matching patterns.

Integer ``/`` and ``%`` are truncating in the DSL, so the script defines
``tdiv``/``tmod`` on top of the solver's Euclidean ``div``.
"""
from __future__ import annotations

import re

from .core import expr as E
from .core.expr import Expr
from .core.symbols import SymbolTable
from .dsl.syntax import FunctionDef, QuantifiedFormula

PATTERN_FUNCTIONS = frozenset({"acc1d"})
_ARITH_SYMBOLS = frozenset({"+", "-", "*", "div", "mod", "tdiv", "tmod", "abs"})
_RESERVED = frozenset({
    "div", "mod", "abs", "tdiv", "tmod", "and", "or", "not", "ite", "let", "forall",
    "exists", "true", "false", "distinct", "Int", "Bool", "assert", "par", "_", "!",
})

_PRELUDE = (
    "(define-fun tdiv ((a Int) (b Int)) Int (ite (>= a 0) (div a b) (- (div (- a) b))))",
    "(define-fun tmod ((a Int) (b Int)) Int (- a (* b (tdiv a b))))",
)
_BUILTIN_DEFS = {
    "acc1d": "(define-fun acc1d ((x Int) (b Int) (n Int) (a Int)) Int (+ (* x a) b))",
}
_OPS = {"add": "+", "sub": "-", "mul": "*", "div": "tdiv", "mod": "tmod",
        "lt": "<", "le": "<=", "gt": ">", "ge": ">=", "eq": "=",
        "and": "and", "or": "or", "implies": "=>"}


class SMTError(Exception):
    code = "E_SMT"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        self.message = message
        if code:
            self.code = code


def symbol(name: str) -> str:
    return f"|{name}|" if name in _RESERVED else name


def to_smt(e: Expr, names: dict | None = None) -> str:
    """Prefix form of one expression; ``names`` renames whole subterms."""
    if names and e in names:
        return names[e]
    op = e.op
    if op == "int":
        v = int(e.data)
        return str(v) if v >= 0 else f"(- {-v})"
    if op == "bool":
        return "true" if e.data else "false"
    if op in ("var", "param"):
        return symbol(e.data)
    if op == "trigger":
        return to_smt(e.args[0], names)
    if op == "access":
        return f"({symbol(e.data)} {to_smt(e.args[0], names)})"
    if op == "call":
        return f"({symbol(e.data)} {' '.join(to_smt(a, names) for a in e.args)})"
    if op == "neg":
        return f"(- {to_smt(e.args[0], names)})"
    if op == "abs":
        return f"(abs {to_smt(e.args[0], names)})"
    if op == "not":
        return f"(not {to_smt(e.args[0], names)})"
    a, b = (to_smt(x, names) for x in e.args)
    if op == "ne":
        return f"(not (= {a} {b}))"
    return f"({_OPS[op]} {a} {b})"


# -- pattern selection -----------------------------------------------------

def pattern_operators(term: Expr) -> set[str]:
    """Operator names in a pattern term.

    Variable-free arguments of a pattern function are hoisted to named
    constants at emission time, so they count as a single ``const``.
    """
    out = set()

    def visit(n: Expr):
        if n.op == "trigger":
            return visit(n.args[0])
        if n.op == "call":
            out.add(f"call:{n.data}")
            for a in n.args:
                if E.free_vars(a) or a.op in ("var", "param", "int"):
                    visit(a)
                else:
                    out.add("const")
            return
        out.add(n.op)
        for a in n.args:
            visit(a)

    visit(term)
    return out


def is_pure_pattern(term: Expr) -> bool:
    allowed = {"access", "var", "param", "int", "const"} | {f"call:{f}" for f in PATTERN_FUNCTIONS}
    return term.op == "access" and pattern_operators(term) <= allowed


def _candidates(body: Expr) -> tuple[list[Expr], list[Expr]]:
    """(pure, impure) trigger candidates; explicit markers take precedence."""
    marked = [n.args[0] for n in E.walk(body) if n.op == "trigger"]
    pool = marked or [n for n in E.walk(body) if n.op == "access"]
    pure, impure = [], []
    for n in pool:
        n = E.strip_triggers(n)
        target = pure if is_pure_pattern(n) else impure
        if n not in target:
            target.append(n)
    return pure, impure


def choose_patterns(formula: QuantifiedFormula) -> list[list[Expr]]:
    """Alternative patterns: single terms covering every variable, else one multi-pattern."""
    pure, impure = _candidates(formula.body)
    wanted = set(formula.variables)
    single = [[t] for t in pure if wanted <= E.free_vars(t)]
    if single:
        return single
    cover: list[Expr] = []
    seen: set[str] = set()
    for t in pure:
        fv = E.free_vars(t) & wanted
        if fv - seen:
            cover.append(t)
            seen |= fv
    if seen >= wanted and cover:
        return [cover]
    bad = impure[0] if impure else None
    where = f" ({E.to_text(bad)})" if bad is not None else ""
    raise SMTError(f"no arithmetic-free trigger covers {sorted(wanted - seen)}{where}", "E_IMPURE_TRIGGER")


def _hoist(patterns, counter) -> tuple[dict, list[str]]:
    """Compound parameter-only arguments of acc1d become named constants."""
    names, defs = {}, []
    for group in patterns:
        for t in group:
            for n in E.walk(t):
                if n.op != "call":
                    continue
                for a in n.args:
                    if a.op in ("var", "param") or (a.op == "int" and a.data >= 0) or E.free_vars(a) or a in names:
                        continue
                    name = f"tf_c{counter[0]}"
                    counter[0] += 1
                    names[a] = name
                    defs.append(f"(define-fun {name} () Int {to_smt(a)})")
    return names, defs


def _fn_def(name, formals, body: Expr) -> str:
    sort = "Bool" if body.sort == E.BOOL else "Int"
    env = {E.var(f): symbol(f) for f in formals}
    env.update({E.param(f): symbol(f) for f in formals})
    binders = " ".join(f"({symbol(f)} Int)" for f in formals)
    return f"(define-fun {symbol(name)} ({binders}) {sort} {to_smt(body, env)})"


def emit_quantifier(formula: QuantifiedFormula, no_pattern: bool = False, counter=None) -> list[str]:
    counter = counter if counter is not None else [0]
    binders = " ".join(f"({symbol(v)} Int)" for v in formula.variables)
    inner = f"(=> {to_smt(formula.domain)} {to_smt(formula.body)})"
    if no_pattern:
        return [f"(assert (forall ({binders}) {inner}))"]
    patterns = choose_patterns(formula)
    names, defs = _hoist(patterns, counter)
    if names:
        inner = f"(=> {to_smt(formula.domain, names)} {to_smt(formula.body, names)})"
    pats = " ".join(f":pattern ({' '.join(to_smt(t, names) for t in g)})" for g in patterns)
    return defs + [f"(assert (forall ({binders}) (! {inner} {pats})))"]


def emit_smt(formulas, symbols: SymbolTable, definitions=(), no_pattern: bool = False) -> str:
    """A complete script: declarations, assumptions, then one assert per quantifier."""
    if isinstance(formulas, QuantifiedFormula):
        formulas = [formulas]
    lines = ["(set-logic ALL)"] + list(_PRELUDE)
    for name in symbols.params:
        lines.append(f"(declare-const {symbol(name)} Int)")
    for name, facts in symbols.params.items():
        for f in facts:
            lines.append(f"(assert {to_smt(f)})")
    for name in symbols.arrays:
        lines.append(f"(declare-fun {symbol(name)} (Int) Int)")
    defined = set()
    used_calls = {n.data for f in formulas for part in (f.domain, f.body) for n in E.walk(part) if n.op == "call"}
    for d in definitions:
        if isinstance(d, FunctionDef) and d.name not in defined:
            lines.append(_fn_def(d.name, d.formals, d.body))
            defined.add(d.name)
    for name, (formals, body) in symbols.functions.items():
        if name not in defined:
            lines.append(_fn_def(name, formals, body))
            defined.add(name)
    for name in sorted(used_calls - defined):
        if name in _BUILTIN_DEFS:
            lines.append(_BUILTIN_DEFS[name])
    counter = [0]
    for f in formulas:
        lines.extend(emit_quantifier(f, no_pattern, counter))
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


_PATTERN_RE = re.compile(r":pattern\s*\(")


def pattern_texts(script: str) -> list[str]:
    """Every ``:pattern (...)`` group in an emitted script, balanced-paren extraction."""
    out = []
    for m in _PATTERN_RE.finditer(script):
        depth, i = 1, m.end()
        while depth and i < len(script):
            depth += {"(": 1, ")": -1}.get(script[i], 0)
            i += 1
        out.append(script[m.end():i - 1])
    return out


def arithmetic_in_patterns(script: str) -> list[str]:
    """Arithmetic symbols found inside pattern annotations (empty means pure)."""
    found = []
    for text in pattern_texts(script):
        for tok in re.findall(r"[^\s()]+", text):
            if tok in _ARITH_SYMBOLS:
                found.append(tok)
    return found


__all__ = ["SMTError", "arithmetic_in_patterns", "choose_patterns", "emit_quantifier", "emit_smt",
           "is_pure_pattern", "pattern_operators", "pattern_texts", "to_smt"]
