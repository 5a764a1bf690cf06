"""Integer/boolean expression trees shared by every analysis.

Expressions are immutable and hashable; all constructors check sorts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

INT = "int"
BOOL = "bool"

ARITH_BINARY = ("add", "sub", "mul", "div", "mod")
COMPARISONS = ("lt", "le", "gt", "ge", "eq", "ne")
CONNECTIVES = ("and", "or", "implies")

_BINARY_SYMBOL = {
    "add": "+", "sub": "-", "mul": "*", "div": "/", "mod": "%",
    "lt": "<", "le": "<=", "gt": ">", "ge": ">=", "eq": "==", "ne": "!=",
    "and": "&&", "or": "||", "implies": "==>",
}
SYMBOL_TO_OP = {v: k for k, v in _BINARY_SYMBOL.items()}

# Binding strength for printing; mirrors C.
_PREC = {
    "implies": 1, "or": 2, "and": 3, "eq": 4, "ne": 4,
    "lt": 5, "le": 5, "gt": 5, "ge": 5,
    "add": 6, "sub": 6, "mul": 7, "div": 7, "mod": 7,
    "neg": 8, "not": 8,
}
_ATOM_PREC = 9


class SortError(TypeError):
    """An expression was built with children of the wrong sort."""


@dataclass(frozen=True, slots=True)
class Expr:
    op: str
    args: tuple = ()
    data: object = None

    @property
    def sort(self) -> str:
        op = self.op
        if op in ("bool", "not") or op in COMPARISONS or op in CONNECTIVES:
            return BOOL
        if op == "trigger":
            return self.args[0].sort
        return INT

    @property
    def name(self) -> str:
        """Symbol name for params, vars, accesses and calls."""
        return self.data  # type: ignore[return-value]

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"Expr<{to_text(self)}>"

    # operator sugar keeps tests and builders short
    def __add__(self, other): return add(self, lift(other))
    def __radd__(self, other): return add(lift(other), self)
    def __sub__(self, other): return sub(self, lift(other))
    def __rsub__(self, other): return sub(lift(other), self)
    def __mul__(self, other): return mul(self, lift(other))
    def __rmul__(self, other): return mul(lift(other), self)
    def __neg__(self): return neg(self)


def lift(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, bool):
        return boolean(v)
    if isinstance(v, int):
        return num(v)
    raise TypeError(f"cannot lift {v!r} to an expression")


def _need(e: Expr, sort: str, ctx: str) -> None:
    if not isinstance(e, Expr):
        raise SortError(f"{ctx}: expected expression, got {e!r}")
    if e.sort != sort:
        raise SortError(f"{ctx}: expected {sort} operand, got {e.sort} ({to_text(e)})")


# -- constructors -----------------------------------------------------------

def num(v: int) -> Expr:
    return Expr("int", (), int(v))


def boolean(v: bool) -> Expr:
    return Expr("bool", (), bool(v))


TRUE = boolean(True)
FALSE = boolean(False)
ZERO = num(0)
ONE = num(1)


def param(name: str) -> Expr:
    return Expr("param", (), name)


def var(name: str) -> Expr:
    return Expr("var", (), name)


def access(array: str, index: Expr) -> Expr:
    _need(index, INT, f"index of {array}")
    return Expr("access", (index,), array)


def call(fn: str, *args: Expr) -> Expr:
    for a in args:
        _need(a, INT, f"argument of {fn}")
    return Expr("call", tuple(args), fn)


def trigger(e: Expr) -> Expr:
    if e.op != "access":
        raise SortError("trigger markers must enclose an array access")
    return Expr("trigger", (e,))


def neg(e: Expr) -> Expr:
    _need(e, INT, "unary minus")
    if e.op == "int":
        return num(-e.data)
    return Expr("neg", (e,))


def absval(e: Expr) -> Expr:
    _need(e, INT, "abs")
    return Expr("abs", (e,))


def binary(op: str, lhs: Expr, rhs: Expr) -> Expr:
    if op in ARITH_BINARY or op in COMPARISONS:
        _need(lhs, INT, op)
        _need(rhs, INT, op)
    elif op in CONNECTIVES:
        _need(lhs, BOOL, op)
        _need(rhs, BOOL, op)
    else:
        raise ValueError(f"unknown binary operator {op!r}")
    return Expr(op, (lhs, rhs))


def add(a, b): return binary("add", a, b)
def sub(a, b): return binary("sub", a, b)
def mul(a, b): return binary("mul", a, b)
def div(a, b): return binary("div", a, b)
def mod(a, b): return binary("mod", a, b)
def lt(a, b): return binary("lt", lift(a), lift(b))
def le(a, b): return binary("le", lift(a), lift(b))
def gt(a, b): return binary("gt", lift(a), lift(b))
def ge(a, b): return binary("ge", lift(a), lift(b))
def eq(a, b): return binary("eq", lift(a), lift(b))
def ne(a, b): return binary("ne", lift(a), lift(b))
def implies(a, b): return binary("implies", a, b)


def not_(e: Expr) -> Expr:
    _need(e, BOOL, "negation")
    return Expr("not", (e,))


def conj(*parts: Expr) -> Expr:
    """Left-nested conjunction; the empty conjunction is ``true``."""
    parts = tuple(p for p in parts if p != TRUE)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = binary("and", out, p)
    return out


def disj(*parts: Expr) -> Expr:
    parts = tuple(p for p in parts if p != FALSE)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = binary("or", out, p)
    return out


def rebuild(e: Expr, args) -> Expr:
    args = tuple(args)
    if args == e.args:
        return e
    return Expr(e.op, args, e.data)


# -- traversal --------------------------------------------------------------

def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order, left to right."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.args))


def walk_paths(e: Expr, path: tuple = ()) -> Iterator[tuple[tuple, Expr]]:
    yield path, e
    for i, a in enumerate(e.args):
        yield from walk_paths(a, path + (i,))


def at_path(e: Expr, path: tuple) -> Expr:
    for i in path:
        e = e.args[i]
    return e


def replace_at(e: Expr, path: tuple, new: Expr) -> Expr:
    if not path:
        return new
    i = path[0]
    args = list(e.args)
    args[i] = replace_at(args[i], path[1:], new)
    return rebuild(e, args)


def free_vars(e: Expr) -> set[str]:
    return {n.data for n in walk(e) if n.op == "var"}


def params_of(e: Expr) -> set[str]:
    return {n.data for n in walk(e) if n.op == "param"}


def arrays_of(e: Expr) -> set[str]:
    return {n.data for n in walk(e) if n.op == "access"}


def mentions_vars(e: Expr, names) -> bool:
    names = set(names)
    return any(n.op == "var" and n.data in names for n in walk(e))


def strip_triggers(e: Expr) -> Expr:
    if e.op == "trigger":
        return strip_triggers(e.args[0])
    if not e.args:
        return e
    return rebuild(e, (strip_triggers(a) for a in e.args))


def transform(e: Expr, fn: Callable[[Expr], Expr | None]) -> Expr:
    """Bottom-up rewrite; ``fn`` returns a replacement or None to keep."""
    if e.args:
        e = rebuild(e, (transform(a, fn) for a in e.args))
    out = fn(e)
    return e if out is None else out


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Simultaneous substitution of bound variables.

    Expressions contain no binders, so substitution is trivially
    capture-free; the replacement for each variable must be integer-sorted.
    """
    if not mapping:
        return e
    for name, rep in mapping.items():
        _need(rep, INT, f"substitution for {name}")

    def go(node: Expr) -> Expr:
        if node.op == "var":
            return mapping.get(node.data, node)
        if not node.args:
            return node
        return rebuild(node, (go(a) for a in node.args))

    return go(e)


def conjuncts(e: Expr) -> list[Expr]:
    """Flatten nested ``&&`` into a list (``true`` yields nothing)."""
    if e.op == "and":
        return conjuncts(e.args[0]) + conjuncts(e.args[1])
    if e == TRUE:
        return []
    return [e]


# -- printing ---------------------------------------------------------------

def _prec(e: Expr) -> int:
    return _PREC.get(e.op, _ATOM_PREC)


def to_text(e: Expr) -> str:
    op = e.op
    if op == "int":
        return str(e.data)
    if op == "bool":
        return "true" if e.data else "false"
    if op in ("param", "var"):
        return e.data
    if op == "access":
        return f"{e.data}[{to_text(e.args[0])}]"
    if op == "call":
        return f"{e.data}({', '.join(to_text(a) for a in e.args)})"
    if op == "abs":
        return f"abs({to_text(e.args[0])})"
    if op == "trigger":
        return "{: " + to_text(e.args[0]) + " :}"
    if op in ("neg", "not"):
        child = e.args[0]
        inner = to_text(child)
        # also guards "- -5", which would re-lex as a folded literal
        if _prec(child) < _PREC[op] or child.op == op or (op == "neg" and child.op == "int" and child.data < 0):
            inner = f"({inner})"
        return ("-" if op == "neg" else "!") + inner
    lhs, rhs = e.args
    p = _PREC[op]
    ltxt, rtxt = to_text(lhs), to_text(rhs)
    if op == "implies":
        if _prec(lhs) <= p:
            ltxt = f"({ltxt})"
        if _prec(rhs) < p:
            rtxt = f"({rtxt})"
    else:
        if _prec(lhs) < p or (p in (4, 5) and _prec(lhs) == p):
            ltxt = f"({ltxt})"
        if _prec(rhs) <= p:
            rtxt = f"({rtxt})"
    return f"{ltxt} {_BINARY_SYMBOL[op]} {rtxt}"
