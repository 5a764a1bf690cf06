"""Compile expressions into postfix bytecode for the row-evaluation kernels.

Instructions are ``(opcode, operand)`` pairs in a flat int64 array.  User
functions and ``acc1d`` are inlined; array reads use the seeded array
model (explicit tables stay on the slow path).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import expr as E
from .core.evaluate import array_key
from .core.expr import Expr

CONST, PARAM, VAR, ACCESS = 0, 1, 2, 3
NEG, ADD, SUB, MUL, DIV, MOD, ABS = 4, 5, 6, 7, 8, 9, 10
LT, LE, GT, GE, EQ, NE = 11, 12, 13, 14, 15, 16
NOT, JZK, JNZK = 17, 18, 19

_BIN = {"add": ADD, "sub": SUB, "mul": MUL, "div": DIV, "mod": MOD,
        "lt": LT, "le": LE, "gt": GT, "ge": GE, "eq": EQ, "ne": NE}

INT64_MIN, INT64_MAX = -(1 << 63), (1 << 63) - 1


class NotCompilable(ValueError):
    pass


@dataclass
class Program:
    code: np.ndarray
    variables: tuple[str, ...]
    params: tuple[str, ...]
    expr: Expr  # the inlined source, used by the Python kernel
    stack: int
    arrays: dict = field(default_factory=dict)  # name -> key


def inline_calls(e: Expr, functions=None) -> Expr:
    """Replace calls by their bodies (``acc1d`` included)."""
    functions = dict(functions or {})

    def fn(node: Expr):
        if node.op != "call":
            return None
        if node.data == "acc1d":
            x, b, _n, a = node.args
            return E.add(E.mul(x, a), b)
        if node.data in functions:
            formals, body = functions[node.data]
            return inline_calls(E.substitute(body, dict(zip(formals, node.args))), functions)
        raise NotCompilable(f"unknown function {node.data}")

    return E.transform(e, fn)


def compile_expr(e: Expr, variables, params=None, functions=None) -> Program:
    e = inline_calls(E.strip_triggers(e), functions)
    variables = tuple(variables)
    if params is None:
        params = tuple(sorted(E.params_of(e)))
    params = tuple(params)
    vi = {v: i for i, v in enumerate(variables)}
    pi = {p: i for i, p in enumerate(params)}
    code: list[int] = []
    arrays: dict[str, int] = {}
    depth = [0, 0]

    def push(n=1):
        depth[0] += n
        depth[1] = max(depth[1], depth[0])

    def emit(op, arg=0):
        code.extend((op, arg))

    def go(node: Expr) -> None:
        op = node.op
        if op in ("int", "bool"):
            v = int(node.data)
            if not INT64_MIN <= v <= INT64_MAX:
                raise NotCompilable("literal outside int64")
            emit(CONST, v)
            push()
        elif op == "var":
            if node.data not in vi:
                raise NotCompilable(f"unbound variable {node.data}")
            emit(VAR, vi[node.data])
            push()
        elif op == "param":
            if node.data not in pi:
                raise NotCompilable(f"unbound parameter {node.data}")
            emit(PARAM, pi[node.data])
            push()
        elif op == "access":
            go(node.args[0])
            key = arrays.setdefault(node.data, array_key(node.data))
            emit(ACCESS, key)
        elif op in ("neg", "abs", "not"):
            go(node.args[0])
            emit({"neg": NEG, "abs": ABS, "not": NOT}[op])
        elif op in _BIN:
            go(node.args[0])
            go(node.args[1])
            emit(_BIN[op])
            depth[0] -= 1
        elif op in ("and", "or", "implies"):
            go(node.args[0])
            if op == "implies":
                emit(NOT)
            at = len(code)
            emit(JZK if op == "and" else JNZK, -1)
            depth[0] -= 1
            go(node.args[1])
            code[at + 1] = len(code) // 2  # jump target, in instructions
        else:
            raise NotCompilable(f"cannot compile {op}")

    go(e)
    return Program(np.asarray(code, dtype=np.int64), variables, params, e, max(depth[1], 1), arrays)
