"""Concrete evaluation with C-style truncated division."""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .expr import Expr, to_text

MASK64 = (1 << 64) - 1


class EvalError(ArithmeticError):
    """Raised for division or modulo by zero and unbound symbols."""


def trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def trunc_mod(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("modulo by zero")
    return a - b * trunc_div(a, b)


def mix64(z: int) -> int:
    """splitmix64 finalizer; the compiled kernel implements the same."""
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def array_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def seeded_value(seed: int, key: int, index: int) -> int:
    """Deterministic pseudo-random cell of a seeded array.

    Cells are mostly zero with a seed-dependent density of values in
    [-3, 3], so quantified bodies over them are true for some seeds and
    false for others.
    """
    h = mix64(mix64((seed ^ (key << 20)) & MASK64) ^ (index & MASK64))
    density = 4 + (seed % 16) * 6
    if (h & 0xFF) >= density:
        return 0
    return ((h >> 32) % 7) - 3


def acc1d(x: int, b: int, n: int, a: int) -> int:
    return x * a + b


BUILTIN_FUNCTIONS: dict[str, Callable[..., int]] = {"acc1d": acc1d}


@dataclass
class Binding:
    """Concrete values for parameters and arrays.

    ``arrays`` maps a name to a callable or an explicit table; arrays not
    listed fall back to the seeded generator when ``seed`` is set.
    """

    params: Mapping[str, int] = field(default_factory=dict)
    arrays: Mapping[str, object] = field(default_factory=dict)
    seed: int | None = None
    functions: Mapping[str, Callable[..., int]] = field(default_factory=dict)

    def read(self, array: str, index: int) -> int:
        src = self.arrays.get(array)
        if src is None:
            if self.seed is None:
                raise EvalError(f"array {array} is not bound")
            return seeded_value(self.seed, array_key(array), index)
        if callable(src):
            return src(index)
        try:
            return src[index]  # type: ignore[index]
        except (KeyError, IndexError):
            raise EvalError(f"{array}[{index}] outside the explicit table") from None

    def with_seed(self, seed: int) -> "Binding":
        return Binding(self.params, self.arrays, seed, self.functions)


def evaluate(e: Expr, b: Binding, env: Mapping[str, int] | None = None):
    """Evaluate ``e``; returns int for integer sort and bool for boolean."""
    env = env or {}
    return _ev(e, b, env)


def _ev(e: Expr, b: Binding, env):
    op = e.op
    if op == "int" or op == "bool":
        return e.data
    if op == "var":
        try:
            return env[e.data]
        except KeyError:
            raise EvalError(f"unbound variable {e.data}") from None
    if op == "param":
        try:
            return b.params[e.data]
        except KeyError:
            raise EvalError(f"unbound parameter {e.data}") from None
    if op == "add":
        return _ev(e.args[0], b, env) + _ev(e.args[1], b, env)
    if op == "sub":
        return _ev(e.args[0], b, env) - _ev(e.args[1], b, env)
    if op == "mul":
        return _ev(e.args[0], b, env) * _ev(e.args[1], b, env)
    if op == "div":
        return trunc_div(_ev(e.args[0], b, env), _ev(e.args[1], b, env))
    if op == "mod":
        return trunc_mod(_ev(e.args[0], b, env), _ev(e.args[1], b, env))
    if op == "neg":
        return -_ev(e.args[0], b, env)
    if op == "abs":
        return abs(_ev(e.args[0], b, env))
    if op == "access":
        return b.read(e.data, _ev(e.args[0], b, env))
    if op == "trigger":
        return _ev(e.args[0], b, env)
    if op == "call":
        fn = b.functions.get(e.data) or BUILTIN_FUNCTIONS.get(e.data)
        if fn is None:
            raise EvalError(f"unknown function {e.data}")
        return fn(*(_ev(a, b, env) for a in e.args))
    if op == "and":
        return bool(_ev(e.args[0], b, env)) and bool(_ev(e.args[1], b, env))
    if op == "or":
        return bool(_ev(e.args[0], b, env)) or bool(_ev(e.args[1], b, env))
    if op == "implies":
        return (not _ev(e.args[0], b, env)) or bool(_ev(e.args[1], b, env))
    if op == "not":
        return not _ev(e.args[0], b, env)
    lhs, rhs = _ev(e.args[0], b, env), _ev(e.args[1], b, env)
    if op == "lt":
        return lhs < rhs
    if op == "le":
        return lhs <= rhs
    if op == "gt":
        return lhs > rhs
    if op == "ge":
        return lhs >= rhs
    if op == "eq":
        return lhs == rhs
    if op == "ne":
        return lhs != rhs
    raise EvalError(f"cannot evaluate {to_text(e)}")
