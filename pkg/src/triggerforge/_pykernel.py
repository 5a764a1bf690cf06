"""Pure-Python row evaluator with the same contract as the compiled kernel.

``eval_rows(program, params, cols, seed, out, status)`` fills ``out[r]``
with the value of the program on row ``r`` of ``cols`` and sets
``status[r]`` to 0 (ok), 1 (division or modulo by zero) or 2 (result
outside int64; the caller re-evaluates such rows exactly).
"""
from __future__ import annotations

from .bytecode import INT64_MAX, INT64_MIN, Program
from .core.evaluate import seeded_value
from .core.expr import Expr

_SYM = {"add": "+", "sub": "-", "mul": "*", "lt": "<", "le": "<=", "gt": ">",
        "ge": ">=", "eq": "==", "ne": "!="}


def _td(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _tm(a, b):
    return a - b * _td(a, b)


def _source(e: Expr, program: Program) -> str:
    op = e.op
    if op == "int":
        return str(e.data)
    if op == "bool":
        return "True" if e.data else "False"
    if op == "var":
        return f"v{program.variables.index(e.data)}"
    if op == "param":
        return f"P[{program.params.index(e.data)}]"
    if op == "access":
        return f"_sv(seed, {program.arrays[e.data]}, {_source(e.args[0], program)})"
    if op == "neg":
        return f"(-{_source(e.args[0], program)})"
    if op == "abs":
        return f"abs({_source(e.args[0], program)})"
    if op == "not":
        return f"(not {_source(e.args[0], program)})"
    a = _source(e.args[0], program)
    if op == "implies":
        return f"((not {a}) or {_source(e.args[1], program)})"
    b = _source(e.args[1], program)
    if op == "div":
        return f"_td({a}, {b})"
    if op == "mod":
        return f"_tm({a}, {b})"
    if op in ("and", "or"):
        return f"({a} {op} {b})"
    return f"({a} {_SYM[op]} {b})"


_CACHE: dict = {}


def _compiled(program: Program):
    key = id(program)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is program:
        return hit[1]
    unpack = ", ".join(f"v{i}" for i in range(len(program.variables)))
    lines = [
        "def run(cols, P, seed, out, status):",
        "    for r in range(len(cols)):",
    ]
    if program.variables:
        lines.append(f"        {unpack}, = cols[r]")
    lines += [
        "        try:",
        f"            val = int({_source(program.expr, program)})",
        "        except ZeroDivisionError:",
        "            status[r] = 1",
        "            continue",
        "        if val < LO or val > HI:",
        "            status[r] = 2",
        "        else:",
        "            out[r] = val",
        "            status[r] = 0",
    ]
    ns = {"_td": _td, "_tm": _tm, "_sv": seeded_value, "LO": INT64_MIN, "HI": INT64_MAX}
    exec("\n".join(lines), ns)  # noqa: S102 - source built from our own AST
    fn = ns["run"]
    if len(_CACHE) > 512:
        _CACHE.clear()
    _CACHE[key] = (program, fn)
    return fn


def eval_rows(program: Program, params, cols, seed: int, out, status) -> None:
    rows = cols.tolist() if hasattr(cols, "tolist") else cols
    P = [int(p) for p in params]
    _compiled(program)(rows, P, int(seed), out, status)


__all__ = ["eval_rows"]
