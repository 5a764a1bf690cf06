"""Row-evaluation backend: the compiled kernel when built, Python otherwise.

Set ``TRIGGERFORGE_PURE=1`` to force the Python kernel.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernel
from .bytecode import INT64_MAX, INT64_MIN, NotCompilable, Program, compile_expr, inline_calls
from .core.evaluate import MASK64, Binding, EvalError, evaluate

BACKEND = "python"
_impl = _pykernel
if os.environ.get("TRIGGERFORGE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernel  # type: ignore[attr-defined]

        _impl = _ckernel
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass


def backend_module(name: str | None = None):
    if name is None:
        return _impl
    if name == "python":
        return _pykernel
    if name == "cython":
        from . import _ckernel  # type: ignore[attr-defined]

        return _ckernel
    raise ValueError(name)


def raw_eval(program: Program, params, cols: np.ndarray, seed: int = 0, backend: str | None = None):
    """Run a kernel directly; returns ``(values, status)`` arrays."""
    cols = np.ascontiguousarray(cols, dtype=np.int64).reshape(len(cols), len(program.variables))
    out = np.zeros(len(cols), dtype=np.int64)
    status = np.zeros(len(cols), dtype=np.uint8)
    backend_module(backend).eval_rows(program, np.asarray(params, dtype=np.int64), cols,
                                      seed & MASK64, out, status)
    return out, status


class RowError(EvalError):
    def __init__(self, row: int, message: str):
        super().__init__(message)
        self.row = row


class Evaluator:
    """Evaluate one expression over many rows of variable values."""

    def __init__(self, expr, variables, binding: Binding, functions=None):
        self.expr = expr
        self.variables = tuple(variables)
        self.binding = binding
        self.functions = functions or {}
        self.program = None
        fast = not binding.arrays and not binding.functions
        if fast:
            try:
                prog = compile_expr(expr, self.variables, None, self.functions)
                params = [int(binding.params[p]) for p in prog.params]
                if all(INT64_MIN <= v <= INT64_MAX for v in params):
                    self.program, self.params = prog, params
            except (NotCompilable, KeyError):
                self.program = None

    def _slow(self, row, seed):
        e = inline_calls(self.expr, self.functions)
        return int(evaluate(e, self.binding.with_seed(seed), dict(zip(self.variables, row))))

    def rows(self, cols, seed: int | None = None) -> list[int]:
        """Values per row; raises RowError on division by zero."""
        cols = np.asarray(cols, dtype=np.int64).reshape(-1, len(self.variables))
        if seed is None:
            seed = self.binding.seed or 0
        if self.program is None:
            out = []
            for r, row in enumerate(cols.tolist()):
                try:
                    out.append(self._slow(row, seed))
                except EvalError as exc:
                    raise RowError(r, f"{exc} at {dict(zip(self.variables, row))}") from None
            return out
        values, status = raw_eval(self.program, self.params, cols, seed)
        bad = np.nonzero(status)[0]
        if len(bad) == 0:
            return values.tolist()
        result = values.tolist()
        rows = cols.tolist()
        for r in bad.tolist():
            if status[r] == 1:
                raise RowError(r, f"division by zero at {dict(zip(self.variables, rows[r]))}")
            result[r] = self._slow(rows[r], seed)
        return result


__all__ = ["BACKEND", "Evaluator", "RowError", "backend_module", "raw_eval"]
