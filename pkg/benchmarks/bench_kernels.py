"""Compare the compiled and pure-Python row kernels.

    python benchmarks/bench_kernels.py --rows 200000 --repeat 5

Each case compiles one expression and evaluates it over a grid of rows;
the best of ``--repeat`` runs is reported per backend.
"""
import argparse
import time

import numpy as np

from triggerforge import kernels
from triggerforge.bytecode import compile_expr
from triggerforge.core.symbols import SymbolTable
from triggerforge.dsl.parser import parse_expr

CASES = {
    "inverse": "(x % 40) / 4 + 3 * (x / 40)",
    "new domain": "abs(x - 17) % 6 % 2 == 0 && 0 <= x - 17 && x - 17 < 30",
    "residual": "4 * y + x < 10 && x % 2 == 0 || x == y",
    "body read": "A[x + 4 * y] >= 0 && A[y] != 1",
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    syms = SymbolTable(params={}, arrays={"A": "int"})
    rng = np.random.default_rng(0)
    cols = rng.integers(-1000, 1000, size=(args.rows, 2), dtype=np.int64)
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    if len(backends) == 1:
        print("compiled kernel not built; timing the Python kernel only")

    print(f"{'case':<12} " + " ".join(f"{b + ' (ms)':>14}" for b in backends) + f" {'speedup':>9}")
    for name, text in CASES.items():
        prog = compile_expr(parse_expr(text, syms, ("x", "y")), ("x", "y"))
        results, times = {}, {}
        for b in backends:
            times[b] = best_of(lambda: kernels.raw_eval(prog, [], cols, 3, backend=b), args.repeat)
            results[b] = kernels.raw_eval(prog, [], cols, 3, backend=b)
        if len(backends) == 2:
            (vp, sp), (vc, sc) = results["python"], results["cython"]
            assert (vp == vc).all() and (sp == sc).all(), f"backends disagree on {name}"
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else ""
        print(f"{name:<12} " + " ".join(f"{times[b] * 1e3:14.2f}" for b in backends) + f" {speed:>9}")


if __name__ == "__main__":
    main()
