"""Random rewrite instances whose side conditions hold by construction.

Each instance is a small ``.tfq`` program with one quantifier over
``x1..xk`` and an index ``sum a_i x_i + b``.  Coefficients grow so that
rows never overlap, either through the sizes themselves (``equal`` and
``leq`` links) or through an explicit residual bound (``residual`` link).
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from triggerforge.core.evaluate import Binding
from triggerforge.dsl.parser import parse

MAX_POINTS = 200
MAX_COEF = 9


@dataclass
class Instance:
    coefficients: list[int]
    lowers: list[int]
    sizes: list[int]
    offset: int
    links: list[str]          # per consecutive pair: equal | leq | residual
    unbounded: list[bool]     # variable has no syntactic upper bound
    residual: list[str]
    source: str

    @property
    def k(self) -> int:
        return len(self.coefficients)

    def parsed(self):
        sf = parse(self.source)
        return sf, sf.quantifiers[0]

    @property
    def binding(self) -> Binding:
        return Binding({})


def _term(a: int, v: str) -> str:
    return f"{a} * {v}" if a >= 0 else f"({a}) * {v}"


def generate(rng: random.Random, k: int | None = None, force_link: str | None = None) -> Instance:
    """One instance; retried internally until it fits the size limits."""
    while True:
        inst = _attempt(rng, k or rng.randint(1, 4), force_link)
        if inst is not None:
            return inst


def _attempt(rng: random.Random, k: int, force_link: str | None):
    sign = rng.choice((1, -1))
    mags = [rng.randint(1, 3)]
    sizes, links, unbounded = [], [], []
    for i in range(k - 1):
        link = force_link or rng.choice(("equal", "leq", "residual"))
        a = mags[-1]
        if link == "equal":
            n = rng.randint(1, max(1, MAX_COEF // a))
            nxt = a * n
        elif link == "leq":
            n = rng.randint(1, max(1, MAX_COEF // a))
            if a * n > MAX_COEF:
                return None
            nxt = rng.randint(a * n, MAX_COEF)
        else:
            # the size overshoots; a residual conjunct keeps rows apart
            if a >= MAX_COEF:
                return None
            nxt = rng.randint(a + 1, MAX_COEF)
            n = nxt // a + rng.randint(1, 2)
        if nxt > MAX_COEF or nxt == 0:
            return None
        sizes.append(n)
        links.append(link)
        unbounded.append(link == "residual" and rng.random() < 0.3)
        mags.append(nxt)
    sizes.append(rng.randint(1, 4))
    unbounded.append(False)
    total = 1
    for n in sizes:
        total *= n
    if total > MAX_POINTS:
        return None
    coeffs = [sign * m for m in mags]
    lowers = [rng.randint(-3, 3) for _ in range(k)]
    offset = rng.randint(-6, 6)
    names = [f"x{i + 1}" for i in range(k)]
    conj = []
    for i, v in enumerate(names):
        conj.append(f"{lowers[i]} <= {v}")
        if not unbounded[i]:
            conj.append(f"{v} < {lowers[i] + sizes[i]}")
    residual = []
    for i, link in enumerate(links):
        if link == "residual":
            parts = [f"{mags[j]} * ({names[j]} - ({lowers[j]}))" for j in range(i + 1)]
            residual.append(f"{' + '.join(parts)} < {mags[i + 1]}")
    if rng.random() < 0.25:
        j = rng.randrange(k)
        residual.append(f"({names[j]} - ({lowers[j]})) % 2 == 0")
    conj.extend(residual)
    index = " + ".join(_term(coeffs[i], names[i]) for i in range(k)) + f" + {offset}"
    order = list(names)
    if k > 1 and rng.random() < 0.3:
        rng.shuffle(order)
    body = rng.choice((f"A[{index}] >= 0", f"A[{index}] == B[{index}]", f"A[{index}] != 1"))
    source = (
        "array int A;\narray int B;\n"
        f"forall {', '.join('int ' + v for v in order)}; {' && '.join(conj)}; {body};\n"
    )
    return Instance(coeffs, lowers, sizes, offset, links, unbounded, residual, source)


def batch(count: int, seed: int = 0, **kw) -> list[Instance]:
    rng = random.Random(seed)
    return [generate(rng, **kw) for _ in range(count)]
