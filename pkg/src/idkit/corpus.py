"""Seeded random instance generators shared by tests, demos and the CLI.

Every instance is built from small integer data so all downstream checks
stay exact.  Generators are deterministic functions of their seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functions import PLQFunction, PolyhedralFunction, make_univariate, subdifferential
from .numerics import ZERO, Q as _Q, dot, rank, vec
from .polyhedra import Polyhedron, normal_cone, relative_interior_member


@dataclass(frozen=True)
class PolyInstance:
    Q: Polyhedron
    xbar: tuple
    vbar: tuple
    ri: bool
    seed: int


@dataclass(frozen=True)
class FunctionInstance:
    f: object
    xbar: tuple
    vbar: tuple
    ri: bool
    seed: int


def _row(rng, n):
    while True:
        a = tuple(int(t) for t in rng.integers(-3, 4, size=n))
        if any(a):
            return a


def random_polyhedron_instance(seed: int, n_max: int = 4, m_max: int = 8) -> PolyInstance:
    """A pointed polyhedron with a chosen point ``xbar`` and normal ``vbar``.

    ``xbar`` has between 1 and ``n`` independent active rows (occasionally a
    redundant extra one), the remaining rows have slack 1..3.  ``vbar`` is a
    nonnegative integer combination of a random subset of the active rows,
    so both relative-interior and relative-boundary cases occur.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(n + 1, m_max + 1))
    x0 = tuple(int(t) for t in rng.integers(-2, 3, size=n))
    k = int(rng.integers(1, n + 1))
    rows = []
    while len(rows) < k:
        a = _row(rng, n)
        if rank(rows + [a]) == len(rows) + 1:
            rows.append(a)
    if k >= 2 and len(rows) < m and rng.random() < 0.2:
        # degenerate: a positive combination of two active rows, also tight
        i, j = rng.choice(k, size=2, replace=False)
        rows.append(tuple(p + q for p, q in zip(rows[i], rows[j])))
    active = len(rows)
    while len(rows) < m or rank(rows) < n:
        rows.append(_row(rng, n))
    A = tuple(vec(r) for r in rows)
    b = []
    for t, a in enumerate(A):
        base = dot(a, vec(x0))
        b.append(base if t < active else base + int(rng.integers(1, 4)))
    Q = Polyhedron(A, tuple(b), n)
    mode = rng.random()
    if mode < 0.45:
        coefs = [int(rng.integers(1, 4)) for _ in range(active)]
    elif mode < 0.9:
        coefs = [int(rng.integers(0, 4)) * int(rng.random() < 0.5) for _ in range(active)]
    else:
        coefs = [0] * active
    vbar = tuple(sum((c * A[t][j] for t, c in enumerate(coefs)), ZERO) for j in range(n))
    xbar = vec(x0)
    ri = relative_interior_member(vbar, normal_cone(Q, xbar))
    return PolyInstance(Q, xbar, vbar, ri, seed)


def polyhedron_corpus(count: int = 200, seed: int = 0, **kw) -> list:
    return [random_polyhedron_instance(seed * 100_003 + k, **kw) for k in range(count)]


def random_polyhedral_function_instance(seed: int, n_max: int = 3) -> FunctionInstance:
    """``max_i <a_i, x> + b_i`` plus linear constraints, with a subgradient."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    x0 = tuple(_Q(int(t)) for t in rng.integers(-2, 3, size=n))
    p = int(rng.integers(2, 5))
    k_act = int(rng.integers(1, p + 1))
    pieces = []
    for t in range(p):
        a = vec(int(s) for s in rng.integers(-3, 4, size=n))
        off = 0 if t < k_act else -int(rng.integers(1, 4))
        pieces.append((a, off - dot(a, x0)))
    cons = []
    for t in range(int(rng.integers(0, 3))):
        c = vec(_row(rng, n))
        slack = 0 if rng.random() < 0.6 else int(rng.integers(1, 3))
        cons.append((c, dot(c, x0) + slack))
    f = PolyhedralFunction.make(pieces, cons, n)
    lam = [int(rng.integers(0, 3)) for _ in range(k_act)]
    if not any(lam) or rng.random() < 0.4:
        lam = [int(rng.integers(1, 3)) for _ in range(k_act)]
    tot = sum(lam)
    v = [ZERO] * n
    for t, l in enumerate(lam):
        for j in range(n):
            v[j] += _Q(l) / tot * pieces[t][0][j]
    for c, d in cons:
        if dot(c, x0) == d and rng.random() < 0.5:
            mu = int(rng.integers(0, 3))
            for j in range(n):
                v[j] += mu * c[j]
    vbar = tuple(v)
    S = subdifferential(f, x0)
    ri = relative_interior_member(vbar, S)
    return FunctionInstance(f, x0, vbar, ri, seed)


def polyhedral_function_corpus(count: int = 50, seed: int = 1, **kw) -> list:
    return [random_polyhedral_function_instance(seed * 100_003 + k, **kw) for k in range(count)]


def _kink_factor(rng, c, sc: bool):
    """Convex univariate with a breakpoint at ``c`` and ``0`` in its subdifferential.

    With ``sc`` the two slopes straddle 0 strictly; otherwise one of them is
    0 (boundary case) or the function is smooth and quadratic.
    """
    P1, P2 = int(rng.integers(0, 3)), int(rng.integers(0, 3))
    kind = "kink" if sc else ["left", "right", "smooth"][int(rng.integers(0, 3))]
    if kind == "kink":
        s1, s2 = -int(rng.integers(1, 4)), int(rng.integers(1, 4))
    elif kind == "left":
        s1, s2 = 0, int(rng.integers(1, 4))
    elif kind == "right":
        s1, s2 = -int(rng.integers(1, 4)), 0
    else:
        P = int(rng.integers(0, 3))
        return make_univariate([], [(P, -P * c, _Q(P * c * c) / 2)])
    # piece k: P_k/2 (t - c)^2 + s_k (t - c)
    quads = [(P1, s1 - P1 * c, _Q(P1 * c * c) / 2 - s1 * c),
             (P2, s2 - P2 * c, _Q(P2 * c * c) / 2 - s2 * c)]
    return make_univariate([c], quads)


def random_plq_instance(seed: int, sc: bool = False, n_max: int = 3) -> FunctionInstance:
    """Separable convex PLQ with ``0 in df(xbar)`` at an integer point."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    xbar = tuple(_Q(int(t)) for t in rng.integers(-2, 3, size=n))
    factors = []
    for c in xbar:
        if sc and rng.random() < 0.3:
            P = int(rng.integers(1, 3))
            factors.append(make_univariate([], [(P, -P * c, _Q(P * c * c) / 2)]))
        else:
            factors.append(_kink_factor(rng, c, sc))
    f = PLQFunction.separable(factors)
    zero = tuple(ZERO for _ in range(n))
    S = subdifferential(f, xbar)
    ri = relative_interior_member(zero, S)
    return FunctionInstance(f, xbar, zero, ri, seed)


def plq_corpus(count: int = 50, seed: int = 2, sc: bool = False) -> list:
    return [random_plq_instance(seed * 100_003 + k, sc=sc) for k in range(count)]


def critical_polyhedral_corpus(count: int = 25, seed: int = 3) -> list:
    """Polyhedral functions shifted by a linear term so that ``0 in df(xbar)``."""
    out = []
    for inst in polyhedral_function_corpus(count, seed):
        g = inst.f.plus_linear(tuple(-t for t in inst.vbar))
        zero = tuple(ZERO for _ in inst.xbar)
        S = subdifferential(g, inst.xbar)
        ri = relative_interior_member(zero, S)
        out.append(FunctionInstance(g, inst.xbar, zero, ri, inst.seed))
    return out


__all__ = [
    "PolyInstance", "FunctionInstance", "random_polyhedron_instance", "polyhedron_corpus",
    "random_polyhedral_function_instance", "polyhedral_function_corpus",
    "random_plq_instance", "plq_corpus", "critical_polyhedral_corpus",
]
