"""Restricted optimality and the transfer of quadratic growth.

Growth quotients are measured in the sup norm: at radius ``rho`` the
quotient is ``min (f(x) - f(xbar)) / rho**2`` over ``|x - xbar|_inf = rho``.
For PLQ and polyhedral hosts this minimum is computed exactly, cell by cell
and facet by facet of the sup-norm sphere.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    EquivalenceViolation,
    InvalidGrowthFunction,
    NotCritical,
    UnsupportedDescriptor,
)
from .functions import (
    INF,
    PLQFunction,
    PolyhedralFunction,
    PolyMap,
    prox,
    subdifferential,
)
from .identify import (
    BoxDescriptor,
    Verdict,
    VerifierReport,
    WholeSpace,
    _Collector,
    _per_level,
    _require_normal,
    rational_box,
    radius_schedule,
    sup_norm,
)
from .numerics import (
    ONE,
    ZERO,
    LPStatus,
    Q as _Q,
    add,
    format_rational,
    lp_solve,
    neg,
    qp_solve,
    scale,
    sub,
    vec,
    zeros,
)
from .polyhedra import (
    Polyhedron,
    cone_member,
    cone_of_polyhedral_cone,
    project,
    tangent_cone,
)

GROWTH_FLOOR = 1e-6
GROWTH_LEVELS = 13


class GrowthVerdict(str, enum.Enum):
    GROWTH = "GROWTH"
    NO_GROWTH = "NO_GROWTH"
    INCONCLUSIVE = "INCONCLUSIVE"


# ---------------------------------------------------------------------------
# Restricted optimality
# ---------------------------------------------------------------------------


class RestrictedOptimality(NamedTuple):
    max_on_M: bool
    max_on_Q: bool
    strict_on_M: bool
    strict_on_Q: bool


def _local_max(vbar, T: Polyhedron):
    """Local maximality of ``<vbar, .>`` at the apex of the tangent cone ``T``."""
    res = lp_solve(vbar, T.A, T.b, vertex=False)
    is_max = res.status is LPStatus.OPTIMAL and res.optimum == 0
    strict = False
    if is_max:
        K = Polyhedron(T.A + (neg(vbar),), T.b + (ZERO,), T.n)
        strict = not cone_of_polyhedral_cone(K).ray_gens
    return is_max, strict


def restricted_optimality_check(Q: Polyhedron, M, xbar, vbar) -> RestrictedOptimality:
    xbar, vbar = vec(xbar), vec(vbar)
    _require_normal(Q, xbar, vbar)
    MP = M.polyhedron() if hasattr(M, "polyhedron") else M
    on_Q = _local_max(vbar, tangent_cone(Q, xbar))
    on_M = _local_max(vbar, tangent_cone(MP, xbar))
    if on_Q[0] != on_M[0]:
        raise EquivalenceViolation("local maximality on M and on Q disagree")
    return RestrictedOptimality(on_M[0], on_Q[0], on_M[1], on_Q[1])


# ---------------------------------------------------------------------------
# Growth estimates
# ---------------------------------------------------------------------------


@dataclass
class GrowthEstimate:
    radii: list
    lower_quotients: list          # None stands for an empty sphere (+inf)
    verdict: GrowthVerdict
    c: object = None
    exact: bool = True
    witnesses: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.radii) != len(self.lower_quotients):
            raise ValueError("radii and quotients must be aligned")

    def to_json(self) -> dict:
        fmt = lambda q: None if q is None else (  # noqa: E731
            format_rational(q) if type(q).__name__ == "mpq" else float(q))
        return {"radii": [fmt(r) for r in self.radii],
                "lower_quotients": [fmt(q) for q in self.lower_quotients],
                "verdict": self.verdict.value, "c": fmt(self.c), "exact": self.exact}


def growth_verdict(quotients, floor=GROWTH_FLOOR):
    """Verdict from per-radius lower quotients (coarse to fine)."""
    tail = quotients[-3:]
    finite = [q for q in tail if q is not None]
    if not finite:
        return GrowthVerdict.GROWTH, None
    low = min(finite)
    if low < floor:
        return GrowthVerdict.NO_GROWTH, None
    if len(finite) == 3 and all(finite[k + 1] * 2 <= finite[k] for k in range(2)):
        return GrowthVerdict.INCONCLUSIVE, low
    return GrowthVerdict.GROWTH, low


def _require_critical(f, xbar):
    n = len(xbar)
    if isinstance(f, PolyMap):
        if any(f.jacobian(xbar)[0]):
            raise NotCritical("0 is not a subgradient at xbar")
        return
    if not cone_member(zeros(n), subdifferential(f, xbar)):
        raise NotCritical("0 is not a subgradient at xbar")


def _univariate_min(u, a, b):
    """``min u(t)`` over ``[a, b]`` (None = unbounded), exactly; None if empty."""
    best = None
    for (lo, hi), (P, q, r) in zip(u.intervals(), u.quads):
        L = a if lo is None else (lo if a is None else max(a, lo))
        R = b if hi is None else (hi if b is None else min(b, hi))
        if L is not None and R is not None and L > R:
            continue
        cands = [t for t in (L, R) if t is not None]
        if P > 0:
            t = -q / P
            if (L is None or t >= L) and (R is None or t <= R):
                cands.append(t)
        for t in cands:
            val = P * t * t / 2 + q * t + r
            if best is None or val < best[0]:
                best = (val, t)
    return best


def _box_bounds(M, n):
    if M is None or isinstance(M, WholeSpace):
        return [None] * n, [None] * n
    if isinstance(M, BoxDescriptor):
        return list(M.lower), list(M.upper)
    raise UnsupportedDescriptor("separable growth needs a box descriptor")


def _sphere_min_separable(f: PLQFunction, xbar, rho, M):
    lo, hi = _box_bounds(M, f.n)
    fbar = f.value(xbar)
    best = None
    parts = []
    for i, (u, t) in enumerate(zip(f.factors, xbar)):
        a = t - rho if lo[i] is None else max(t - rho, lo[i])
        b = t + rho if hi[i] is None else min(t + rho, hi[i])
        parts.append(_univariate_min(u, a, b))
    for j, (u, t) in enumerate(zip(f.factors, xbar)):
        for s in (-1, 1):
            tj = t + s * rho
            if (lo[j] is not None and tj < lo[j]) or (hi[j] is not None and tj > hi[j]):
                continue
            vj = u.value(tj)
            if vj == INF:
                continue
            if any(parts[i] is None for i in range(f.n) if i != j):
                continue
            total = vj + sum((parts[i][0] for i in range(f.n) if i != j), ZERO)
            x = tuple(tj if i == j else parts[i][1] for i in range(f.n))
            if best is None or total - fbar < best[0]:
                best = (total - fbar, x)
    return best


def _cells_of(f):
    if isinstance(f, PolyhedralFunction):
        return PLQFunction.from_polyhedral(f).cells
    return f.cells


def _sphere_min_cells(f, xbar, rho, restrict: Polyhedron | None, hints: dict):
    n = len(xbar)
    fbar = f.value(xbar)
    box_rows, box_rhs = [], []
    for i in range(n):
        e = tuple(ONE if k == i else ZERO for k in range(n))
        box_rows += [e, neg(e)]
        box_rhs += [xbar[i] + rho, rho - xbar[i]]
    best = None
    for k, c in enumerate(_cells_of(f)):
        base_A = c.cell.A + tuple(box_rows)
        base_b = c.cell.b + tuple(box_rhs)
        if restrict is not None:
            base_A += restrict.A
            base_b += restrict.b
        linear = not any(any(row) for row in c.P)
        for j in range(n):
            e = tuple(ONE if t == j else ZERO for t in range(n))
            for s in (-1, 1):
                tj = xbar[j] + s * rho
                A = base_A + (e, neg(e))
                b = base_b + (tj, -tj)
                if linear:
                    res = lp_solve(c.q, A, b, maximize=False, vertex=False)
                    if res.status is not LPStatus.OPTIMAL:
                        continue
                    x, val = res.primal, res.optimum + c.r
                else:
                    key = (k, j, s)
                    res = qp_solve(c.P, c.q, A, b, hint=hints.get(key))
                    if res is None:
                        continue
                    hints[key] = res.active
                    x, val = res.x, res.value + c.r
                if best is None or val - fbar < best[0]:
                    best = (val - fbar, x)
    return best


def exact_growth_estimate(f, xbar, M=None, r0=1, levels: int = GROWTH_LEVELS) -> GrowthEstimate:
    """Exact per-radius quotients for PLQ / polyhedral hosts, optionally on M."""
    xbar = vec(xbar)
    radii = radius_schedule(r0, levels)
    separable = isinstance(f, PLQFunction) and f.factors is not None and (
        M is None or isinstance(M, (BoxDescriptor, WholeSpace)))
    restrict = None
    if not separable and M is not None and not isinstance(M, WholeSpace):
        if not hasattr(M, "polyhedron"):
            raise UnsupportedDescriptor("M needs a polyhedral description")
        restrict = M.polyhedron()
    hints = {}
    quotients, wits = [], []
    for rho in radii:
        got = (_sphere_min_separable(f, xbar, rho, M) if separable
               else _sphere_min_cells(f, xbar, rho, restrict, hints))
        if got is None:
            quotients.append(None)
            wits.append(None)
        else:
            quotients.append(got[0] / (rho * rho))
            wits.append(got[1])
    verdict, c = growth_verdict(quotients)
    return GrowthEstimate(radii, quotients, verdict, c, True, wits)


class GrowthComparison(NamedTuple):
    on_M: GrowthEstimate
    ambient: GrowthEstimate

    @property
    def agree(self) -> bool:
        return self.on_M.verdict == self.ambient.verdict


def growth_equivalence_check(f, M, xbar, budget: int = 0, seed: int = 0, r0=1) -> GrowthComparison:
    """Growth on M versus ambient growth; both exact for PLQ hosts.

    ``budget`` and ``seed`` are accepted for interface symmetry; the exact
    per-cell computation does not sample.
    """
    xbar = vec(xbar)
    _require_critical(f, xbar)
    on_M = exact_growth_estimate(f, xbar, M, r0)
    amb = exact_growth_estimate(f, xbar, None, r0)
    return GrowthComparison(on_M, amb)


# ---------------------------------------------------------------------------
# Growth transfer
# ---------------------------------------------------------------------------


def _scalar(g: PolyMap, x):
    return g.value(x)[0]


def _check_growth_function(g: PolyMap, n: int):
    if g.m != 1 or g.n != n:
        raise InvalidGrowthFunction("g must be a scalar polynomial on R^n")
    z = zeros(n)
    if _scalar(g, z) != 0:
        raise InvalidGrowthFunction("g(0) must vanish")
    if any(g.jacobian(z)[0]):
        raise InvalidGrowthFunction("the gradient of g at 0 must vanish")


def _sample_set(M, n):
    if M is None or isinstance(M, WholeSpace):
        return None
    if hasattr(M, "polyhedron"):
        return M.polyhedron()
    raise UnsupportedDescriptor("M needs a polyhedral description")


def growth_transfer_check(f, M, xbar, g: PolyMap, budget: int = 2_000, seed: int = 0,
                          r0=1) -> VerifierReport:
    """Sampled check that growth ``g`` on M transfers to the ambient space.

    Half of the budget samples M; if the margin ``f(x) - f(xbar) - g(x - xbar)``
    is ever nonpositive there, the transfer hypothesis fails and the verdict
    is NOT_APPLICABLE.  The other half samples the ambient space.
    """
    xbar = vec(xbar)
    n = len(xbar)
    _check_growth_function(g, n)
    _require_critical(f, xbar)
    fbar = f.value(xbar)
    rng = np.random.default_rng(seed)
    radii = radius_schedule(r0)
    MP = _sample_set(M, n)
    counts = _per_level(max(2, budget // 2), len(radii))

    def margin(x):
        fx = f.value(x)
        if fx == INF:
            return None
        return fx - fbar - _scalar(g, sub(x, xbar))

    m_margins = []
    m_samples = 0
    for r, cnt in zip(radii, counts):
        worst = None
        for _ in range(cnt):
            p = add(xbar, rational_box(rng, n, r))
            x = p if MP is None else project(MP, p)
            if x == xbar:
                continue
            mg = margin(x)
            if mg is None:
                continue
            m_samples += 1
            worst = mg if worst is None else min(worst, mg)
            if mg <= 0:
                return VerifierReport(Verdict.NOT_APPLICABLE, m_samples, [], radii, seed,
                                      {"reason": "growth fails on M", "x": x, "margin": mg})
        m_margins.append(worst)
    col = _Collector(len(radii))
    amb_margins = []
    for level, (r, cnt) in enumerate(zip(radii, counts)):
        worst = None
        for _ in range(cnt):
            x = add(xbar, rational_box(rng, n, r))
            if x == xbar:
                continue
            mg = margin(x)
            if mg is None:
                continue
            col.sample(level)
            worst = mg if worst is None else min(worst, mg)
            if mg <= 0:
                col.violation(level, x, zeros(n))
        amb_margins.append(worst)
    verdict, wit = col.verdict()
    return VerifierReport(verdict, col.samples + m_samples, wit, radii, seed,
                          {"min_margin_on_M": m_margins, "min_margin_ambient": amb_margins})


# ---------------------------------------------------------------------------
# Refined optimality
# ---------------------------------------------------------------------------


def refined_growth_estimate(f, xbar, budget: int = 2_000, seed: int = 0, r0=1, lam=1) -> GrowthEstimate:
    """Quotients restricted to graph points ``(x, v)`` of ``df`` with ``v -> 0``.

    PLQ and polyhedral hosts are sampled through the proximal map; smooth
    scalar polynomial hosts through their gradient.  Levels without any
    admissible sample count as vacuous (+inf).
    """
    xbar = vec(xbar)
    n = len(xbar)
    _require_critical(f, xbar)
    lam = _Q(lam)
    rng = np.random.default_rng(seed)
    radii = radius_schedule(r0)
    smooth = isinstance(f, PolyMap)
    value = (lambda x: _scalar(f, x)) if smooth else f.value  # noqa: E731
    fbar = value(xbar)
    window = 1
    if not smooth and isinstance(f, PolyhedralFunction):
        window = 1 + max(sum((abs(t) for t in a), ZERO) for a, _ in f.pieces)
    quotients = []
    for r, cnt in zip(radii, _per_level(budget, len(radii))):
        best = None
        for _ in range(cnt):
            p = rational_box(rng, n, r)
            if smooth:
                x = add(xbar, p)
                v = f.jacobian(x)[0]
            else:
                z = add(xbar, p)
                x = prox(f, lam, z)
                v = scale(ONE / lam, sub(z, x))
            d = sup_norm(sub(x, xbar))
            if d == 0 or d > r or sup_norm(v) > r:
                continue
            fx = value(x)
            if abs(fx - fbar) > window * r:
                continue
            q = (fx - fbar) / (d * d)
            best = q if best is None else min(best, q)
        quotients.append(best)
    verdict, c = growth_verdict(quotients)
    return GrowthEstimate(radii, quotients, verdict, c, False)


__all__ = [
    "GrowthVerdict", "GrowthEstimate", "GrowthComparison", "RestrictedOptimality",
    "restricted_optimality_check", "growth_equivalence_check", "exact_growth_estimate",
    "growth_transfer_check", "refined_growth_estimate", "growth_verdict",
]
