"""Proximal point and projected gradient iterations with identification monitoring."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NotConvex, PointNotInSet
from .functions import INF, PLQFunction, PolyMap, prox
from .numerics import ONE, Q as _Q, format_rational, norm2, scale, sub, vec
from .polyhedra import Polyhedron, project


@dataclass
class IterationTrace:
    iterates: list
    residuals: list                # |v_k| as floats; None for the starting point
    values: list
    identified_at: int | None = None
    residuals_sq: list = field(default_factory=list)   # exact squares
    certificates: list = field(default_factory=list)   # v_k, exact

    def __post_init__(self):
        if not (len(self.iterates) == len(self.residuals) == len(self.values)):
            raise ValueError("trace lists must be aligned")

    def to_json(self) -> dict:
        fmt = lambda t: None if t is None else format_rational(t)  # noqa: E731
        return {"iterates": [[format_rational(t) for t in x] for x in self.iterates],
                "residuals": self.residuals,
                "residuals_squared": [fmt(r) for r in self.residuals_sq],
                "values": [fmt(v) if v != INF else "inf" for v in self.values],
                "identified_at": self.identified_at}


def _sqrt(q):
    return None if q is None else math.sqrt(float(q))


def proximal_point(f, x0, lam=1, max_iter: int = 100, tol=0, M=None) -> IterationTrace:
    """``x_{k+1} = prox(f, lam, x_k)``; stops when ``|v_k| <= tol``.

    ``v_k = (x_{k-1} - x_k) / lam`` is the subgradient certificate of the
    step.  With a descriptor ``M`` the trace records ``identified_at``.
    """
    lam = _Q(lam)
    if isinstance(f, PLQFunction) and not f.convex:
        raise NotConvex("proximal point needs a certified convex function")
    x = vec(x0)
    tol2 = _Q(tol) ** 2
    its, res2, vals, certs = [x], [None], [f.value(x)], [None]
    for _ in range(max_iter):
        y = prox(f, lam, x)
        v = scale(ONE / lam, sub(x, y))
        r2 = norm2(v)
        its.append(y)
        res2.append(r2)
        vals.append(f.value(y))
        certs.append(v)
        x = y
        if r2 <= tol2:
            break
    tr = IterationTrace(its, [_sqrt(r) for r in res2], vals, None, res2, certs)
    if M is not None:
        tr.identified_at = identification_monitor(tr, M)
    return tr


def projected_gradient(h: PolyMap, Q: Polyhedron, x0, step, max_iter: int = 100, tol=0,
                       M=None) -> IterationTrace:
    """``x_{k+1} = P_Q(x_k - step grad h(x_k))``; residual ``|x_k - x_{k+1}| / step``."""
    x = vec(x0)
    if not Q.contains(x):
        raise PointNotInSet("x0 must lie in Q")
    step = _Q(step)
    if step <= 0:
        raise ValueError("step must be positive")
    tol2 = _Q(tol) ** 2
    val = lambda p: h.value(p)[0]  # noqa: E731
    its, res2, vals, certs = [x], [None], [val(x)], [None]
    for _ in range(max_iter):
        g = h.jacobian(x)[0]
        y = project(Q, sub(x, scale(step, g)))
        d = scale(ONE / step, sub(x, y))
        r2 = norm2(d)
        its.append(y)
        res2.append(r2)
        vals.append(val(y))
        certs.append(d)
        x = y
        if r2 <= tol2:
            break
    tr = IterationTrace(its, [_sqrt(r) for r in res2], vals, None, res2, certs)
    if M is not None:
        tr.identified_at = identification_monitor(tr, M)
    return tr


def identification_monitor(trace, M) -> int | None:
    """Smallest ``k0`` with every iterate from ``k0`` on inside ``M``."""
    its = trace.iterates if isinstance(trace, IterationTrace) else list(trace)
    k0 = None
    for k in range(len(its) - 1, -1, -1):
        if M.contains(its[k]):
            k0 = k
        else:
            break
    return k0


__all__ = ["IterationTrace", "proximal_point", "projected_gradient", "identification_monitor"]
