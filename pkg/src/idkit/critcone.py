"""Critical cones, tangential approximation and the polyhedral reduction."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDescriptor
from .functions import subdifferential
from .identify import (
    BoxDescriptor,
    Face,
    Verdict,
    VerifierReport,
    WholeSpace,
    _Collector,
    _isqrt_ceil,
    _require_normal,
    _require_subgradient,
    locality_radius,
    rational_box,
)
from .numerics import ONE, ZERO, Q as _Q, add, dot, neg, norm2, sub, vec, zeros
from .polyhedra import (
    GenCone,
    Polyhedron,
    cone_member,
    cone_of_polyhedral_cone,
    cones_equal,
    distance2_to_gencone,
    faces_enumerate,
    gencone_to_polyhedron,
    normal_cone,
    project,
    tangent_cone,
)


@dataclass(frozen=True)
class CriticalCone:
    K: Polyhedron

    def contains(self, w) -> bool:
        return self.K.contains(w)

    def to_json(self) -> dict:
        return self.K.to_json()


def critical_cone(Q: Polyhedron, xbar, vbar) -> CriticalCone:
    xbar, vbar = vec(xbar), vec(vbar)
    _require_normal(Q, xbar, vbar)
    T = tangent_cone(Q, xbar)
    return CriticalCone(Polyhedron(T.A + (vbar, neg(vbar)), T.b + (ZERO, ZERO), Q.n))


def critical_cone_f(f, xbar, vbar) -> CriticalCone:
    """``{w : <w, s - vbar> <= 0}`` over the generators of ``df(xbar)``."""
    xbar, vbar = vec(xbar), vec(vbar)
    _require_subgradient(f, xbar, vbar)
    S = subdifferential(f, xbar)
    rows = tuple(sub(s, vbar) for s in S.conv_gens) + tuple(S.ray_gens)
    rows = tuple(r for r in rows if any(r))
    return CriticalCone(Polyhedron(rows, zeros(len(rows)), len(xbar)))


def critical_cone_via_normals(Q: Polyhedron, xbar, vbar) -> CriticalCone:
    """The same cone computed as the normal cone to ``N_Q(xbar)`` at ``vbar``."""
    xbar, vbar = vec(xbar), vec(vbar)
    _require_normal(Q, xbar, vbar)
    P = gencone_to_polyhedron(normal_cone(Q, xbar))
    N = normal_cone(P, vbar)
    if not N.ray_gens:
        return CriticalCone(_zero_cone(Q.n))
    return CriticalCone(gencone_to_polyhedron(N))


def _face_polyhedron(M):
    if isinstance(M, (Face, BoxDescriptor, WholeSpace)):
        return M.polyhedron()
    if isinstance(M, Polyhedron):
        return M
    raise UnsupportedDescriptor("a face descriptor is required")


def tangential_approx_verify(Q: Polyhedron, M, xbar, vbar) -> bool:
    xbar, vbar = vec(xbar), vec(vbar)
    MP = _face_polyhedron(M)
    if not MP.contains(xbar):
        raise UnsupportedDescriptor("xbar does not lie in M")
    K = critical_cone(Q, xbar, vbar).K
    return cones_equal(tangent_cone(MP, xbar), K)


def default_delta(Q: Polyhedron, xbar, vbar):
    return locality_radius(Q, xbar, vbar)


def polyhedral_reduction_verify(Q: Polyhedron, xbar, vbar, delta=None, budget: int = 10_000,
                                seed: int = 0) -> VerifierReport:
    """Check ``vbar+u in N_Q(xbar+w)  <=>  u in N_K(w)`` for ``|w|, |u| <= delta``.

    A third of the budget draws independent pairs; the rest draws graph
    points of either side by projection and tests the other side.
    """
    xbar, vbar = vec(xbar), vec(vbar)
    K = critical_cone(Q, xbar, vbar).K
    delta = default_delta(Q, xbar, vbar) if delta is None else _Q(delta)
    n = Q.n
    rng = np.random.default_rng(seed)
    s = delta / _isqrt_ceil(n)
    d2 = delta * delta
    col = _Collector(1)

    def lhs(w, u):
        x = add(xbar, w)
        return Q.contains(x) and cone_member(add(vbar, u), normal_cone(Q, x))

    def rhs(w, u):
        return K.contains(w) and cone_member(u, normal_cone(K, w))

    center = add(xbar, vbar)
    for t in range(budget):
        mode = t % 3
        if mode == 0:
            w, u = rational_box(rng, n, s), rational_box(rng, n, s)
        elif mode == 1:
            z = add(center, add(rational_box(rng, n, s / 2), rational_box(rng, n, s / 2)))
            x = project(Q, z)
            w, u = sub(x, xbar), sub(sub(z, x), vbar)
        else:
            z = add(rational_box(rng, n, s / 2), rational_box(rng, n, s / 2))
            w = project(K, z)
            u = sub(z, w)
        if norm2(w) > d2 or norm2(u) > d2:
            continue
        col.sample(0)
        if lhs(w, u) != rhs(w, u):
            col.violation(0, add(xbar, w), add(vbar, u))
    verdict, wit = col.verdict()
    return VerifierReport(verdict, col.samples, wit, [delta], seed,
                          {"violations_total": col.count(), "delta": delta})


def _face_normal(Q: Polyhedron, face):
    return GenCone((), tuple(Q.A[i] for i in face.tight), Q.n)


def _zero_cone(n: int) -> Polyhedron:
    eye = tuple(tuple(ONE if k == j else ZERO for k in range(n)) for j in range(n))
    return Polyhedron(eye + tuple(neg(e) for e in eye), zeros(2 * n), n)


def critical_cone_chain(Q: Polyhedron, xbar, vbar, radii) -> dict:
    """Nested unions of faces ``M_r`` whose normal cones meet ``B_r(vbar)``.

    For each radius reports the faces, the closed convex hull of the union of
    their tangent cones at ``xbar``, and whether the chain has stabilized.
    The intersection over levels is compared with the critical cone.
    """
    xbar, vbar = vec(xbar), vec(vbar)
    _require_normal(Q, xbar, vbar)
    faces = [F for F in faces_enumerate(Q) if F.polyhedron(Q).contains(xbar)]
    levels = []
    inter_rows = []
    for r in radii:
        r = _Q(r)
        chosen = [F for F in faces
                  if distance2_to_gencone(vbar, _face_normal(Q, F)) < r * r]
        rays = []
        for F in chosen:
            rays += list(cone_of_polyhedral_cone(tangent_cone(F.polyhedron(Q), xbar)).ray_gens)
        hull = gencone_to_polyhedron(GenCone((), tuple(rays), Q.n)) if rays else _zero_cone(Q.n)
        inter_rows += list(zip(hull.A, hull.b))
        levels.append({"radius": r, "faces": [list(F.tight) for F in chosen],
                       "hull": hull})
    inter = Polyhedron(tuple(a for a, _ in inter_rows), tuple(b for _, b in inter_rows), Q.n)
    K = critical_cone(Q, xbar, vbar).K
    keys = [tuple(map(tuple, L["faces"])) for L in levels]
    stabilized = len(keys) >= 2 and keys[-1] == keys[-2]
    return {
        "levels": [{"radius": L["radius"], "faces": L["faces"]} for L in levels],
        "stabilized": stabilized,
        "stable_faces": levels[-1]["faces"] if stabilized else None,
        "intersection_equals_critical_cone": cones_equal(inter, K),
    }


def lorentz_chain(n: int = 2, radii=(0.5, 0.25, 0.125, 0.0625), samples: int = 4000,
                  seed: int = 0) -> dict:
    """Sampled chain for the epigraph of the Euclidean norm at the origin.

    With ``vbar = e_1`` the sets ``M_r`` are the cones of directions whose
    normalization lies within ``r`` of ``vbar``.  Successive levels differ
    (witnesses are exhibited), so the chain never stabilizes.  The commuting
    hull formula is not checked on this host.
    """
    rng = np.random.default_rng(seed)
    vbar = np.zeros(n)
    vbar[0] = 1.0
    dirs = rng.normal(size=(samples, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dist = np.linalg.norm(dirs - vbar, axis=1)
    levels = []
    for k, r in enumerate(radii):
        inside = dist < r
        entry = {"radius": r, "sampled_members": int(inside.sum())}
        if k + 1 < len(radii):
            gap = inside & (dist >= radii[k + 1])
            entry["witness_outside_next"] = dirs[gap][0].tolist() if gap.any() else None
        levels.append(entry)
    stabilized = not all(L.get("witness_outside_next") for L in levels[:-1])
    return {"host": "lorentz", "n": n, "levels": levels, "stabilized": stabilized,
            "commute_formula": "unverified on this host",
            "critical_cone": "ray through vbar"}


def two_definitions_agree(Q: Polyhedron, xbar, vbar) -> bool:
    return cones_equal(critical_cone(Q, xbar, vbar).K, critical_cone_via_normals(Q, xbar, vbar).K)


__all__ = [
    "CriticalCone", "critical_cone", "critical_cone_f", "critical_cone_via_normals",
    "tangential_approx_verify", "polyhedral_reduction_verify", "default_delta",
    "critical_cone_chain", "lorentz_chain", "two_definitions_agree", "Verdict",
]
