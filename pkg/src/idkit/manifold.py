"""Affine identifiable manifolds and the partial-smoothness checks."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidManifold, StrictComplementarityRequired
from .identify import (
    Face,
    Verdict,
    VerifierReport,
    _Collector,
    _isqrt_ceil,
    _require_normal,
    locality_radius,
    minimal_identifiable_set,
    multiplier_polytope,
    rational_box,
    strict_complementarity,
)
from .functions import active_sets_f
from .numerics import (
    ONE,
    ZERO,
    Q as _Q,
    add,
    dot,
    format_rational,
    independent_rows,
    inverse,
    matvec,
    neg,
    norm2,
    null_space,
    rank,
    scale,
    solve_linear,
    sub,
    vec,
)
from .polyhedra import (
    Polyhedron,
    active_set,
    distance2_to_gencone,
    normal_cone,
    project,
    project_certified,
    relative_interior_member,
)


@dataclass(frozen=True)
class AffineManifold:
    point: tuple
    basis: tuple
    host_face: object = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def normals(self):
        """A basis of the orthogonal complement of the direction space."""
        if not self.basis:
            return null_space((), len(self.point))
        return null_space(self.basis, len(self.point))

    def contains(self, x) -> bool:
        d = sub(vec(x), self.point)
        return all(dot(w, d) == 0 for w in self.normals())

    def polyhedron(self) -> Polyhedron:
        W = self.normals()
        rows = tuple(W) + tuple(neg(w) for w in W)
        rhs = tuple(dot(w, self.point) for w in W)
        return Polyhedron(rows, rhs + tuple(-t for t in rhs), len(self.point))

    def same_set(self, other: "AffineManifold") -> bool:
        """Exact equality of the affine hulls."""
        if self.dim != other.dim or not self.contains(other.point):
            return False
        return all(self.contains(add(self.point, b)) for b in other.basis)

    def to_json(self) -> dict:
        return {"point": [format_rational(t) for t in self.point],
                "basis": [[format_rational(t) for t in b] for b in self.basis]}


def _tight_rows(host, xbar, lam_support=None, mu_support=None):
    if isinstance(host, Polyhedron):
        I = active_set(host, xbar) if mu_support is None else mu_support
        return [host.A[i] for i in I], Face(host, (), tuple(I))
    I, J = active_sets_f(host, xbar)
    if lam_support is not None:
        I, J = lam_support, mu_support
    a0 = host.pieces[I[0]][0]
    rows = [sub(host.pieces[i][0], a0) for i in I[1:]]
    rows += [host.constraints[j][0] for j in J]
    return rows, Face(host, tuple(I), tuple(J))


def _manifold(xbar, rows, face):
    n = len(xbar)
    basis = null_space([r for r in rows if any(r)], n)
    return AffineManifold(xbar, tuple(basis), face)


def affine_identifiable_manifold(host, xbar, vbar, witness=None):
    """The affine manifold carried by the minimal face under strict
    complementarity; None otherwise.  ``witness`` may supply a multiplier
    pair ``(lambda, mu)`` whose support defines the face."""
    xbar, vbar = vec(xbar), vec(vbar)
    ms = multiplier_polytope(host, xbar, vbar)
    if isinstance(host, Polyhedron):
        _require_normal(host, xbar, vbar)
    full, (lam, mu) = strict_complementarity(ms)
    if not full:
        return None
    if witness is not None:
        lam, mu = witness
    lam_s = tuple(i for i, t in enumerate(lam) if t > 0)
    mu_s = tuple(j for j, t in enumerate(mu) if t > 0)
    if isinstance(host, Polyhedron):
        rows, face = _tight_rows(host, xbar, None, mu_s)
    else:
        rows, face = _tight_rows(host, xbar, lam_s, mu_s)
    return _manifold(xbar, rows, face)


def active_manifold(host, xbar) -> AffineManifold:
    """Affine hull of the face of ``xbar`` itself (all active indices)."""
    xbar = vec(xbar)
    rows, face = _tight_rows(host, xbar)
    return _manifold(xbar, rows, face)


# ---------------------------------------------------------------------------
# Partial smoothness
# ---------------------------------------------------------------------------


@dataclass
class PartialSmoothnessCertificate:
    prox_regular: Verdict
    sharp: Verdict
    continuous: Verdict
    nondegenerate: Verdict
    evidence: dict = field(default_factory=dict)

    @property
    def overall(self) -> Verdict:
        parts = (self.prox_regular, self.sharp, self.continuous, self.nondegenerate)
        if all(p is Verdict.PASS for p in parts):
            return Verdict.PASS
        if any(p is Verdict.FAIL for p in parts):
            return Verdict.FAIL
        return Verdict.INCONCLUSIVE

    def to_json(self) -> dict:
        out = {k: getattr(self, k).value
               for k in ("prox_regular", "sharp", "continuous", "nondegenerate")}
        out["overall"] = self.overall.value
        out["evidence"] = self.evidence
        return out


def _validate(M: AffineManifold, xbar):
    if len(M.point) != len(xbar) or not M.contains(xbar):
        raise InvalidManifold("xbar does not lie on the manifold")
    if M.basis and rank(M.basis) != len(M.basis):
        raise InvalidManifold("manifold basis is linearly dependent")


def partial_smoothness_certificate(Q: Polyhedron, M: AffineManifold, xbar, vbar,
                                   samples: int = 64, seed: int = 0) -> PartialSmoothnessCertificate:
    xbar, vbar = vec(xbar), vec(vbar)
    _require_normal(Q, xbar, vbar)
    _validate(M, xbar)
    n = Q.n
    ev = {}
    rng = np.random.default_rng(seed)
    delta = locality_radius(Q, xbar, vbar)
    # prox-regularity: convex host, so r = 0; sampled monotonicity as evidence
    bad = 0
    pts = []
    for _ in range(min(samples, 32)):
        z = add(add(xbar, vbar), rational_box(rng, n, delta))
        x = project(Q, z)
        pts.append((x, sub(z, x)))
    for (x0, v0), (x1, v1) in itertools.combinations(pts[:16], 2):
        if dot(sub(v1, v0), sub(x1, x0)) < 0:
            bad += 1
    prox = Verdict.PASS if bad == 0 else Verdict.FAIL
    ev["prox_regular"] = {"r": "0", "reason": "convex host", "monotonicity_violations": bad}
    # sharpness: span of the normal cone equals the normal space of M
    I = active_set(Q, xbar)
    A_I = [Q.A[i] for i in I]
    r_I = rank(A_I)
    orth = all(dot(a, b) == 0 for a in A_I for b in M.basis)
    sharp = Verdict.PASS if orth and r_I == n - M.dim else Verdict.FAIL
    ev["sharp"] = {"rank_normals": r_I, "codim_M": n - M.dim, "orthogonal": orth}
    # inner semicontinuity of normals along M
    worst = ZERO
    inside = True
    for k in range(samples):
        t = rational_box(rng, M.dim, delta / (1 << (k % 13)) / max(1, _isqrt_ceil(n)))
        x = add(xbar, _combine(M.basis, t, n))
        if not Q.contains(x):
            inside = False
            continue
        worst = max(worst, distance2_to_gencone(vbar, normal_cone(Q, x)))
    cont = Verdict.PASS if inside and worst == 0 else Verdict.FAIL
    ev["continuous"] = {"max_distance_squared": format_rational(worst), "M_inside_Q": inside}
    nd = relative_interior_member(vbar, normal_cone(Q, xbar))
    ev["nondegenerate"] = {"vbar_in_relative_interior": nd}
    return PartialSmoothnessCertificate(prox, sharp, cont,
                                        Verdict.PASS if nd else Verdict.FAIL, ev)


def _combine(basis, t, n):
    out = (ZERO,) * n
    for b, s in zip(basis, t):
        out = add(out, scale(s, b))
    return out


# ---------------------------------------------------------------------------
# Valley inclusion and constant-rank projections
# ---------------------------------------------------------------------------


def _grid(n, levels=(-1, 0, 1)):
    return itertools.product(levels, repeat=n)


def valley_inclusion_check(Q: Polyhedron, M, xbar, vbar, lam=1, eps=None, budget: int = 200,
                           seed: int = 0) -> VerifierReport:
    """Points near ``xbar + lam vbar`` must project into ``M`` within ``eps``."""
    xbar, vbar = vec(xbar), vec(vbar)
    _require_normal(Q, xbar, vbar)
    lam = _Q(lam)
    eps = locality_radius(Q, xbar, vbar) if eps is None else _Q(eps)
    n = Q.n
    rho = lam * eps / 4 / _isqrt_ceil(n)
    center = add(xbar, scale(lam, vbar))
    rng = np.random.default_rng(seed)
    zs = [add(center, tuple(rho * g for g in p)) for p in _grid(n)]
    zs += [add(center, rational_box(rng, n, rho)) for _ in range(budget)]
    col = _Collector(1)
    eps2 = eps * eps
    for z in zs:
        x = project(Q, z)
        col.sample(0)
        if not (M.contains(x) and norm2(sub(x, xbar)) < eps2):
            col.violation(0, x, scale(ONE / lam, sub(z, x)))
    verdict, wit = col.verdict()
    return VerifierReport(verdict, col.samples, wit, [rho], seed,
                          {"eps": eps, "lambda": lam, "grid_points": 3 ** n})


def _projector(A_rows, n):
    """Orthogonal projector onto the null space of ``A_rows``."""
    eye = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    if not A_rows:
        return tuple(tuple(r) for r in eye)
    G = [[dot(a, b) for b in A_rows] for a in A_rows]
    Gi = inverse(G)
    P = []
    for i in range(n):
        row = []
        for j in range(n):
            s = ZERO
            for k, ak in enumerate(A_rows):
                for l, al in enumerate(A_rows):
                    s += ak[i] * Gi[k][l] * al[j]
            row.append(eye[i][j] - s)
        P.append(tuple(row))
    return tuple(P)


def projection_rank_check(Q: Polyhedron, xbar, vbar, lam=1, grid=(-1, 0, 1), budget: int = 100,
                          seed: int = 0) -> dict:
    """Constant local linear part of ``P_Q`` on a neighborhood of ``xbar + lam vbar``."""
    xbar, vbar = vec(xbar), vec(vbar)
    _require_normal(Q, xbar, vbar)
    full, _ = strict_complementarity(multiplier_polytope(Q, xbar, vbar))
    if not full:
        raise StrictComplementarityRequired("the identified face is not affine here")
    lam = _Q(lam)
    n = Q.n
    M = minimal_identifiable_set(Q, xbar, vbar)
    delta = locality_radius(Q, xbar, vbar)
    rho = lam * delta / 4 / _isqrt_ceil(n)
    center = add(xbar, scale(lam, vbar))
    rng = np.random.default_rng(seed)
    zs = [add(center, tuple(rho * _Q(g) for g in p)) for p in _grid(n, grid)]
    zs += [add(center, rational_box(rng, n, rho)) for _ in range(budget)]
    projectors = set()
    outside = []
    for z in zs:
        x = project(Q, z)
        I = active_set(Q, x)
        S = independent_rows(Q.A, I)
        projectors.add(_projector([Q.A[i] for i in S], n))
        if not M.contains(x):
            outside.append(x)
    ranks = sorted({rank(P) for P in projectors})
    expected = n - rank([Q.A[i] for i in active_set(Q, xbar)])
    constant = len(projectors) == 1
    ok = constant and ranks == [expected] and not outside
    proj = next(iter(projectors))
    return {
        "verdict": Verdict.PASS if ok else Verdict.FAIL,
        "constant": constant,
        "rank": ranks[0] if len(ranks) == 1 else ranks,
        "expected_rank": expected,
        "projector": [[format_rational(t) for t in row] for row in proj],
        "points": len(zs),
        "image_outside_M": len(outside),
        "neighborhood_radius": format_rational(rho),
        "lambda": format_rational(lam),
    }


__all__ = [
    "AffineManifold", "PartialSmoothnessCertificate", "affine_identifiable_manifold",
    "active_manifold", "partial_smoothness_certificate", "valley_inclusion_check",
    "projection_rank_check",
]
