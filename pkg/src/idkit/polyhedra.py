"""Polyhedra in H-representation: faces, cones, projection and elimination.

A polyhedron is ``Q = {x : <a_i, x> <= b_i}``.  Row indices are 0-based
throughout.  All computations are exact over rationals.
"""
from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass, field

from .errors import (
    DimensionMismatch,
    EliminationBudgetExceeded,
    EmptyPolyhedron,
    FaceBudgetExceeded,
    PairNotInGraph,
    PointNotInSet,
    Unbounded,
)
from .numerics import (
    ONE,
    ZERO,
    LPStatus,
    Q as _Q,
    add,
    dot,
    format_rational,
    independent_rows,
    inverse,
    lp_solve,
    matvec,
    neg,
    norm2,
    null_space,
    rank,
    rmatvec,
    scale,
    sub,
    vec,
    zeros,
)

DEFAULT_FACE_BUDGET = 20


def face_budget() -> int:
    raw = os.environ.get("IDKIT_FACE_BUDGET")
    return int(raw) if raw else DEFAULT_FACE_BUDGET


@dataclass(frozen=True)
class Polyhedron:
    A: tuple
    b: tuple
    n: int
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def from_rows(cls, A, b, n: int | None = None) -> "Polyhedron":
        A = tuple(vec(r) for r in A)
        b = vec(b)
        if len(A) != len(b):
            raise DimensionMismatch(f"{len(A)} rows but {len(b)} right-hand sides")
        if n is None:
            if not A:
                raise DimensionMismatch("dimension required for a polyhedron without rows")
            n = len(A[0])
        if any(len(r) != n for r in A):
            raise DimensionMismatch(f"every row must have {n} entries")
        return cls(A, b, n)

    @classmethod
    def whole_space(cls, n: int) -> "Polyhedron":
        return cls((), (), n)

    @classmethod
    def box(cls, lo, hi) -> "Polyhedron":
        n = len(lo)
        rows, rhs = [], []
        for i in range(n):
            rows.append([1 if k == i else 0 for k in range(n)])
            rhs.append(hi[i])
            rows.append([-1 if k == i else 0 for k in range(n)])
            rhs.append(-_Q(lo[i]))
        return cls.from_rows(rows, rhs, n)

    @classmethod
    def orthant(cls, n: int) -> "Polyhedron":
        return cls.from_rows([[-1 if k == i else 0 for k in range(n)] for i in range(n)],
                             [0] * n, n)

    @property
    def m(self) -> int:
        return len(self.A)

    def slack(self, x):
        return tuple(bi - dot(a, x) for a, bi in zip(self.A, self.b))

    def contains(self, x) -> bool:
        return all(dot(a, x) <= bi for a, bi in zip(self.A, self.b))

    def is_empty(self) -> bool:
        if "empty" not in self._cache:
            res = lp_solve(zeros(self.n), self.A, self.b, vertex=False)
            self._cache["empty"] = res.status is LPStatus.INFEASIBLE
        return self._cache["empty"]

    def with_rows(self, A_extra, b_extra) -> "Polyhedron":
        return Polyhedron(self.A + tuple(vec(r) for r in A_extra),
                          self.b + vec(b_extra), self.n)

    def with_equalities(self, indices) -> "Polyhedron":
        """The face ``{x in Q : <a_i,x> = b_i, i in indices}``."""
        idx = sorted(set(indices))
        return self.with_rows([neg(self.A[i]) for i in idx], [-self.b[i] for i in idx])

    def to_json(self) -> dict:
        return {"A": [[format_rational(a) for a in r] for r in self.A],
                "b": [format_rational(x) for x in self.b]}

    @classmethod
    def from_json(cls, data, n: int | None = None) -> "Polyhedron":
        if n is None:
            n = data.get("n")
        return cls.from_rows(data["A"], data["b"], n)


@dataclass(frozen=True, order=True)
class FaceDescriptor:
    tight: tuple

    def __post_init__(self):
        object.__setattr__(self, "tight", tuple(sorted(set(self.tight))))

    def polyhedron(self, Q: Polyhedron) -> Polyhedron:
        return Q.with_equalities(self.tight)


@dataclass(frozen=True)
class GenCone:
    """``conv(conv_gens) + cone(ray_gens)`` in R^n."""

    conv_gens: tuple
    ray_gens: tuple
    n: int

    @classmethod
    def cone(cls, rays, n: int) -> "GenCone":
        return cls((), tuple(vec(r) for r in rays), n)

    @classmethod
    def make(cls, conv, rays, n: int) -> "GenCone":
        return cls(tuple(vec(c) for c in conv), tuple(vec(r) for r in rays), n)

    def to_json(self) -> dict:
        return {"conv_gens": [[format_rational(a) for a in g] for g in self.conv_gens],
                "ray_gens": [[format_rational(a) for a in g] for g in self.ray_gens]}


@dataclass(frozen=True)
class Generators:
    vertices: tuple
    rays: tuple
    lineality: tuple


# ---------------------------------------------------------------------------
# Point queries
# ---------------------------------------------------------------------------


def _check_point(Q: Polyhedron, x):
    x = vec(x)
    if len(x) != Q.n:
        raise DimensionMismatch(f"point has {len(x)} entries, polyhedron lives in R^{Q.n}")
    if not Q.contains(x):
        raise PointNotInSet(f"point {[format_rational(t) for t in x]} is not in Q")
    return x


def active_set(Q: Polyhedron, x) -> tuple:
    x = _check_point(Q, x)
    return tuple(i for i, (a, bi) in enumerate(zip(Q.A, Q.b)) if dot(a, x) == bi)


def normal_cone(Q: Polyhedron, x) -> GenCone:
    return GenCone((), tuple(Q.A[i] for i in active_set(Q, x)), Q.n)


def tangent_cone(Q: Polyhedron, x) -> Polyhedron:
    I = active_set(Q, x)
    return Polyhedron(tuple(Q.A[i] for i in I), zeros(len(I)), Q.n)


# ---------------------------------------------------------------------------
# Cones: membership, H/V conversion
# ---------------------------------------------------------------------------


def _gencone_lp(v, C: GenCone, want_interior: bool):
    v = vec(v)
    if len(v) != C.n:
        raise DimensionMismatch(f"vector in R^{len(v)}, cone in R^{C.n}")
    gens = list(C.conv_gens) + list(C.ray_gens)
    k = len(gens)
    if k == 0:
        return all(t == 0 for t in v)
    nc = len(C.conv_gens)
    # variables: coefficients (k), plus t when testing the relative interior
    nv = k + (1 if want_interior else 0)
    rows, rhs = [], []
    for j in range(C.n):
        row = [g[j] for g in gens] + ([ZERO] if want_interior else [])
        rows.append(row)
        rhs.append(v[j])
        rows.append([-a for a in row])
        rhs.append(-v[j])
    if nc:
        row = [ONE] * nc + [ZERO] * (nv - nc)
        rows.append(row)
        rhs.append(ONE)
        rows.append([-a for a in row])
        rhs.append(-ONE)
    for i in range(k):
        row = [ZERO] * nv
        row[i] = -ONE
        if want_interior:
            row[k] = ONE
        rows.append(row)
        rhs.append(ZERO)
    c = [ZERO] * nv
    if want_interior:
        row = [ZERO] * nv
        row[k] = ONE
        rows.append(row)
        rhs.append(ONE)
        c[k] = ONE
    res = lp_solve(c, rows, rhs, vertex=False)
    if res.status is LPStatus.INFEASIBLE:
        return False
    if not want_interior:
        return True
    return res.optimum > 0


def cone_member_lp(v, C: GenCone) -> bool:
    """Membership in ``conv + cone`` by exact LP feasibility."""
    return _gencone_lp(v, C, want_interior=False)


def relative_interior_member(v, C: GenCone) -> bool:
    """``v in ri C``: an LP maximizing the smallest generator coefficient.

    The relative interior of ``conv(P) + cone(R)`` consists of the
    combinations with every coefficient strictly positive.
    """
    return _gencone_lp(v, C, want_interior=True)


def _primitive(v):
    """Scale a nonzero rational vector to a primitive integer vector."""
    import math

    den = 1
    for t in v:
        den = den * t.denominator // math.gcd(den, t.denominator)
    ints = [int(t * den) for t in v]
    g = 0
    for t in ints:
        g = math.gcd(g, abs(t))
    return tuple(_Q(t // g) for t in ints)


@functools.lru_cache(maxsize=4096)
def cone_generators(H: tuple, d: int):
    """Extreme rays and a lineality basis of the cone ``{y : H y <= 0}``."""
    H = tuple(r for r in H if any(r))
    lin = null_space(H, d)
    rho = d - len(lin)
    if rho == 0:
        return (), lin
    rays = []
    seen = set()
    for S in itertools.combinations(range(len(H)), rho - 1):
        rows = [H[i] for i in S]
        if rho > 1 and rank(rows) != rho - 1:
            continue
        ns = null_space(rows + list(lin), d)
        if len(ns) != 1:
            continue
        r = ns[0]
        vals = [dot(h, r) for h in H]
        if all(t <= 0 for t in vals):
            pass
        elif all(t >= 0 for t in vals):
            r = neg(r)
        else:
            continue
        r = _primitive(r)
        if r not in seen:
            seen.add(r)
            rays.append(r)
    rays.sort()
    return tuple(rays), lin


def generators(Q: Polyhedron) -> Generators:
    """Vertices (of ``Q`` intersected with the lineality complement), extreme
    rays and a lineality basis."""
    if "gens" in Q._cache:
        return Q._cache["gens"]
    if Q.is_empty():
        g = Generators((), (), ())
    else:
        n = Q.n
        H = tuple(tuple(a) + (-bi,) for a, bi in zip(Q.A, Q.b)) + ((ZERO,) * n + (-ONE,),)
        rays, lin = cone_generators(H, n + 1)
        verts, qrays = [], []
        for r in rays:
            if r[n] > 0:
                verts.append(tuple(t / r[n] for t in r[:n]))
            else:
                qrays.append(r[:n])
        g = Generators(tuple(sorted(verts)), tuple(sorted(qrays)),
                       tuple(l[:n] for l in lin))
    Q._cache["gens"] = g
    return g


@functools.lru_cache(maxsize=8192)
def _gencone_hrep(conv: tuple, rays: tuple, n: int):
    """H-representation ``(ineq_rows, ineq_rhs, eq_rows, eq_rhs)`` of a GenCone."""
    if not conv:
        pol_rays, pol_lin = cone_generators(rays, n) if rays else ((), null_space((), n))
        return (pol_rays, (ZERO,) * len(pol_rays), pol_lin, (ZERO,) * len(pol_lin))
    H = tuple(tuple(p) + (ONE,) for p in conv) + tuple(tuple(r) + (ZERO,) for r in rays)
    pol_rays, pol_lin = cone_generators(H, n + 1)
    ineq = tuple(g[:n] for g in pol_rays)
    ineq_rhs = tuple(-g[n] for g in pol_rays)
    eq = tuple(g[:n] for g in pol_lin)
    eq_rhs = tuple(-g[n] for g in pol_lin)
    return ineq, ineq_rhs, eq, eq_rhs


def gencone_to_polyhedron(C: GenCone) -> Polyhedron:
    ineq, ineq_rhs, eq, eq_rhs = _gencone_hrep(C.conv_gens, C.ray_gens, C.n)
    rows = list(ineq) + list(eq) + [neg(r) for r in eq]
    rhs = list(ineq_rhs) + list(eq_rhs) + [-t for t in eq_rhs]
    return Polyhedron(tuple(rows), tuple(rhs), C.n)


def cone_member(v, C: GenCone, method: str = "hrep") -> bool:
    """``v in conv(conv_gens) + cone(ray_gens)``, decided exactly.

    ``method="lp"`` solves the feasibility LP directly; the default compares
    against a cached exact H-representation, which is much faster when the
    same cone is queried repeatedly.
    """
    v = vec(v)
    if len(v) != C.n:
        raise DimensionMismatch(f"vector in R^{len(v)}, cone in R^{C.n}")
    if method == "lp":
        return cone_member_lp(v, C)
    if not C.conv_gens and not C.ray_gens:
        return not any(v)
    ineq, ineq_rhs, eq, eq_rhs = _gencone_hrep(C.conv_gens, C.ray_gens, C.n)
    return (all(dot(r, v) <= t for r, t in zip(ineq, ineq_rhs))
            and all(dot(r, v) == t for r, t in zip(eq, eq_rhs)))


def polar(C: GenCone) -> Polyhedron:
    """Polar ``{y : <y, r> <= 0}`` of a finitely generated cone."""
    if C.conv_gens:
        raise ValueError("polar is defined here for cones only")
    return Polyhedron(C.ray_gens, zeros(len(C.ray_gens)), C.n)


def cone_of_polyhedral_cone(K: Polyhedron) -> GenCone:
    """Generators of a polyhedral cone ``{w : A w <= 0}`` as a GenCone."""
    if any(bi != 0 for bi in K.b):
        raise ValueError("not a cone: right-hand side must vanish")
    rays, lin = cone_generators(tuple(K.A), K.n)
    return GenCone((), tuple(rays) + tuple(lin) + tuple(neg(l) for l in lin), K.n)


def cones_equal(K1: Polyhedron, K2: Polyhedron) -> bool:
    """Exact equality of two polyhedral cones via mutual generator containment."""
    for P, R in ((K1, K2), (K2, K1)):
        G = cone_of_polyhedral_cone(P)
        if not all(R.contains(g) for g in G.ray_gens):
            return False
    return True


def distance2_to_gencone(v, C: GenCone):
    """Squared Euclidean distance from ``v`` to ``conv + cone`` (exact)."""
    v = vec(v)
    if not C.conv_gens and not C.ray_gens:
        return norm2(v)
    P = gencone_to_polyhedron(C)
    if P.contains(v):
        return ZERO
    y = project(P, v)
    return norm2(sub(v, y))


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------


def _gram_inverse(Q: Polyhedron, S: tuple):
    cache = Q._cache.setdefault("gram", {})
    if S in cache:
        return cache[S]
    rows = [Q.A[i] for i in S]
    G = [[dot(r, s) for s in rows] for r in rows]
    try:
        inv = inverse(G)
    except ZeroDivisionError:
        inv = None
    cache[S] = inv
    return inv


def _try_active(Q: Polyhedron, S: tuple, z):
    if not S:
        return (z, ()) if Q.contains(z) else None
    inv = _gram_inverse(Q, S)
    if inv is None:
        return None
    r = [dot(Q.A[i], z) - Q.b[i] for i in S]
    mu = matvec(inv, r)
    if any(t < 0 for t in mu):
        return None
    y = sub(z, rmatvec([Q.A[i] for i in S], mu, Q.n))
    if not Q.contains(y):
        return None
    return y, mu


def project_certified(Q: Polyhedron, z):
    """Projection with its KKT certificate ``(y, S, mu)``.

    ``z - y = sum_{i in S} mu_i a_i`` with ``mu >= 0``, the rows in ``S``
    linearly independent and tight at ``y``.
    """
    z = vec(z)
    if len(z) != Q.n:
        raise DimensionMismatch(f"point in R^{len(z)}, polyhedron in R^{Q.n}")
    if Q.m > face_budget():
        raise FaceBudgetExceeded(f"{Q.m} rows exceed the enumeration budget {face_budget()}")
    if Q.is_empty():
        raise EmptyPolyhedron("cannot project onto an empty polyhedron")
    if Q.contains(z):
        return z, (), ()
    hint = Q._cache.get("proj_hint")
    if hint is not None:
        got = _try_active(Q, hint, z)
        if got is not None:
            return got[0], hint, got[1]
    violated = [i for i in range(Q.m) if dot(Q.A[i], z) > Q.b[i]]
    order = violated + [i for i in range(Q.m) if i not in violated]
    r = Q._cache.get("rank")
    if r is None:
        r = Q._cache["rank"] = rank(Q.A)
    guess = tuple(sorted(independent_rows(Q.A, violated)))
    got = _try_active(Q, guess, z)
    if got is not None:
        Q._cache["proj_hint"] = guess
        return got[0], guess, got[1]
    for k in range(1, r + 1):
        for S in itertools.combinations(order, k):
            S = tuple(sorted(S))
            got = _try_active(Q, S, z)
            if got is not None:
                Q._cache["proj_hint"] = S
                return got[0], S, got[1]
    raise AssertionError("projection enumeration found no KKT point")  # pragma: no cover


def project(Q: Polyhedron, z):
    """Exact Euclidean projection onto ``Q`` by KKT enumeration over faces."""
    return project_certified(Q, z)[0]


# ---------------------------------------------------------------------------
# Faces
# ---------------------------------------------------------------------------


def face_of_maximizers(Q: Polyhedron, v) -> FaceDescriptor:
    """Maximal tight set of ``argmax_{x in Q} <v, x>``."""
    v = vec(v)
    if len(v) != Q.n:
        raise DimensionMismatch("objective dimension mismatch")
    res = lp_solve(v, Q.A, Q.b)
    if res.status is LPStatus.INFEASIBLE:
        raise EmptyPolyhedron("empty polyhedron has no maximizers")
    if res.status is LPStatus.UNBOUNDED:
        raise Unbounded("linear objective is unbounded over Q")
    opt_face = Q.with_rows([neg(v)], [-res.optimum])
    tight = []
    for i in range(Q.m):
        if dot(Q.A[i], res.primal) != Q.b[i]:
            continue
        low = lp_solve(Q.A[i], opt_face.A, opt_face.b, maximize=False, vertex=False)
        if low.optimum == Q.b[i]:
            tight.append(i)
    return FaceDescriptor(tuple(tight))


def _incidence(Q: Polyhedron):
    if "incidence" in Q._cache:
        return Q._cache["incidence"]
    g = generators(Q)
    vmask, rmask = [], []
    for a, bi in zip(Q.A, Q.b):
        vm = 0
        for k, v in enumerate(g.vertices):
            if dot(a, v) == bi:
                vm |= 1 << k
        rm = 0
        for k, r in enumerate(g.rays):
            if dot(a, r) == 0:
                rm |= 1 << k
        vmask.append(vm)
        rmask.append(rm)
    out = (g, vmask, rmask)
    Q._cache["incidence"] = out
    return out


def _closure(vmask, rmask, V, R):
    return tuple(i for i in range(len(vmask))
                 if V & vmask[i] == V and R & rmask[i] == R)


def faces_enumerate(Q: Polyhedron) -> list:
    """All nonempty faces with maximal tight sets, smallest tight sets first."""
    if Q.m > face_budget():
        raise FaceBudgetExceeded(f"{Q.m} rows exceed the enumeration budget {face_budget()}")
    if Q.is_empty():
        return []
    g, vmask, rmask = _incidence(Q)
    full_v = (1 << len(g.vertices)) - 1
    full_r = (1 << len(g.rays)) - 1
    start = _closure(vmask, rmask, full_v, full_r)
    seen = {start}
    queue = [start]
    while queue:
        S = queue.pop()
        V, R = full_v, full_r
        for i in S:
            V &= vmask[i]
            R &= rmask[i]
        for i in range(Q.m):
            if i in S:
                continue
            V2 = V & vmask[i]
            if not V2:
                continue
            T = _closure(vmask, rmask, V2, R & rmask[i])
            if T not in seen:
                seen.add(T)
                queue.append(T)
    return sorted((FaceDescriptor(S) for S in seen), key=lambda f: (len(f.tight), f.tight))


def face_vertices(Q: Polyhedron, face: FaceDescriptor):
    g, vmask, _ = _incidence(Q)
    V = (1 << len(g.vertices)) - 1
    for i in face.tight:
        V &= vmask[i]
    return tuple(v for k, v in enumerate(g.vertices) if V >> k & 1)


def argmax_face_bruteforce(Q: Polyhedron, v) -> FaceDescriptor:
    """The maximizing face found by scanning ``faces_enumerate`` (an oracle).

    The optimal face is the unique face whose generators all attain the
    optimum and whose recession directions are orthogonal to ``v``; among
    such faces it is the largest one.
    """
    v = vec(v)
    g = generators(Q)
    if any(dot(v, r) > 0 for r in g.rays) or any(dot(v, l) != 0 for l in g.lineality):
        raise Unbounded("linear objective is unbounded over Q")
    best = max(dot(v, x) for x in g.vertices)
    _, vmask, rmask = _incidence(Q)
    good = None
    for f in faces_enumerate(Q):
        verts = face_vertices(Q, f)
        R = (1 << len(g.rays)) - 1
        for i in f.tight:
            R &= rmask[i]
        rays = [r for k, r in enumerate(g.rays) if R >> k & 1]
        if all(dot(v, x) == best for x in verts) and all(dot(v, r) == 0 for r in rays):
            if good is None or len(f.tight) < len(good.tight):
                good = f
    return good


# ---------------------------------------------------------------------------
# Fourier-Motzkin and piecewise polyhedral mappings
# ---------------------------------------------------------------------------


def remove_redundant(P: Polyhedron) -> Polyhedron:
    """Drop duplicate, trivial and LP-redundant rows."""
    rows, rhs = [], []
    seen = set()
    for a, bi in zip(P.A, P.b):
        if not any(a):
            if bi < 0:
                return Polyhedron((tuple(a),), (bi,), P.n)
            continue
        # normalize so duplicates are recognized
        s = next(abs(t) for t in a if t)
        key = (tuple(t / s for t in a), bi / s)
        if key in seen:
            continue
        seen.add(key)
        rows.append(key[0])
        rhs.append(key[1])
    keep = list(range(len(rows)))
    for i in range(len(rows)):
        others = [j for j in keep if j != i]
        res = lp_solve(rows[i], [rows[j] for j in others], [rhs[j] for j in others],
                       vertex=False)
        if res.status is LPStatus.OPTIMAL and res.optimum <= rhs[i]:
            keep = others
    return Polyhedron(tuple(rows[j] for j in keep), tuple(rhs[j] for j in keep), P.n)


def fourier_motzkin(P: Polyhedron, keep: int, max_rows: int = 2000) -> Polyhedron:
    """Project ``P`` onto its first ``keep`` coordinates."""
    rows = [list(a) for a in P.A]
    rhs = list(P.b)
    n = P.n
    for col in range(n - 1, keep - 1, -1):
        pos = [k for k, r in enumerate(rows) if r[col] > 0]
        negs = [k for k, r in enumerate(rows) if r[col] < 0]
        zero = [k for k, r in enumerate(rows) if r[col] == 0]
        new_rows = [rows[k][:col] for k in zero]
        new_rhs = [rhs[k] for k in zero]
        for p in pos:
            for q in negs:
                cp, cq = rows[p][col], -rows[q][col]
                new_rows.append([cq * x + cp * y for x, y in zip(rows[p][:col], rows[q][:col])])
                new_rhs.append(cq * rhs[p] + cp * rhs[q])
        if len(new_rows) > max_rows:
            raise EliminationBudgetExceeded(f"{len(new_rows)} rows after elimination")
        reduced = remove_redundant(Polyhedron(tuple(tuple(r) for r in new_rows),
                                              tuple(new_rhs), col))
        rows = [list(r) for r in reduced.A]
        rhs = list(reduced.b)
    return Polyhedron(tuple(tuple(r) for r in rows), tuple(rhs), keep)


@dataclass(frozen=True)
class PiecewisePolyhedralMapping:
    """A set-valued map ``R^n -> R^m`` whose graph is a union of polyhedra."""

    pieces: tuple
    n: int
    m: int

    def __post_init__(self):
        for p in self.pieces:
            if p.n != self.n + self.m:
                raise DimensionMismatch("graph pieces must live in R^(n+m)")

    def in_graph(self, x, v) -> bool:
        xv = tuple(vec(x)) + tuple(vec(v))
        return any(p.contains(xv) for p in self.pieces)


@dataclass(frozen=True)
class PolyhedronUnion:
    polyhedra: tuple

    def contains(self, x) -> bool:
        x = vec(x)
        return any(p.contains(x) for p in self.polyhedra)


def ppm_minimal_identifiable(G: PiecewisePolyhedralMapping, xbar, vbar) -> PolyhedronUnion:
    """Union of the projections of graph pieces through ``(xbar, vbar)``."""
    xv = tuple(vec(xbar)) + tuple(vec(vbar))
    hits = [p for p in G.pieces if p.contains(xv)]
    if not hits:
        raise PairNotInGraph("(xbar, vbar) is not in the graph")
    return PolyhedronUnion(tuple(fourier_motzkin(p, G.n) for p in hits))


def normal_cone_mapping(Q: Polyhedron) -> PiecewisePolyhedralMapping:
    """Graph of ``N_Q`` as a union of polyhedra, one piece per face."""
    n = Q.n
    pieces = []
    for f in faces_enumerate(Q):
        # x in face, v = sum_{i in tight} mu_i a_i with mu >= 0; eliminate mu
        k = len(f.tight)
        dim = 2 * n + k
        rows, rhs = [], []
        for a, bi in zip(Q.A, Q.b):
            rows.append(tuple(a) + zeros(n + k))
            rhs.append(bi)
        for i in f.tight:
            rows.append(neg(Q.A[i]) + zeros(n + k))
            rhs.append(-Q.b[i])
        for j in range(n):
            coeff = tuple(-Q.A[i][j] for i in f.tight)
            row = zeros(n) + tuple(ONE if t == j else ZERO for t in range(n)) + coeff
            rows.append(row)
            rhs.append(ZERO)
            rows.append(neg(row))
            rhs.append(ZERO)
        for t in range(k):
            rows.append(zeros(2 * n) + tuple(-ONE if s == t else ZERO for s in range(k)))
            rhs.append(ZERO)
        big = Polyhedron(tuple(rows), tuple(rhs), dim)
        pieces.append(fourier_motzkin(big, 2 * n) if k else
                      Polyhedron(tuple(r[:2 * n] for r in rows[:Q.m + 2 * n]),
                                 tuple(rhs[:Q.m + 2 * n]), 2 * n))
    return PiecewisePolyhedralMapping(tuple(pieces), n, n)
