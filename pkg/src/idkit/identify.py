"""Multiplier polytopes, minimal identifiable sets and sampled verifiers.

Verifiers draw exact rational samples from a seeded generator along the
radius schedule ``r_k = r0 * 2**-k`` (k = 0..12, sup-norm balls).  A FAIL
verdict always carries exact witnesses found at the finest radius; when
violations occur only at coarser radii the verdict is INCONCLUSIVE.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyMultiplierSet,
    InvalidSplit,
    NotANormal,
    NotASubgradient,
    QualificationFailure,
    UnsupportedDescriptor,
)
from .functions import (
    INF,
    CompositeFunction,
    PLQFunction,
    PolyhedralFunction,
    active_sets_f,
    epigraph,
    prox,
    qualification_check,
    subdifferential,
    subdifferential_composite,
)
from .numerics import (
    ONE,
    Rational,
    ZERO,
    LPStatus,
    Q as _Q,
    add,
    dot,
    format_rational,
    lp_solve,
    neg,
    norm2,
    rmatvec,
    scale,
    sqrt_floor,
    sub,
    vec,
    zeros,
)
from .polyhedra import (
    GenCone,
    Polyhedron,
    active_set,
    cone_member,
    distance2_to_gencone,
    face_of_maximizers,
    generators,
    gencone_to_polyhedron,
    normal_cone,
    project,
)

LEVELS = 13
DENOM_BITS = 24
NECESSITY_TOL = 1e-6


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"
    NOT_APPLICABLE = "NOT_APPLICABLE"


def _fmt(v):
    return [format_rational(t) for t in v]


# ---------------------------------------------------------------------------
# Multiplier sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiplierSet:
    """Multipliers ``(lambda, mu)`` over the active indices ``I`` and ``J``.

    For a polyhedron host ``I`` is empty and ``J`` lists the active rows.
    """

    host: object
    xbar: tuple
    vbar: tuple
    I: tuple
    J: tuple
    Lambda: Polyhedron

    def is_empty(self) -> bool:
        return self.Lambda.is_empty()

    def split(self, point):
        """Dense ``(lambda, mu)`` vectors over all pieces / constraints."""
        lam_n, mu_n = _host_sizes(self.host)
        lam = [ZERO] * lam_n
        mu = [ZERO] * mu_n
        for k, i in enumerate(self.I):
            lam[i] = point[k]
        for k, j in enumerate(self.J):
            mu[j] = point[len(self.I) + k]
        return tuple(lam), tuple(mu)


def _host_sizes(host):
    if isinstance(host, Polyhedron):
        return 0, host.m
    return len(host.pieces), len(host.constraints)


def _multiplier_rows(gens, target, simplex_count):
    k = len(gens)
    rows, rhs = [], []
    n = len(target)
    for j in range(n):
        row = tuple(g[j] for g in gens)
        rows += [row, neg(row)]
        rhs += [target[j], -target[j]]
    for t in range(k):
        rows.append(tuple(-ONE if s == t else ZERO for s in range(k)))
        rhs.append(ZERO)
    if simplex_count:
        row = tuple(ONE if s < simplex_count else ZERO for s in range(k))
        rows += [row, neg(row)]
        rhs += [ONE, -ONE]
    return Polyhedron(tuple(rows), tuple(rhs), k)


def multiplier_polytope(host, xbar, vbar) -> MultiplierSet:
    xbar, vbar = vec(xbar), vec(vbar)
    if isinstance(host, Polyhedron):
        J = active_set(host, xbar)
        L = _multiplier_rows([host.A[j] for j in J], vbar, 0)
        return MultiplierSet(host, xbar, vbar, (), J, L)
    I, J = active_sets_f(host, xbar)
    gens = [host.pieces[i][0] for i in I] + [host.constraints[j][0] for j in J]
    L = _multiplier_rows(gens, vbar, len(I))
    return MultiplierSet(host, xbar, vbar, I, J, L)


def strict_complementarity(ms: MultiplierSet):
    """``(full_support, (lambda, mu))`` with a maximal-support witness."""
    L = ms.Lambda
    k = L.n
    base = lp_solve(zeros(k), L.A, L.b, vertex=False)
    if base.status is LPStatus.INFEASIBLE:
        raise EmptyMultiplierSet("the multiplier polytope is empty")
    pts = [base.primal]
    for t in range(k):
        e = tuple(ONE if s == t else ZERO for s in range(k))
        # cap relative to the feasible base point so the LP stays feasible
        res = lp_solve(e, L.A + (e,), L.b + (base.primal[t] + ONE,))
        if res.optimum > 0:
            pts.append(res.primal)
    w = tuple(sum((p[t] for p in pts), ZERO) / len(pts) for t in range(k))
    full = all(t > 0 for t in w)
    return full, ms.split(w)


# ---------------------------------------------------------------------------
# Descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Face:
    """``{x : supp_lambda in I(x), supp_mu in J(x)}`` for a polyhedral host."""

    host: object
    supp_lambda: tuple = ()
    supp_mu: tuple = ()
    variant = "FACE"

    def contains(self, x) -> bool:
        x = vec(x)
        h = self.host
        if isinstance(h, Polyhedron):
            return h.contains(x) and all(dot(h.A[i], x) == h.b[i] for i in self.supp_mu)
        if not h.in_domain(x):
            return False
        fx = h.value(x)
        return (all(dot(h.pieces[i][0], x) + h.pieces[i][1] == fx for i in self.supp_lambda)
                and all(dot(h.constraints[j][0], x) == h.constraints[j][1]
                        for j in self.supp_mu))

    def polyhedron(self) -> Polyhedron:
        h = self.host
        if isinstance(h, Polyhedron):
            return h.with_equalities(self.supp_mu)
        rows = [c for c, _ in h.constraints]
        rhs = [d for _, d in h.constraints]
        for j in self.supp_mu:
            rows.append(neg(h.constraints[j][0]))
            rhs.append(-h.constraints[j][1])
        if self.supp_lambda:
            i0 = self.supp_lambda[0]
            a0, b0 = h.pieces[i0]
            for a, b in h.pieces:
                rows.append(sub(a, a0))
                rhs.append(b0 - b)
            for i in self.supp_lambda[1:]:
                a, b = h.pieces[i]
                rows.append(sub(a0, a))
                rhs.append(b - b0)
        return Polyhedron(tuple(rows), tuple(rhs), h.n)

    def to_json(self) -> dict:
        return {"variant": "FACE", "supp_lambda": list(self.supp_lambda),
                "supp_mu": list(self.supp_mu)}


@dataclass(frozen=True)
class FaceUnion:
    """Union of intersections of faces (each member is a tuple of Faces)."""

    members: tuple
    variant = "UNION"

    def contains(self, x) -> bool:
        return any(all(f.contains(x) for f in m) for m in self.members)

    def member_polyhedra(self):
        out = []
        for m in self.members:
            P = m[0].polyhedron()
            for f in m[1:]:
                Pf = f.polyhedron()
                P = P.with_rows(Pf.A, Pf.b)
            out.append(P)
        return out

    def to_json(self) -> dict:
        return {"variant": "UNION", "members": [[f.to_json() for f in m] for m in self.members]}


@dataclass(frozen=True)
class PreimageUnion:
    """``union_y F^{-1}(M_y)`` for a composite ``g o F``."""

    F: object
    inner: tuple
    minimal: bool = True
    variant = "PREIMAGE_UNION"

    def contains(self, x) -> bool:
        u = self.F.value(vec(x))
        return any(face.contains(u) for _, face in self.inner)

    def to_json(self) -> dict:
        return {"variant": "PREIMAGE_UNION", "minimal": self.minimal,
                "inner": [{"y": _fmt(y), "face": f.to_json()} for y, f in self.inner]}


@dataclass(frozen=True)
class BoxDescriptor:
    """Product of intervals ``[lower_i, upper_i]`` (None = unbounded)."""

    lower: tuple
    upper: tuple
    variant = "BOX"

    def contains(self, x) -> bool:
        return all((lo is None or t >= lo) and (hi is None or t <= hi)
                   for t, lo, hi in zip(vec(x), self.lower, self.upper))

    def polyhedron(self) -> Polyhedron:
        n = len(self.lower)
        rows, rhs = [], []
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            e = tuple(ONE if k == i else ZERO for k in range(n))
            if lo is not None:
                rows.append(neg(e))
                rhs.append(-lo)
            if hi is not None:
                rows.append(e)
                rhs.append(hi)
        return Polyhedron(tuple(rows), tuple(rhs), n)

    def to_json(self) -> dict:
        f = lambda t: None if t is None else format_rational(t)  # noqa: E731
        return {"variant": "BOX", "lower": [f(t) for t in self.lower],
                "upper": [f(t) for t in self.upper]}


@dataclass(frozen=True)
class WholeSpace:
    n: int
    variant = "WHOLE"

    def contains(self, x) -> bool:
        return True

    def polyhedron(self) -> Polyhedron:
        return Polyhedron.whole_space(self.n)

    def to_json(self) -> dict:
        return {"variant": "WHOLE", "n": self.n}


@dataclass(frozen=True)
class EpigraphLift:
    """The graph ``{(x, f(x)) : x in M}`` inside ``epi f``."""

    M: object
    f: object
    variant = "EPIGRAPH_LIFT"

    def contains(self, xr) -> bool:
        xr = vec(xr)
        x, r = xr[:-1], xr[-1]
        fx = self.f.value(x)
        return fx != INF and fx == r and self.M.contains(x)

    def to_json(self) -> dict:
        return {"variant": "EPIGRAPH_LIFT", "M": self.M.to_json()}


# ---------------------------------------------------------------------------
# Minimal identifiable sets
# ---------------------------------------------------------------------------


def _require_normal(Q: Polyhedron, xbar, vbar):
    if not cone_member(vbar, normal_cone(Q, xbar)):
        raise NotANormal("vbar is not a normal vector to Q at xbar")


def minimal_identifiable_set(Q: Polyhedron, xbar, vbar) -> Face:
    xbar, vbar = vec(xbar), vec(vbar)
    _require_normal(Q, xbar, vbar)
    return Face(Q, (), face_of_maximizers(Q, vbar).tight)


def _require_subgradient(f, xbar, vbar):
    if not cone_member(vbar, subdifferential(f, xbar)):
        raise NotASubgradient("vbar is not a subgradient of f at xbar")


def minimal_identifiable_set_f(f: PolyhedralFunction, xbar, vbar) -> Face:
    xbar, vbar = vec(xbar), vec(vbar)
    _require_subgradient(f, xbar, vbar)
    ms = multiplier_polytope(f, xbar, vbar)
    _, (lam, mu) = strict_complementarity(ms)
    return Face(f, tuple(i for i, t in enumerate(lam) if t > 0),
                tuple(j for j, t in enumerate(mu) if t > 0))


def minimal_identifiable_set_separable(f: PLQFunction, xbar, vbar) -> BoxDescriptor:
    """Minimal identifiable set of a separable convex PLQ, coordinatewise.

    With ``df_i(t) = [lo, hi]``, points to the right of ``t`` carry
    subgradients near ``v`` only when ``v = hi``, and points to the left only
    when ``v = lo``.  The box is clipped to the domain of each factor.
    """
    if f.factors is None:
        raise UnsupportedDescriptor("separable structure required")
    xbar, vbar = vec(xbar), vec(vbar)
    lower, upper = [], []
    for u, t, v in zip(f.factors, xbar, vbar):
        lo, hi = u.subgradient_interval(t)
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            raise NotASubgradient("vbar is not a subgradient")
        lower.append(u.lo if lo is not None and v == lo else t)
        upper.append(u.hi if hi is not None and v == hi else t)
    return BoxDescriptor(tuple(lower), tuple(upper))


def _polytope_vertices(P: Polyhedron):
    return generators(P).vertices


def minimal_identifiable_set_composite(cf: CompositeFunction, xbar, vbar) -> PreimageUnion:
    xbar, vbar = vec(xbar), vec(vbar)
    if not qualification_check(cf, xbar):
        raise QualificationFailure("chain-rule qualification fails")
    if not cone_member(vbar, subdifferential_composite(cf, xbar)):
        raise NotASubgradient("vbar is not in the chain-rule subdifferential")
    g = cf.g
    u = cf.F.value(xbar)
    Jm = cf.F.jacobian(xbar)
    I, J = active_sets_f(g, u)
    gens = [g.pieces[i][0] for i in I] + [g.constraints[j][0] for j in J]
    adj = [rmatvec(Jm, a, cf.n) for a in gens]
    P = _multiplier_rows(adj, vbar, len(I))
    inner = []
    seen = set()
    for w in _polytope_vertices(P):
        y = tuple(sum((w[k] * gens[k][t] for k in range(len(gens))), ZERO) for t in range(g.n))
        face = minimal_identifiable_set_f(g, u, y)
        key = (face.supp_lambda, face.supp_mu)
        if key not in seen:
            seen.add(key)
            inner.append((y, face))
    full_rank = len(Jm) > 0 and _rank(Jm) == min(len(Jm), cf.n)
    return PreimageUnion(cf.F, tuple(inner), minimal=full_rank)


def _rank(M):
    from .numerics import rank

    return rank(M)


def sum_rule_identifiable(fs, xbar, vbar, split) -> FaceUnion:
    xbar, vbar = vec(xbar), vec(vbar)
    split = [vec(s) for s in split]
    n = len(xbar)
    if len(split) != len(fs):
        raise InvalidSplit("one split vector per summand is required")
    total = zeros(n)
    for s in split:
        total = add(total, s)
    if total != vbar:
        raise InvalidSplit("split vectors must sum to vbar")
    for f, s in zip(fs, split):
        if not cone_member(s, subdifferential(f, xbar)):
            raise InvalidSplit("split vector is not a subgradient of its summand")
    _sum_qualification(fs, xbar)
    # splitting polytope in the joint multiplier space
    blocks = []
    for f in fs:
        I, J = active_sets_f(f, xbar)
        blocks.append((I, J, [f.pieces[i][0] for i in I] + [f.constraints[j][0] for j in J]))
    sizes = [len(b[2]) for b in blocks]
    K = sum(sizes)
    rows, rhs = [], []
    for j in range(n):
        row = tuple(g[j] for b in blocks for g in b[2])
        rows += [row, neg(row)]
        rhs += [vbar[j], -vbar[j]]
    for t in range(K):
        rows.append(tuple(-ONE if s == t else ZERO for s in range(K)))
        rhs.append(ZERO)
    off = 0
    for (I, J, gens), size in zip(blocks, sizes):
        row = tuple(ONE if off <= s < off + len(I) else ZERO for s in range(K))
        rows += [row, neg(row)]
        rhs += [ONE, -ONE]
        off += size
    P = Polyhedron(tuple(rows), tuple(rhs), K)
    members = []
    seen = set()
    for w in _polytope_vertices(P):
        off = 0
        faces = []
        for f, (I, J, gens), size in zip(fs, blocks, sizes):
            part = w[off:off + size]
            off += size
            vi = tuple(sum((part[k] * gens[k][t] for k in range(size)), ZERO) for t in range(n))
            faces.append(minimal_identifiable_set_f(f, xbar, vi))
        key = tuple((fc.supp_lambda, fc.supp_mu) for fc in faces)
        if key not in seen:
            seen.add(key)
            members.append(tuple(faces))
    return FaceUnion(tuple(members))


def _sum_qualification(fs, xbar):
    cones = []
    for f in fs:
        _, J = active_sets_f(f, xbar)
        cones.append([f.constraints[j][0] for j in J])
    gens = [(k, c) for k, cs in enumerate(cones) for c in cs]
    if not gens:
        return
    n = len(xbar)
    K = len(gens)
    rows, rhs = [], []
    for j in range(n):
        row = tuple(c[j] for _, c in gens)
        rows += [row, neg(row)]
        rhs += [ZERO, ZERO]
    for t in range(K):
        rows.append(tuple(-ONE if s == t else ZERO for s in range(K)))
        rhs.append(ZERO)
    rows.append((ONE,) * K)
    rhs.append(ONE)
    # a nonzero y_k in some summand's horizon cone summing to zero violates it
    for k in range(len(fs)):
        for j in range(n):
            obj = tuple(c[j] if kk == k else ZERO for kk, c in gens)
            for sgn in (1, -1):
                res = lp_solve(scale(sgn, obj), rows, rhs, vertex=False)
                if res.optimum > 0:
                    raise QualificationFailure("horizon qualification for the sum rule fails")


# ---------------------------------------------------------------------------
# Verifier plumbing
# ---------------------------------------------------------------------------


@dataclass
class VerifierReport:
    verdict: Verdict
    samples_total: int
    violations: list
    radii: list
    seed: int
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is Verdict.PASS and self.samples_total == 0:
            raise ValueError("a PASS verdict needs at least one sample")
        if self.verdict is Verdict.FAIL and not self.violations:
            raise ValueError("a FAIL verdict needs a witness")

    @property
    def final_radius(self):
        return self.radii[-1] if self.radii else ZERO

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value,
                "samples": self.samples_total,
                "violations": [{"x": _fmt(w["x"]), "v": _fmt(w["v"])} for w in self.violations],
                "seed": self.seed,
                "final_radius": format_rational(self.final_radius),
                "radii": [format_rational(r) for r in self.radii],
                "notes": _jsonable(self.notes)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if type(obj).__name__ == "mpq":
        return format_rational(obj)
    return obj


def radius_schedule(r0, levels: int = LEVELS):
    r0 = _Q(r0)
    return [r0 / (1 << k) for k in range(levels)]


def rational_box(rng, n: int, s):
    """A random point of the sup-norm ball of radius ``s`` with dyadic entries."""
    top = 1 << DENOM_BITS
    return tuple(s * Rational(t, top) for t in rng.integers(-top, top + 1, size=n).tolist())


def sup_norm(v):
    return max((abs(t) for t in v), default=ZERO)


def _isqrt_ceil(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def _per_level(budget: int, levels: int):
    base = max(1, budget // levels)
    counts = [base] * levels
    counts[-1] += max(0, budget - base * levels)
    return counts


class _Collector:
    """Accumulates violations per level and turns them into a verdict."""

    def __init__(self, levels: int, keep: int = 5):
        self.levels = levels
        self.by_level = [[] for _ in range(levels)]
        self.samples = 0
        self.final_samples = 0
        self.keep = keep

    def sample(self, level: int):
        self.samples += 1
        if level == self.levels - 1:
            self.final_samples += 1

    def violation(self, level: int, x, v):
        if len(self.by_level[level]) < self.keep:
            self.by_level[level].append({"x": tuple(x), "v": tuple(v)})
        else:
            self.by_level[level].append(None)

    def count(self):
        return sum(len(l) for l in self.by_level)

    def verdict(self):
        final = [w for w in self.by_level[-1] if w is not None]
        if final:
            return Verdict.FAIL, final
        coarse = [w for l in self.by_level for w in l if w is not None]
        if coarse:
            return Verdict.INCONCLUSIVE, coarse[: self.keep]
        if self.samples == 0:
            return Verdict.INCONCLUSIVE, []
        return Verdict.PASS, []


def locality_radius(Q: Polyhedron, xbar, vbar, cap=1):
    """A rational radius within which the local structure at ``(xbar, vbar)``
    is that of the tangent cone and the normal cone.

    Half the minimum over the Euclidean distances from ``xbar`` to inactive
    constraint hyperplanes and from ``vbar`` to every cone generated by a
    subset of active rows that does not contain ``vbar``; capped at ``cap``.
    """
    xbar, vbar = vec(xbar), vec(vbar)
    key = ("locality", xbar, vbar)
    if key in Q._cache:
        return Q._cache[key]
    cands = []
    I = active_set(Q, xbar)
    for i, (a, bi) in enumerate(zip(Q.A, Q.b)):
        if i in I or not any(a):
            continue
        s = bi - dot(a, xbar)
        cands.append(s * s / norm2(a))
    rows = sorted({Q.A[i] for i in I})
    for k in range(len(rows) + 1):
        for S in itertools.combinations(rows, k):
            C = GenCone((), S, Q.n)
            if cone_member(vbar, C):
                continue
            cands.append(distance2_to_gencone(vbar, C))
    cap = _Q(cap)
    d2 = min(cands + [4 * cap * cap]) / 4
    r = min(cap, sqrt_floor(d2, bits=30))
    if r == 0:
        r = sqrt_floor(d2, bits=60) or Rational(1, 1 << 60)
    Q._cache[key] = r
    return r


def _function_window(f):
    return max(sum((abs(t) for t in a), ZERO) for a, _ in f.pieces) + 1


def _polyhedron_of(M):
    if hasattr(M, "polyhedron"):
        return [M.polyhedron()]
    if isinstance(M, FaceUnion):
        return M.member_polyhedra()
    raise UnsupportedDescriptor(f"cannot sample descriptor of type {type(M).__name__}")


# ---------------------------------------------------------------------------
# Identifiability
# ---------------------------------------------------------------------------


def identifiability_verify(host, M, xbar, vbar, budget: int = 10_000, seed: int = 0,
                           r0=None, lam=1, route: str = "function") -> VerifierReport:
    """Sampled check that graph points near ``(xbar, vbar)`` have ``x in M``."""
    xbar, vbar = vec(xbar), vec(vbar)
    lam = _Q(lam)
    if isinstance(host, Polyhedron):
        _require_normal(host, xbar, vbar)
        return _ident_set(host, M, xbar, vbar, budget, seed, r0, lam)
    _require_subgradient(host, xbar, vbar)
    if route == "epigraph":
        E = epigraph(host)
        fx = host.value(xbar)
        rep = _ident_set(E, EpigraphLift(M, host), xbar + (fx,), vbar + (-ONE,),
                         budget, seed, r0, lam)
        rep.notes["route"] = "epigraph"
        return rep
    return _ident_function(host, M, xbar, vbar, budget, seed, r0, lam)


def _ident_set(Q, M, xbar, vbar, budget, seed, r0, lam):
    rng = np.random.default_rng(seed)
    if r0 is None:
        r0 = locality_radius(Q, xbar, vbar)
    radii = radius_schedule(r0)
    col = _Collector(len(radii))
    root = _isqrt_ceil(Q.n)
    center = add(xbar, scale(lam, vbar))
    for level, (r, cnt) in enumerate(zip(radii, _per_level(budget, len(radii)))):
        s = r / (4 * root)
        for _ in range(cnt):
            p = rational_box(rng, Q.n, s)
            u = rational_box(rng, Q.n, s)
            z = add(center, add(p, scale(lam, u)))
            x = project(Q, z)
            v = scale(ONE / lam, sub(z, x))
            if sup_norm(sub(x, xbar)) > r or sup_norm(sub(v, vbar)) > r:
                continue
            col.sample(level)
            if not M.contains(x):
                col.violation(level, x, v)
    verdict, wit = col.verdict()
    return VerifierReport(verdict, col.samples, wit, radii, seed,
                          {"violations_total": col.count(), "route": "set"})


def _ident_function(f, M, xbar, vbar, budget, seed, r0, lam):
    rng = np.random.default_rng(seed)
    fx = f.value(xbar)
    if r0 is None:
        r0 = locality_radius(epigraph(f), xbar + (fx,), vbar + (-ONE,))
    radii = radius_schedule(r0)
    col = _Collector(len(radii))
    root = _isqrt_ceil(f.n)
    window = _function_window(f)
    center = add(xbar, scale(lam, vbar))
    for level, (r, cnt) in enumerate(zip(radii, _per_level(budget, len(radii)))):
        s = r / (4 * root)
        for _ in range(cnt):
            p = rational_box(rng, f.n, s)
            u = rational_box(rng, f.n, s)
            z = add(center, add(p, scale(lam, u)))
            x = prox(f, lam, z)
            v = scale(ONE / lam, sub(z, x))
            if sup_norm(sub(x, xbar)) > r or sup_norm(sub(v, vbar)) > r:
                continue
            if abs(f.value(x) - fx) > window * r:
                continue
            col.sample(level)
            if not M.contains(x):
                col.violation(level, x, v)
    verdict, wit = col.verdict()
    return VerifierReport(verdict, col.samples, wit, radii, seed,
                          {"violations_total": col.count(), "route": "function"})


# ---------------------------------------------------------------------------
# Necessity
# ---------------------------------------------------------------------------


def necessity_verify(host, M, xbar, vbar, budget: int = 10_000, seed: int = 0,
                     r0=None, route: str = "function", tol: float = NECESSITY_TOL) -> VerifierReport:
    """Sampled check that ``d(vbar, N(x)) -> 0`` for ``x in M``, ``x -> xbar``."""
    xbar, vbar = vec(xbar), vec(vbar)
    if isinstance(host, Polyhedron):
        _require_normal(host, xbar, vbar)
        if r0 is None:
            r0 = locality_radius(host, xbar, vbar)
        dist2 = lambda x: distance2_to_gencone(vbar, normal_cone(host, x))  # noqa: E731
        lift = None
    else:
        _require_subgradient(host, xbar, vbar)
        fx = host.value(xbar)
        E = epigraph(host)
        if r0 is None:
            r0 = locality_radius(E, xbar + (fx,), vbar + (-ONE,))
        if route == "epigraph":
            target = vbar + (-ONE,)
            dist2 = lambda x: distance2_to_gencone(  # noqa: E731
                target, normal_cone(E, x + (host.value(x),)))
        else:
            dist2 = lambda x: distance2_to_gencone(vbar, subdifferential(host, x))  # noqa: E731
        lift = host
    # the distance is only defined on the domain, so sample M within it
    dom = host if isinstance(host, Polyhedron) else host.domain()
    polys = [P.with_rows(dom.A, dom.b) for P in _polyhedron_of(M)]
    rng = np.random.default_rng(seed)
    radii = radius_schedule(r0)
    col = _Collector(len(radii))
    root = _isqrt_ceil(len(xbar))
    tol2 = _Q(tol) ** 2
    envelope = []
    for level, (r, cnt) in enumerate(zip(radii, _per_level(budget, len(radii)))):
        s = r / root
        worst = ZERO
        for t in range(cnt):
            P = polys[t % len(polys)]
            if not P.contains(xbar):
                continue
            x = project(P, add(xbar, rational_box(rng, len(xbar), s)))
            col.sample(level)
            d2 = dist2(x)
            worst = max(worst, d2)
            if d2 > tol2:
                col.violation(level, x, vbar)
        envelope.append(worst)
    verdict, wit = col.verdict()
    notes = {"max_distance_per_level": [math.sqrt(float(d)) for d in envelope],
             "route": ("epigraph" if route == "epigraph" else "function") if lift else "set"}
    return VerifierReport(verdict, col.samples, wit, radii, seed, notes)


# ---------------------------------------------------------------------------
# Reduction I: graph equality
# ---------------------------------------------------------------------------


def graph_reduction_verify(Q: Polyhedron, M, xbar, vbar, budget: int = 10_000, seed: int = 0,
                           r0=None, stop_on_fail: bool = False) -> VerifierReport:
    """Two-sided sampled check of ``gph N_Q = gph N_M`` near ``(xbar, vbar)``."""
    if not (isinstance(M, Face) and M.host is Q) and not isinstance(M, (BoxDescriptor, WholeSpace)):
        raise UnsupportedDescriptor("graph reduction needs a face of Q")
    xbar, vbar = vec(xbar), vec(vbar)
    _require_normal(Q, xbar, vbar)
    MP = M.polyhedron()
    if not isinstance(M, Face):
        MP = MP.with_rows(Q.A, Q.b)
    if r0 is None:
        r0 = locality_radius(Q, xbar, vbar)
    rng = np.random.default_rng(seed)
    radii = radius_schedule(r0)
    col = _Collector(len(radii))
    root = _isqrt_ceil(Q.n)
    center = add(xbar, vbar)
    for level, (r, cnt) in enumerate(zip(radii, _per_level(budget, len(radii)))):
        s = r / (4 * root)
        for t in range(cnt):
            z = add(center, add(rational_box(rng, Q.n, s), rational_box(rng, Q.n, s)))
            forward = t % 2 == 0
            x = project(Q if forward else MP, z)
            v = sub(z, x)
            if sup_norm(sub(x, xbar)) > r or sup_norm(sub(v, vbar)) > r:
                continue
            col.sample(level)
            if forward:
                ok = MP.contains(x) and cone_member(v, normal_cone(MP, x))
            else:
                ok = cone_member(v, normal_cone(Q, x))
            if not ok:
                col.violation(level, x, v)
                if stop_on_fail and level == len(radii) - 1:
                    break
    verdict, wit = col.verdict()
    return VerifierReport(verdict, col.samples, wit, radii, seed,
                          {"violations_total": col.count()})


# ---------------------------------------------------------------------------
# Projection representation
# ---------------------------------------------------------------------------


def projection_representation(Q: Polyhedron, xbar, vbar, lam=1, eps=None,
                              budget: int = 2_000, seed: int = 0) -> VerifierReport:
    """Sampled check that ``P_Q(U)`` and the minimal identifiable set agree."""
    xbar, vbar = vec(xbar), vec(vbar)
    lam = _Q(lam)
    M = minimal_identifiable_set(Q, xbar, vbar)
    MP = M.polyhedron()
    delta = locality_radius(Q, xbar, vbar)
    eps = delta if eps is None else _Q(eps)
    eps2 = eps * eps
    rng = np.random.default_rng(seed)
    radius = min(eps, delta)
    radii = radius_schedule(radius)
    col = _Collector(len(radii))
    root = _isqrt_ceil(Q.n)
    for level, (r, cnt) in enumerate(zip(radii, _per_level(budget, len(radii)))):
        s = r / (4 * root)
        for t in range(cnt):
            x = project(MP, add(xbar, rational_box(rng, Q.n, s)))
            N = normal_cone(Q, x)
            col.sample(level)
            if t % 2 == 0:
                # P_Q(U) lies in M: push a nearby normal and project back
                NP = gencone_to_polyhedron(N)
                v = project(NP, add(vbar, rational_box(rng, Q.n, s)))
                if norm2(sub(x, xbar)) >= eps2 or norm2(sub(v, vbar)) >= eps2:
                    continue
                y = project(Q, add(x, scale(lam, v)))
                if not M.contains(y):
                    col.violation(level, y, v)
            else:
                # M lies in P_Q(U): x needs a normal within eps of vbar
                if distance2_to_gencone(vbar, N) >= eps2:
                    col.violation(level, x, vbar)
    # x̄ + λv̄ is interior to U: a grid of perturbations projects into M
    rho = lam * radius / (4 * root)
    grid_bad = []
    center = add(xbar, scale(lam, vbar))
    for g in itertools.product((-1, 0, 1), repeat=Q.n):
        z = add(center, tuple(rho * t for t in g))
        x = project(Q, z)
        v = scale(ONE / lam, sub(z, x))
        if not (M.contains(x) and norm2(sub(x, xbar)) < eps2 and norm2(sub(v, vbar)) < eps2):
            grid_bad.append({"x": x, "v": v})
    verdict, wit = col.verdict()
    if grid_bad:
        verdict, wit = Verdict.FAIL, grid_bad[:5]
    return VerifierReport(verdict, col.samples + 3 ** Q.n, wit, radii, seed,
                          {"grid_points": 3 ** Q.n, "grid_failures": len(grid_bad),
                           "face": list(M.supp_mu)})


# ---------------------------------------------------------------------------
# Non-stabilization examples
# ---------------------------------------------------------------------------


LORENTZ_DIRECTION = tuple(Rational(t, 8) for t in (3, 7, 2, 1, 1))  # unit vector, first entry 3/8


def lorentz_member(x, vbar, eps, orientation: str = "stated") -> bool:
    """Membership in the cone-shaped set ``M_eps`` near the apex, exactly.

    ``stated``: ``<x/|x|, vbar> <= eps``.  ``corrected``: ``>= 1 - eps``.
    The origin belongs to both.  Comparisons are done on squares.
    """
    x, vbar = vec(x), vec(vbar)
    if not any(x):
        return True
    c = dot(x, vbar)
    nx = norm2(x)
    eps = _Q(eps)
    if orientation == "stated":
        # c / |x| <= eps
        return c <= 0 or c * c <= eps * eps * nx
    bound = 1 - eps
    if bound <= 0:
        return True
    return c > 0 and c * c >= bound * bound * nx


def nonstabilization_demo(which: str, eps=None, eps2=None, radii=None, ns=range(1, 11)) -> dict:
    which = which.upper()
    if which == "LORENTZ":
        return _lorentz_demo(_Q(eps or "1/2"), _Q(eps2 or "1/4"), radii)
    if which == "QUARTIC":
        return _quartic_demo(list(ns))
    raise ValueError("which must be LORENTZ or QUARTIC")


def _lorentz_demo(eps, eps2, radii):
    n = len(LORENTZ_DIRECTION)
    vbar = tuple(ONE if k == 0 else ZERO for k in range(n))
    d = LORENTZ_DIRECTION
    assert norm2(d) == 1 and dot(d, vbar) == Rational(3, 8)
    if radii is None:
        radii = [Rational(1, 10 ** k) for k in range(0, 7)]
    witnesses = []
    for r in radii:
        x = scale(_Q(r), d)
        witnesses.append({
            "radius": format_rational(r),
            "x": _fmt(x),
            "cosine": format_rational(dot(x, vbar) / _Q(r)),
            "in_M_eps": lorentz_member(x, vbar, eps),
            "in_M_eps_prime": lorentz_member(x, vbar, eps2),
        })
    separated = all(w["in_M_eps"] and not w["in_M_eps_prime"] for w in witnesses)
    # orientation check: along t*vbar gradients x/|x| equal vbar, so an
    # identifiable set must contain these points
    ray = [scale(Rational(1, 10 ** k), vbar) for k in range(0, 7)]
    stated_escapes = [not lorentz_member(x, vbar, eps) for x in ray]
    mid = (1 - eps + 1 - eps2) / 2
    # a point with cosine 5/8 separates the corrected sets when eps=1/2, eps'=1/4
    corrected = None
    if eps == Rational(1, 2) and eps2 == Rational(1, 4):
        d2 = tuple(Rational(t, 8) for t in (5, 5, 3, 1, 0))  # 25+25+9+1 = 64, cosine 5/8
        xs = [scale(Rational(1, 10 ** k), d2) for k in range(0, 7)]
        corrected = {
            "cosine": "5/8",
            "separated": all(lorentz_member(x, vbar, eps, "corrected")
                             and not lorentz_member(x, vbar, eps2, "corrected") for x in xs),
        }
    return {
        "example": "lorentz",
        "dimension": n,
        "vbar": _fmt(vbar),
        "eps": format_rational(eps),
        "eps_prime": format_rational(eps2),
        "witnesses": witnesses,
        "separated_at_all_radii": separated,
        "min_radius": format_rational(min(_Q(r) for r in radii)),
        "locally_minimal_identifiable_set": "NONE",
        "stated_sets_miss_gradient_ray": all(stated_escapes),
        "corrected_orientation": corrected,
        "midpoint_cosine": format_rational(mid),
    }


def quartic_gradient_norm2(x, y):
    """``|grad f|^2`` for ``f(x, y) = sqrt(x^4 + y^2)`` (exact for rationals)."""
    x, y = _Q(x), _Q(y)
    return (4 * x ** 6 + y * y) / (x ** 4 + y * y)


def quartic_curve_limit(n: int, x_max=Rational(1, 1000), steps: int = 40):
    """Estimate ``lim |grad f|`` along ``y = x^2/n`` from points with ``|x| <= x_max``.

    Along the curve ``|grad f|^2 = (4 n^2 x^2 + 1)/(n^2 + 1)`` exactly, which
    is affine in ``x^2``; two samples determine the intercept exactly.
    """
    xs = [_Q(x_max) / (1 << k) for k in range(steps)]
    vals = [quartic_gradient_norm2(x, x * x / n) for x in xs]
    x1, x2 = xs[-2], xs[-1]
    g1, g2 = vals[-2], vals[-1]
    slope = (g1 - g2) / (x1 * x1 - x2 * x2)
    intercept = g2 - slope * x2 * x2
    return math.sqrt(float(intercept)), [math.sqrt(float(v)) for v in vals], intercept


def _quartic_demo(ns):
    rows = []
    for n in ns:
        lim, seq, exact2 = quartic_curve_limit(n)
        rows.append({
            "n": n,
            "observed_limit": lim,
            "observed_limit_squared": format_rational(exact2),
            "stated_formula": n * n / (n ** 4 + 1),
            "closed_form": 1 / math.sqrt(n * n + 1),
            "gradient_norm_at_x=1e-3": seq[0],
        })
    # diagonal sequence: points on L_n with x_n -> 0 and |grad f| -> 0
    diag = []
    for n in ns:
        x = Rational(1, 1000 * (1 << n))
        diag.append({"n": n, "x": format_rational(x), "y": format_rational(x * x / n),
                     "grad_norm": math.sqrt(float(quartic_gradient_norm2(x, x * x / n)))})
    return {"example": "quartic", "curves": rows, "diagonal_sequence": diag,
            "locally_minimal_identifiable_set": "NONE"}
