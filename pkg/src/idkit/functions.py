"""Polyhedral, piecewise linear-quadratic and composite functions.

Each function type exposes exact value, subdifferential and (for convex
PLQ) proximal oracles.  ``INF`` stands for the value outside the domain.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .errors import (
    DimensionMismatch,
    NotConvex,
    PointNotInDomain,
    QualificationFailure,
)
from .numerics import (
    ONE,
    ZERO,
    LPStatus,
    Q as _Q,
    add,
    dot,
    format_rational,
    ldl_psd,
    lp_solve,
    matrix,
    matvec,
    neg,
    null_space,
    qp_solve,
    rank,
    rmatvec,
    scale,
    sub,
    vec,
    zeros,
)
from .polyhedra import (
    GenCone,
    Polyhedron,
    cone_generators,
    face_of_maximizers,
    generators,
    normal_cone,
    tangent_cone,
)

INF = math.inf

SubdiffRep = GenCone


def _dedupe(vs):
    out = []
    seen = set()
    for v in vs:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return tuple(out)


# ---------------------------------------------------------------------------
# Polyhedral functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyhedralFunction:
    """``f(x) = max_i <a_i,x> + b_i`` on ``{x : <c_j,x> <= d_j}``."""

    pieces: tuple
    constraints: tuple
    n: int
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def make(cls, pieces, constraints=(), n: int | None = None) -> "PolyhedralFunction":
        pieces = tuple((vec(a), _Q(b)) for a, b in pieces)
        constraints = tuple((vec(c), _Q(d)) for c, d in constraints)
        if not pieces:
            raise ValueError("a polyhedral function needs at least one affine piece")
        if n is None:
            n = len(pieces[0][0])
        if any(len(a) != n for a, _ in pieces) or any(len(c) != n for c, _ in constraints):
            raise DimensionMismatch(f"all coefficient vectors must have {n} entries")
        f = cls(pieces, constraints, n)
        if epigraph(f).is_empty():
            raise ValueError("empty domain")
        return f

    @classmethod
    def max_function(cls, n: int) -> "PolyhedralFunction":
        return cls.make([([1 if k == i else 0 for k in range(n)], 0) for i in range(n)])

    @classmethod
    def abs(cls) -> "PolyhedralFunction":
        return cls.make([([1], 0), ([-1], 0)])

    @classmethod
    def linear(cls, a) -> "PolyhedralFunction":
        return cls.make([(a, 0)])

    @classmethod
    def indicator(cls, P: Polyhedron) -> "PolyhedralFunction":
        return cls.make([(zeros(P.n), 0)], list(zip(P.A, P.b)), P.n)

    def domain(self) -> Polyhedron:
        return Polyhedron(tuple(c for c, _ in self.constraints),
                          tuple(d for _, d in self.constraints), self.n)

    def in_domain(self, x) -> bool:
        return all(dot(c, x) <= d for c, d in self.constraints)

    def value(self, x):
        x = vec(x)
        if len(x) != self.n:
            raise DimensionMismatch("point dimension mismatch")
        if not self.in_domain(x):
            return INF
        return max(dot(a, x) + b for a, b in self.pieces)

    def to_json(self) -> dict:
        return {"pieces": [{"a": [format_rational(t) for t in a], "b": format_rational(b)}
                           for a, b in self.pieces],
                "constraints": [{"c": [format_rational(t) for t in c], "d": format_rational(d)}
                                for c, d in self.constraints]}

    @classmethod
    def from_json(cls, data) -> "PolyhedralFunction":
        return cls.make([(p["a"], p["b"]) for p in data["pieces"]],
                        [(c["c"], c["d"]) for c in data.get("constraints", [])])

    def plus_linear(self, w) -> "PolyhedralFunction":
        w = vec(w)
        return PolyhedralFunction.make([(add(a, w), b) for a, b in self.pieces],
                                       self.constraints, self.n)


def value(f, x):
    return f.value(x)


def active_sets_f(f: PolyhedralFunction, x):
    x = vec(x)
    if not f.in_domain(x):
        raise PointNotInDomain("x is outside dom f")
    fx = f.value(x)
    I = tuple(i for i, (a, b) in enumerate(f.pieces) if dot(a, x) + b == fx)
    J = tuple(j for j, (c, d) in enumerate(f.constraints) if dot(c, x) == d)
    return I, J


def subdifferential(f, x) -> SubdiffRep:
    if isinstance(f, PLQFunction):
        return f.subdifferential(x)
    if isinstance(f, CompositeFunction):
        return subdifferential_composite(f, x)
    I, J = active_sets_f(f, x)
    return GenCone(_dedupe(f.pieces[i][0] for i in I),
                   _dedupe(f.constraints[j][0] for j in J), f.n)


def horizon_subdifferential(f: PolyhedralFunction, x, validate: bool = True) -> GenCone:
    """``cone{c_j : j in J(x)}``, cross-checked against the epigraph normals."""
    I, J = active_sets_f(f, x)
    C = GenCone((), _dedupe(f.constraints[j][0] for j in J), f.n)
    if validate:
        _validate_horizon(f, x, C)
    return C


def _validate_horizon(f, x, C):
    from .polyhedra import cone_member

    x = vec(x)
    E = epigraph(f)
    N = normal_cone(E, x + (f.value(x),))
    # generators of C lift to horizontal epigraph normals
    for c in C.ray_gens:
        if not cone_member(tuple(c) + (ZERO,), N):
            raise AssertionError("horizon generator is not an epigraph normal")
    # every horizontal epigraph normal lies in C
    from .polyhedra import _gencone_hrep

    ineq, _, eq, _ = _gencone_hrep(N.conv_gens, N.ray_gens, N.n)
    rows = [r[:f.n] for r in ineq] + [r[:f.n] for r in eq] + [neg(r[:f.n]) for r in eq]
    rays, lin = cone_generators(tuple(rows), f.n)
    for w in tuple(rays) + tuple(lin) + tuple(neg(l) for l in lin):
        if not cone_member(w, C):
            raise AssertionError("epigraph horizontal normal missing from horizon cone")


def epigraph(f: PolyhedralFunction) -> Polyhedron:
    rows = [tuple(a) + (-ONE,) for a, _ in f.pieces]
    rhs = [-b for _, b in f.pieces]
    rows += [tuple(c) + (ZERO,) for c, _ in f.constraints]
    rhs += [d for _, d in f.constraints]
    return Polyhedron(tuple(rows), tuple(rhs), f.n + 1)


def prox_polyhedral(f: PolyhedralFunction, lam, z):
    """``argmin_y f(y) + |y - z|^2 / (2 lam)`` via an exact QP in ``(y, t)``."""
    lam = _Q(lam)
    z = vec(z)
    n = f.n
    H = [[(ONE / lam if i == j and i < n else ZERO) for j in range(n + 1)] for i in range(n + 1)]
    g = tuple(-t / lam for t in z) + (ONE,)
    E = epigraph(f)
    res = qp_solve(H, g, E.A, E.b, hint=f._cache.get("prox_hint"))
    f._cache["prox_hint"] = res.active
    return res.x[:n]


# ---------------------------------------------------------------------------
# Smooth polynomial maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyMap:
    """A polynomial map ``R^n -> R^m`` with rational coefficients.

    ``polys[k]`` is a tuple of ``(coef, exps)`` monomials.
    """

    polys: tuple
    n: int

    @classmethod
    def make(cls, polys, n: int) -> "PolyMap":
        out = []
        for p in polys:
            terms = []
            for coef, exps in p:
                exps = tuple(int(e) for e in exps)
                if len(exps) != n:
                    raise DimensionMismatch("exponent vector length mismatch")
                terms.append((_Q(coef), exps))
            out.append(tuple(terms))
        return cls(tuple(out), n)

    @classmethod
    def affine(cls, M, c=None) -> "PolyMap":
        M = matrix(M)
        n = len(M[0])
        c = zeros(len(M)) if c is None else vec(c)
        polys = []
        for row, ck in zip(M, c):
            terms = [(a, tuple(1 if t == j else 0 for t in range(n)))
                     for j, a in enumerate(row) if a]
            if ck:
                terms.append((ck, (0,) * n))
            polys.append(tuple(terms))
        return cls(tuple(polys), n)

    @classmethod
    def identity(cls, n: int) -> "PolyMap":
        return cls.affine([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def m(self) -> int:
        return len(self.polys)

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        x = vec(x)
        return tuple(_eval_poly(p, x) for p in self.polys)

    def jacobian(self, x):
        x = vec(x)
        rows = []
        for p in self.polys:
            row = []
            for j in range(self.n):
                s = ZERO
                for coef, exps in p:
                    e = exps[j]
                    if e == 0:
                        continue
                    term = coef * e
                    for k, (xk, ek) in enumerate(zip(x, exps)):
                        ek2 = ek - 1 if k == j else ek
                        if ek2:
                            term *= xk ** ek2
                    s += term
                row.append(s)
            rows.append(tuple(row))
        return tuple(rows)

    def value_float(self, x):
        return [sum(float(c) * math.prod(float(t) ** e for t, e in zip(x, exps))
                    for c, exps in p) for p in self.polys]

    def to_json(self) -> dict:
        return {"polys": [{"terms": [{"coef": format_rational(c), "exps": list(e)}
                                     for c, e in p]} for p in self.polys]}

    @classmethod
    def from_json(cls, data, n: int | None = None) -> "PolyMap":
        polys = [[(t["coef"], t["exps"]) for t in p["terms"]] for p in data["polys"]]
        if n is None:
            n = data.get("n") or len(polys[0][0][1])
        return cls.make(polys, n)


SmoothMap = PolyMap


def _eval_poly(p, x):
    s = ZERO
    for coef, exps in p:
        term = coef
        for t, e in zip(x, exps):
            if e:
                term *= t ** e
        s += term
    return s


# ---------------------------------------------------------------------------
# Composite functions g o F
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompositeFunction:
    g: PolyhedralFunction
    F: PolyMap
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.F.m != self.g.n:
            raise DimensionMismatch("F must map into the domain space of g")

    @property
    def n(self) -> int:
        return self.F.n

    def value(self, x):
        return self.g.value(self.F.value(x))

    def in_domain(self, x) -> bool:
        return self.g.in_domain(self.F.value(x))


def qualification_check(cf: CompositeFunction, x) -> bool:
    """True iff ``ker grad F(x)^* meets the horizon cone of g only at 0``."""
    x = vec(x)
    key = ("qual", x)
    if key in cf._cache:
        return cf._cache[key]
    u = cf.F.value(x)
    C = horizon_subdifferential(cf.g, u, validate=False)
    ok = True
    if C.ray_gens:
        Jt = cf.F.jacobian(x)
        k = len(C.ray_gens)
        m = cf.g.n
        # y = sum mu_j c_j, J^T y = 0, mu >= 0, sum mu <= 1; any y_i != 0 ?
        rows, rhs = [], []
        for col in range(cf.n):
            row = tuple(sum((Jt[i][col] * c[i] for i in range(m)), ZERO) for c in C.ray_gens)
            rows += [row, neg(row)]
            rhs += [ZERO, ZERO]
        for j in range(k):
            rows.append(tuple(-ONE if t == j else ZERO for t in range(k)))
            rhs.append(ZERO)
        rows.append((ONE,) * k)
        rhs.append(ONE)
        for i in range(m):
            obj = tuple(c[i] for c in C.ray_gens)
            for sgn in (1, -1):
                res = lp_solve(scale(sgn, obj), rows, rhs, vertex=False)
                if res.optimum > 0:
                    ok = False
                    break
            if not ok:
                break
    cf._cache[key] = ok
    return ok


def subdifferential_composite(cf: CompositeFunction, x) -> SubdiffRep:
    x = vec(x)
    if not cf.in_domain(x):
        raise PointNotInDomain("F(x) is outside dom g")
    if not qualification_check(cf, x):
        raise QualificationFailure("the chain-rule qualification condition fails at x")
    u = cf.F.value(x)
    inner = subdifferential(cf.g, u)
    Jm = cf.F.jacobian(x)
    adj = lambda y: rmatvec(Jm, y, cf.n)  # noqa: E731
    return GenCone(_dedupe(adj(a) for a in inner.conv_gens),
                   _dedupe(r for r in (adj(c) for c in inner.ray_gens) if any(r)), cf.n)


def compose_affine(g: PolyhedralFunction, M, c=None) -> PolyhedralFunction:
    """The polyhedral function ``x -> g(M x + c)``."""
    M = matrix(M)
    n = len(M[0])
    c = zeros(len(M)) if c is None else vec(c)
    pieces = [(rmatvec(M, a, n), b + dot(a, c)) for a, b in g.pieces]
    cons = [(rmatvec(M, cc, n), d - dot(cc, c)) for cc, d in g.constraints]
    return PolyhedralFunction.make(pieces, cons, n)


# ---------------------------------------------------------------------------
# Piecewise linear-quadratic functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PLQCell:
    cell: Polyhedron
    P: tuple
    q: tuple
    r: object

    def value(self, x):
        return dot(x, matvec(self.P, x)) / 2 + dot(self.q, x) + self.r

    def gradient(self, x):
        return add(matvec(self.P, x), self.q)


@dataclass(frozen=True)
class Univariate:
    """Convex univariate PLQ: ``breaks`` split the domain ``[lo, hi]`` into
    intervals carrying the quadratics ``(P, q, r)`` in ``quads``."""

    breaks: tuple
    quads: tuple
    lo: object = None
    hi: object = None

    def intervals(self):
        pts = [self.lo] + list(self.breaks) + [self.hi]
        return list(zip(pts[:-1], pts[1:]))

    def value(self, t):
        for (a, b), (P, q, r) in zip(self.intervals(), self.quads):
            if (a is None or t >= a) and (b is None or t <= b):
                return P * t * t / 2 + q * t + r
        return INF

    def subgradient_interval(self, t):
        """``(lo, hi)`` bounds of ``df(t)``; None marks an infinite end."""
        grads = []
        for (a, b), (P, q, _) in zip(self.intervals(), self.quads):
            if (a is None or t >= a) and (b is None or t <= b):
                grads.append(((a, b), P * t + q))
        if not grads:
            raise PointNotInDomain("outside the univariate domain")
        lo = min(g for _, g in grads)
        hi = max(g for _, g in grads)
        if self.lo is not None and t == self.lo:
            lo = None
        if self.hi is not None and t == self.hi:
            hi = None
        return lo, hi

    def prox(self, lam, z):
        best = None
        for (a, b), (P, q, r) in zip(self.intervals(), self.quads):
            y = (z / lam - q) / (P + 1 / lam)
            if a is not None and y < a:
                y = a
            if b is not None and y > b:
                y = b
            val = P * y * y / 2 + q * y + r + (y - z) ** 2 / (2 * lam)
            if best is None or val < best[0]:
                best = (val, y)
        return best[1]


@dataclass(frozen=True)
class PLQFunction:
    cells: tuple
    n: int
    convex: bool = False
    certificate: tuple = ()
    source: object = field(default=None, compare=False)
    factors: tuple | None = field(default=None, compare=False)
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def make(cls, cells, n: int | None = None, certify: bool = True, **extra) -> "PLQFunction":
        built = []
        for cell, P, q, r in cells:
            if not isinstance(cell, Polyhedron):
                cell = Polyhedron.from_rows(cell[0], cell[1], n)
            built.append(PLQCell(cell, matrix(P), vec(q), _Q(r)))
        if n is None:
            n = built[0].cell.n
        built = [c for c in built if not c.cell.is_empty()]
        if not built:
            raise ValueError("a PLQ function needs a nonempty cell")
        for c in built:
            if c.cell.n != n or len(c.q) != n or len(c.P) != n:
                raise DimensionMismatch("cell data dimension mismatch")
        convex, cert = (certify_convexity(built, n) if certify else (False, ("not certified",)))
        return cls(tuple(built), n, convex, cert, **extra)

    @classmethod
    def from_polyhedral(cls, f: PolyhedralFunction) -> "PLQFunction":
        cells = []
        for i, (a, b) in enumerate(f.pieces):
            rows = [sub(a2, a) for k, (a2, b2) in enumerate(f.pieces) if k != i]
            rhs = [b - b2 for k, (a2, b2) in enumerate(f.pieces) if k != i]
            rows += [c for c, _ in f.constraints]
            rhs += [d for _, d in f.constraints]
            cells.append((Polyhedron(tuple(vec(r) for r in rows), vec(rhs), f.n),
                          zeros_matrix(f.n), a, b))
        g = cls.make(cells, f.n, certify=False, source=f)
        return cls(g.cells, g.n, True, ("maximum of affine functions",), source=f)

    @classmethod
    def separable(cls, factors) -> "PLQFunction":
        """``f(x) = sum_i f_i(x_i)`` for convex :class:`Univariate` factors."""
        factors = tuple(factors)
        n = len(factors)
        cells = []
        for combo in itertools.product(*[list(zip(u.intervals(), u.quads)) for u in factors]):
            rows, rhs = [], []
            P = [[ZERO] * n for _ in range(n)]
            q = [ZERO] * n
            r = ZERO
            for i, ((a, b), (Pi, qi, ri)) in enumerate(combo):
                e = tuple(ONE if k == i else ZERO for k in range(n))
                if a is not None:
                    rows.append(neg(e))
                    rhs.append(-a)
                if b is not None:
                    rows.append(e)
                    rhs.append(b)
                P[i][i] = Pi
                q[i] = qi
                r += ri
            cells.append((Polyhedron(tuple(rows), tuple(rhs), n), P, q, r))
        convex = all(_univariate_convex(u) for u in factors)
        built = cls.make(cells, n, certify=False)
        return cls(built.cells, n, convex, ("separable sum of convex univariate pieces",)
                   if convex else ("univariate factor not convex",), factors=factors)

    @classmethod
    def univariate(cls, breaks, quads, lo=None, hi=None) -> "PLQFunction":
        u = make_univariate(breaks, quads, lo, hi)
        return cls.separable([u])

    def domain_contains(self, x) -> bool:
        return any(c.cell.contains(x) for c in self.cells)

    in_domain = domain_contains

    def value(self, x):
        x = vec(x)
        if len(x) != self.n:
            raise DimensionMismatch("point dimension mismatch")
        if self.factors is not None:
            total = ZERO
            for u, t in zip(self.factors, x):
                v = u.value(t)
                if v == INF:
                    return INF
                total += v
            return total
        for c in self.cells:
            if c.cell.contains(x):
                return c.value(x)
        return INF

    def cells_at(self, x):
        return [c for c in self.cells if c.cell.contains(x)]

    def subdifferential(self, x) -> SubdiffRep:
        """``conv{grad f_C(x) : x in C} + N_dom f(x)``."""
        x = vec(x)
        here = self.cells_at(x)
        if not here:
            raise PointNotInDomain("x is outside dom f")
        conv = _dedupe(c.gradient(x) for c in here)
        # N_dom(x) is the polar of the union of cell tangent cones
        H = []
        for c in here:
            T = tangent_cone(c.cell, x)
            tg = generators(T)
            H += list(tg.rays) + list(tg.lineality) + [neg(l) for l in tg.lineality]
        if H:
            rays, lin = cone_generators(tuple(tuple(h) for h in H), self.n)
            gens = tuple(rays) + tuple(lin) + tuple(neg(l) for l in lin)
        else:
            # every cell tangent cone is {0}: the domain is a single point
            gens = tuple(tuple(ONE if k == i else ZERO for k in range(self.n)) for i in range(self.n))
            gens += tuple(neg(g) for g in gens)
        return GenCone(conv, _dedupe(gens), self.n)

    def prox(self, lam, z):
        return prox(self, lam, z)

    def to_json(self) -> dict:
        return {"cells": [{**c.cell.to_json(),
                           "P": [[format_rational(t) for t in row] for row in c.P],
                           "q": [format_rational(t) for t in c.q],
                           "r": format_rational(c.r)} for c in self.cells]}

    @classmethod
    def from_json(cls, data) -> "PLQFunction":
        cells = [((c["A"], c["b"]), c["P"], c["q"], c["r"]) for c in data["cells"]]
        n = len(data["cells"][0]["q"])
        return cls.make(cells, n)


def zeros_matrix(n):
    return tuple((ZERO,) * n for _ in range(n))


def make_univariate(breaks, quads, lo=None, hi=None) -> Univariate:
    breaks = tuple(_Q(t) for t in breaks)
    quads = tuple((_Q(P), _Q(q), _Q(r)) for P, q, r in quads)
    if len(quads) != len(breaks) + 1:
        raise ValueError("need one quadratic per interval")
    return Univariate(breaks, quads, None if lo is None else _Q(lo), None if hi is None else _Q(hi))


def _univariate_convex(u: Univariate) -> bool:
    if any(P < 0 for P, _, _ in u.quads):
        return False
    for k, t in enumerate(u.breaks):
        (P1, q1, r1), (P2, q2, r2) = u.quads[k], u.quads[k + 1]
        if P1 * t * t / 2 + q1 * t + r1 != P2 * t * t / 2 + q2 * t + r2:
            return False
        if P2 * t + q2 < P1 * t + q1:
            return False
    return True


def _affine_hull(S: Polyhedron):
    """A point and a basis of the direction space of ``aff S`` (S nonempty)."""
    eq = face_of_maximizers(S, zeros(S.n)).tight
    x0 = lp_solve(zeros(S.n), S.A, S.b, vertex=False).primal
    N = null_space([S.A[i] for i in eq], S.n)
    return x0, N, eq


def certify_convexity(cells, n: int):
    """Exact convexity certificate for a PLQ given by ``cells``.

    Checks: every ``P`` is PSD; pieces agree on every pairwise intersection;
    across each shared facet the gradient jump points outward from the first
    cell.  Convexity of the union of cells is assumed, not checked.
    """
    notes = []
    for k, c in enumerate(cells):
        if not ldl_psd(c.P):
            return False, (f"cell {k}: quadratic part is not positive semidefinite",)
    for (i, c1), (j, c2) in itertools.combinations(enumerate(cells), 2):
        S = c1.cell.with_rows(c2.cell.A, c2.cell.b)
        if S.is_empty():
            continue
        x0, N, eq = _affine_hull(S)
        dP = tuple(sub(r1, r2) for r1, r2 in zip(c1.P, c2.P))
        dq = sub(c1.q, c2.q)
        if c1.value(x0) != c2.value(x0):
            return False, (f"cells {i},{j}: values disagree on the overlap",)
        grad = add(matvec(dP, x0), dq)
        for u in N:
            if dot(u, grad) != 0 or any(dot(u, matvec(dP, w)) != 0 for w in N):
                return False, (f"cells {i},{j}: values disagree on the overlap",)
        if len(N) == n - 1 and n > 0:
            # shared facet: orient its normal from c1 towards c2
            a = null_space(N, n)[0]
            probe = lp_solve(a, c1.cell.A, c1.cell.b, vertex=False)
            if probe.status is LPStatus.OPTIMAL and probe.optimum == dot(a, x0):
                pass
            else:
                a = neg(a)
            # t(x) = <grad f2 - grad f1, a> = <(P2-P1) x + (q2-q1), a>
            coef = rmatvec(tuple(neg(r) for r in dP), a, n)
            const = dot(neg(dq), a)
            low = lp_solve(coef, S.A, S.b, maximize=False, vertex=False)
            if low.status is LPStatus.UNBOUNDED or low.optimum + const < 0:
                return False, (f"cells {i},{j}: gradient jump across the facet is not monotone",)
            notes.append(f"facet {i}|{j} monotone")
    return True, tuple(["quadratic parts PSD", "values agree on overlaps"] + notes)


def prox(f, lam, z):
    """Proximal point ``argmin_y f(y) + |y - z|^2 / (2 lam)`` for convex f."""
    lam = _Q(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    z = vec(z)
    if isinstance(f, PolyhedralFunction):
        return prox_polyhedral(f, lam, z)
    if not f.convex:
        raise NotConvex("prox is implemented for certified convex PLQ functions only")
    if f.source is not None:
        return prox_polyhedral(f.source, lam, z)
    if f.factors is not None:
        return tuple(u.prox(lam, t) for u, t in zip(f.factors, z))
    best = None
    hints = f._cache.setdefault("prox_hints", {})
    for k, c in enumerate(f.cells):
        H = [[c.P[i][j] + (ONE / lam if i == j else ZERO) for j in range(f.n)]
             for i in range(f.n)]
        g = sub(c.q, scale(ONE / lam, z))
        res = qp_solve(H, g, c.cell.A, c.cell.b, hint=hints.get(k))
        if res is None:
            continue
        hints[k] = res.active
        val = c.value(res.x) + sum((t * t for t in sub(res.x, z)), ZERO) / (2 * lam)
        if best is None or val < best[0]:
            best = (val, res.x)
    return best[1]
