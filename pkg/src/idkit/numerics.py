"""Exact rational arithmetic and the LP / linear-algebra kernels.

Everything here works over ``gmpy2.mpq``.  Vectors are tuples of rationals and
matrices are tuples of row tuples; nothing in this module touches floating
point.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2

Rational = type(gmpy2.mpq())
ZERO = gmpy2.mpq(0)
ONE = gmpy2.mpq(1)

Vec = tuple
Matrix = tuple


class DimensionMismatch(ValueError):
    pass


class CyclingGuardExceeded(RuntimeError):
    pass


def Q(x) -> Rational:
    """Coerce ``x`` to an exact rational.

    Accepts ints, ``Fraction``, ``mpq``, strings such as ``"-3/4"`` and floats
    (converted exactly from their binary value).
    """
    if isinstance(x, Rational):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, Fraction):
        return gmpy2.mpq(x.numerator, x.denominator)
    if isinstance(x, bool):
        return gmpy2.mpq(int(x))
    if hasattr(x, "__index__"):
        return gmpy2.mpq(int(x))
    return gmpy2.mpq(x)


def parse_rational(s: str) -> Rational:
    s = s.strip()
    if "/" in s:
        p, q = s.split("/")
        den = int(q)
        if den == 0:
            raise ValueError(f"zero denominator in {s!r}")
        return gmpy2.mpq(int(p), den)
    if any(c in s for c in ".eE"):
        return Q(Fraction(s))
    return gmpy2.mpq(int(s))


def format_rational(q) -> str:
    q = Q(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def vec(xs: Iterable) -> Vec:
    return tuple(Q(x) for x in xs)


def matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(vec(r) for r in rows)


def zeros(n: int) -> Vec:
    return (ZERO,) * n


def unit(n: int, i: int, s=1) -> Vec:
    return tuple(Q(s) if k == i else ZERO for k in range(n))


def dot(u: Sequence, v: Sequence):
    s = ZERO
    for a, b in zip(u, v):
        if a and b:
            s += a * b
    return s


def add(u, v) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def sub(u, v) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def scale(t, u) -> Vec:
    return tuple(t * a for a in u)


def neg(u) -> Vec:
    return tuple(-a for a in u)


def norm2(u):
    return dot(u, u)


def matvec(A, x) -> Vec:
    return tuple(dot(row, x) for row in A)


def transpose(A, ncols: int | None = None) -> Matrix:
    if not A:
        return tuple(() for _ in range(ncols or 0))
    return tuple(zip(*A))


def rmatvec(A, y, n: int) -> Vec:
    """Compute ``A^T y`` for an m x n matrix ``A``."""
    out = [ZERO] * n
    for row, yi in zip(A, y):
        if yi:
            for j, a in enumerate(row):
                if a:
                    out[j] += yi * a
    return tuple(out)


def lincomb(coeffs, vectors, n: int) -> Vec:
    return rmatvec(vectors, coeffs, n)


def to_float(u) -> list[float]:
    return [float(a) for a in u]


def sqrt_floor(q, bits: int = 30) -> Rational:
    """A dyadic rational ``s`` with ``s <= sqrt(q)`` and ``sqrt(q) - s < 2**-bits``."""
    q = Q(q)
    if q < 0:
        raise ValueError("negative argument")
    scale_ = 1 << bits
    num = q.numerator * scale_ * scale_
    return gmpy2.mpq(int(gmpy2.isqrt(num // q.denominator)), scale_)


def sqrt_ceil(q, bits: int = 30) -> Rational:
    s = sqrt_floor(q, bits)
    return s if s * s == Q(q) else s + gmpy2.mpq(1, 1 << bits)


# ---------------------------------------------------------------------------
# Linear systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearSolution:
    solution: Vec | None
    rank: int
    null_basis: tuple = ()
    pivots: tuple = ()

    @property
    def consistent(self) -> bool:
        return self.solution is not None


def rref(A, b=None):
    """Reduced row echelon form of ``[A | b]``.

    Returns the reduced rows, the augmented column (or None) and the pivot
    columns.
    """
    rows = [list(r) for r in A]
    rhs = None if b is None else list(b)
    m = len(rows)
    n = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
            if rhs is not None:
                rhs[r], rhs[p] = rhs[p], rhs[r]
        piv = rows[r][c]
        if piv != 1:
            inv = 1 / piv
            rows[r] = [a * inv for a in rows[r]]
            if rhs is not None:
                rhs[r] *= inv
        pr = rows[r]
        for i in range(m):
            if i != r:
                f = rows[i][c]
                if f:
                    ri = rows[i]
                    for j in range(c, n):
                        if pr[j]:
                            ri[j] -= f * pr[j]
                    if rhs is not None:
                        rhs[i] -= f * rhs[r]
        pivots.append(c)
        r += 1
    return rows, rhs, pivots


def solve_linear(A, b, ncols: int | None = None) -> LinearSolution:
    """Solve ``A x = b`` exactly.

    Returns a particular solution (free variables set to zero) or ``None``
    when the system is inconsistent, together with the rank and a basis of
    the null space of ``A``.
    """
    A = [vec(r) for r in A]
    b = vec(b)
    if len(A) != len(b):
        raise DimensionMismatch(f"A has {len(A)} rows but b has {len(b)} entries")
    n = len(A[0]) if A else (ncols or 0)
    if ncols is not None and A and len(A[0]) != ncols:
        raise DimensionMismatch("column count mismatch")
    if any(len(r) != n for r in A):
        raise DimensionMismatch("ragged matrix")
    rows, rhs, pivots = rref(A, b)
    rank = len(pivots)
    null = _null_from_rref(rows, pivots, n)
    if any(rhs[i] != 0 for i in range(rank, len(rows))):
        return LinearSolution(None, rank, null, tuple(pivots))
    x = [ZERO] * n
    for i, c in enumerate(pivots):
        x[c] = rhs[i]
    return LinearSolution(tuple(x), rank, null, tuple(pivots))


def _null_from_rref(rows, pivots, n):
    free = [j for j in range(n) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for i, c in enumerate(pivots):
            v[c] = -rows[i][f]
        basis.append(tuple(v))
    return tuple(basis)


def null_space(A, n: int) -> tuple:
    if not A:
        return tuple(unit(n, i) for i in range(n))
    rows, _, pivots = rref([vec(r) for r in A])
    return _null_from_rref(rows, pivots, n)


def rank(A) -> int:
    if not A:
        return 0
    return len(rref([vec(r) for r in A])[2])


def independent_rows(A, indices) -> list:
    """Greedy maximal linearly independent subset of ``indices`` (in order)."""
    chosen = []
    basis = []  # reduced rows with their pivot columns
    for i in indices:
        r = list(A[i])
        for prow, pc in basis:
            f = r[pc]
            if f:
                r = [a - f * p for a, p in zip(r, prow)]
        pc = next((j for j, a in enumerate(r) if a != 0), None)
        if pc is None:
            continue
        inv = 1 / r[pc]
        r = [a * inv for a in r]
        basis = [([a - p[pc] * c for a, c in zip(p, r)], q) for p, q in basis]
        basis.append((r, pc))
        chosen.append(i)
    return chosen


def inverse(M) -> Matrix:
    """Exact inverse of a square nonsingular matrix; raises ZeroDivisionError."""
    k = len(M)
    aug = [list(M[i]) + [ONE if j == i else ZERO for j in range(k)] for i in range(k)]
    rows, _, pivots = rref(aug)
    if pivots[:k] != list(range(k)):
        raise ZeroDivisionError("singular matrix")
    return tuple(tuple(r[k:]) for r in rows)


def ldl_psd(P) -> bool:
    """Exact positive-semidefiniteness test by symmetric pivoting (LDL^T)."""
    M = [list(vec(r)) for r in P]
    k = len(M)
    if any(M[i][j] != M[j][i] for i in range(k) for j in range(k)):
        return False
    active = list(range(k))
    while active:
        # pick the largest diagonal pivot among remaining indices
        piv = max(active, key=lambda i: M[i][i])
        d = M[piv][piv]
        if d < 0:
            return False
        if d == 0:
            # zero diagonal: the whole row must vanish for PSD
            if any(M[piv][j] != 0 for j in active):
                return False
            active.remove(piv)
            continue
        active.remove(piv)
        for i in active:
            f = M[i][piv] / d
            if f:
                for j in active:
                    M[i][j] -= f * M[piv][j]
    return True


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------


class LPStatus(enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass(frozen=True)
class LPResult:
    """Outcome of :func:`lp_solve`.

    For ``maximize=True`` the dual ``y >= 0`` satisfies ``A^T y = c`` and
    ``<b, y> = optimum``.  For minimization it certifies the equivalent
    maximization of ``-c``: ``A^T y = -c`` and ``<b, y> = -optimum``.
    """

    status: LPStatus
    optimum: Rational | None = None
    primal: Vec | None = None
    dual: Vec | None = None
    pivots: int = field(default=0, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def lp_solve(c, A, b, maximize: bool = True, vertex: bool = True,
             max_pivots: int = 100_000) -> LPResult:
    """Solve ``max/min <c, x>`` subject to ``A x <= b`` with ``x`` free.

    Two-phase primal simplex with Bland's rule over exact rationals.  With
    ``vertex=True`` the optimal point is moved to a vertex of the optimal face
    whenever the feasible set is pointed.
    """
    c = vec(c)
    A = tuple(vec(r) for r in A)
    b = vec(b)
    n = len(c)
    m = len(A)
    if len(b) != m:
        raise DimensionMismatch(f"A has {m} rows but b has {len(b)} entries")
    if any(len(r) != n for r in A):
        raise DimensionMismatch(f"rows of A must have {n} columns")
    obj = c if maximize else neg(c)

    if m == 0:
        if any(obj):
            return LPResult(LPStatus.UNBOUNDED)
        return LPResult(LPStatus.OPTIMAL, ZERO, zeros(n), ())

    # columns: x+ (0..n-1), x- (n..2n-1), slacks (2n..2n+m-1), artificials
    ncol = 2 * n + m
    T = []
    rhs = []
    basis = []
    art_rows = []
    for i in range(m):
        sgn = -1 if b[i] < 0 else 1
        row = [ZERO] * ncol
        for j, a in enumerate(A[i]):
            if a:
                row[j] = sgn * a
                row[n + j] = -sgn * a
        row[2 * n + i] = Q(sgn)
        T.append(row)
        rhs.append(sgn * b[i])
        if sgn > 0:
            basis.append(2 * n + i)
        else:
            art_rows.append(i)
            basis.append(None)
    nart = len(art_rows)
    for k, i in enumerate(art_rows):
        for r in range(m):
            T[r].append(ONE if r == i else ZERO)
        basis[i] = ncol + k
    total = ncol + nart
    budget = [max_pivots]

    if nart:
        cost1 = [ZERO] * ncol + [Q(-1)] * nart
        status = _simplex(T, rhs, basis, cost1, total, budget, allowed=total)
        val = sum((cost1[basis[i]] * rhs[i] for i in range(m)), ZERO)
        if val < 0:
            return LPResult(LPStatus.INFEASIBLE, pivots=max_pivots - budget[0])
        # drive artificials out of the basis; always possible since the
        # slack columns give the equality system full row rank
        for i in range(m):
            if basis[i] >= ncol:
                j = next(j for j in range(ncol) if T[i][j] != 0)
                _pivot(T, rhs, basis, i, j)
        for r in T:
            del r[ncol:]
        total = ncol

    cost2 = list(obj) + list(neg(obj)) + [ZERO] * m
    status = _simplex(T, rhs, basis, cost2, total, budget, allowed=ncol)
    if status == "unbounded":
        return LPResult(LPStatus.UNBOUNDED, pivots=max_pivots - budget[0])

    xs = [ZERO] * ncol
    for i, j in enumerate(basis):
        xs[j] = rhs[i]
    x = tuple(xs[j] - xs[n + j] for j in range(n))
    # dual from the reduced costs of the slack columns
    y = _duals(T, basis, cost2, n, m)
    if vertex:
        x = _purify(A, b, obj, x)
    val = dot(c, x)
    return LPResult(LPStatus.OPTIMAL, val, x, y, pivots=max_pivots - budget[0])


def _pivot(T, rhs, basis, r, c):
    prow = T[r]
    piv = prow[c]
    if piv != 1:
        inv = 1 / piv
        prow = [a * inv if a else a for a in prow]
        T[r] = prow
        rhs[r] *= inv
    nz = [j for j, a in enumerate(prow) if a]
    for i, row in enumerate(T):
        if i != r:
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                rhs[i] -= f * rhs[r]
    basis[r] = c


def _simplex(T, rhs, basis, cost, total, budget, allowed):
    m = len(T)
    while True:
        # reduced costs d_j = c_j - sum_i c_B(i) T[i][j]
        cb = [cost[j] for j in basis]
        enter = None
        inb = set(basis)
        for j in range(allowed):
            if j in inb:
                continue
            d = cost[j]
            for i in range(m):
                t = T[i][j]
                if t and cb[i]:
                    d -= cb[i] * t
            if d > 0:
                enter = j
                break
        if enter is None:
            return "optimal"
        leave = None
        best = None
        for i in range(m):
            t = T[i][enter]
            if t > 0:
                ratio = rhs[i] / t
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            return "unbounded"
        budget[0] -= 1
        if budget[0] < 0:
            raise CyclingGuardExceeded("pivot budget exhausted")
        _pivot(T, rhs, basis, leave, enter)


def _duals(T, basis, cost, n, m):
    cb = [cost[j] for j in basis]
    y = []
    for i in range(m):
        j = 2 * n + i
        d = cost[j]
        for r in range(m):
            t = T[r][j]
            if t and cb[r]:
                d -= cb[r] * t
        y.append(-d)
    return tuple(y)


def _purify(A, b, obj, x):
    n = len(x)
    full_rank = rank(A)
    for _ in range(n + 1):
        tight = [i for i in range(len(A)) if dot(A[i], x) == b[i]]
        At = [A[i] for i in tight]
        if rank(At) == full_rank:
            return x
        d = None
        for cand in null_space(At, n):
            if any(dot(a, cand) != 0 for a in A):
                d = cand
                break
        if d is None:
            return x
        if not any(dot(a, d) > 0 for a in A):
            d = neg(d)
        step = None
        for i, a in enumerate(A):
            ad = dot(a, d)
            if ad > 0:
                t = (b[i] - dot(a, x)) / ad
                if step is None or t < step:
                    step = t
        x = add(x, scale(step, d))
    return x


def lp_feasible(A, b) -> Vec | None:
    """Return some point of ``{x: A x <= b}`` or None when it is empty."""
    n = len(A[0]) if A else 0
    res = lp_solve(zeros(n), A, b, vertex=False)
    return res.primal if res.optimal else None


def subsets_by_size(items, max_size: int | None = None):
    items = list(items)
    top = len(items) if max_size is None else min(max_size, len(items))
    for k in range(top + 1):
        yield from itertools.combinations(items, k)


# ---------------------------------------------------------------------------
# Convex quadratic programming
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QPResult:
    x: Vec
    active: tuple
    multipliers: Vec
    value: Rational


def qp_solve(H, g, A, b, hint: tuple | None = None) -> QPResult | None:
    """Minimize ``1/2 x^T H x + g^T x`` subject to ``A x <= b`` exactly.

    ``H`` must be positive semidefinite.  Active sets of linearly independent
    rows are enumerated (``hint`` first); for each one the KKT system is
    solved and accepted when primal and dual feasible, which certifies
    optimality for a convex problem.  When the KKT matrix is singular the
    KKT conditions for that active set are solved as an LP feasibility
    problem instead.  Returns None when the feasible set is empty; raises
    ValueError when the objective is unbounded below.
    """
    H = tuple(vec(r) for r in H)
    g = vec(g)
    A = tuple(vec(r) for r in A)
    b = vec(b)
    n = len(g)
    m = len(A)
    if any(len(r) != n for r in H) or len(H) != n:
        raise DimensionMismatch("H must be n x n")
    order = list(range(m))
    r = rank(A) if m else 0
    tried = set()
    candidates = []
    if hint is not None:
        candidates.append(tuple(hint))
    candidates.append(())
    for S in candidates:
        tried.add(S)
        got = _qp_try(H, g, A, b, S, n)
        if got is not None:
            return got
    for k in range(1, r + 1):
        for S in itertools.combinations(order, k):
            if S in tried:
                continue
            got = _qp_try(H, g, A, b, S, n)
            if got is not None:
                return got
    if m and lp_feasible(A, b) is None:
        return None
    raise ValueError("quadratic objective is unbounded below on the feasible set")


def _qp_value(H, g, x):
    return dot(x, matvec(H, x)) / 2 + dot(g, x)


def _qp_try(H, g, A, b, S, n):
    k = len(S)
    AS = [A[i] for i in S]
    if k and rank(AS) < k:
        return None
    K = [list(H[i]) + [AS[j][i] for j in range(k)] for i in range(n)]
    K += [list(AS[j]) + [ZERO] * k for j in range(k)]
    rhs = list(neg(g)) + [b[i] for i in S]
    sol = solve_linear(K, rhs, n + k)
    if sol.solution is None:
        return None
    if sol.rank == n + k:
        x = sol.solution[:n]
        mu = sol.solution[n:]
        if any(t < 0 for t in mu):
            return None
        if any(dot(a, x) > bi for a, bi in zip(A, b)):
            return None
        return QPResult(x, tuple(S), tuple(mu), _qp_value(H, g, x))
    # singular KKT: search the KKT polyhedron for a primal-dual feasible point
    rows, rr = [], []
    for row, t in zip(K, rhs):
        rows.append(tuple(row))
        rr.append(t)
        rows.append(neg(row))
        rr.append(-t)
    for a, bi in zip(A, b):
        rows.append(tuple(a) + (ZERO,) * k)
        rr.append(bi)
    for j in range(k):
        rows.append(tuple(-ONE if t == n + j else ZERO for t in range(n + k)))
        rr.append(ZERO)
    pt = lp_feasible(rows, rr)
    if pt is None:
        return None
    x = pt[:n]
    return QPResult(x, tuple(S), tuple(pt[n:]), _qp_value(H, g, x))
