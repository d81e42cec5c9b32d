import pytest

from idkit.functions import PolyhedralFunction, make_univariate, PLQFunction
from idkit.numerics import Q, Rational
from idkit.polyhedra import Polyhedron


def qv(*xs):
    return tuple(Q(x) for x in xs)


@pytest.fixture
def orthant():
    return Polyhedron.orthant(2)


@pytest.fixture
def square():
    return Polyhedron.box([0, 0], [1, 1])


@pytest.fixture
def simplex2():
    # {x : x1 + x2 <= 1, x >= 0}
    return Polyhedron.from_rows([[1, 1], [-1, 0], [0, -1]], [1, 0, 0])


@pytest.fixture
def halfspace():
    return Polyhedron.from_rows([[1, 0]], [0])


@pytest.fixture
def mx2():
    return PolyhedralFunction.max_function(2)


@pytest.fixture
def mx3():
    return PolyhedralFunction.max_function(3)


@pytest.fixture
def absf():
    return PolyhedralFunction.abs()


def abs_plus_quad(c=Rational(1, 2)):
    """``|x1| + c x2^2`` as a separable PLQ."""
    u1 = make_univariate([0], [(0, -1, 0), (0, 1, 0)])
    u2 = make_univariate([], [(2 * Q(c), 0, 0)])
    return PLQFunction.separable([u1, u2])


def abs_plq():
    return PLQFunction.separable([make_univariate([0], [(0, -1, 0), (0, 1, 0)])])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
