"""Exact identifiability toolkit for polyhedral and piecewise linear-quadratic problems.

Everything is computed over exact rationals (``gmpy2.mpq``); floats appear
only in reported diagnostics.
"""
from .errors import IdkitError
from .identify import (
    Verdict,
    VerifierReport,
    graph_reduction_verify,
    identifiability_verify,
    minimal_identifiable_set,
    minimal_identifiable_set_composite,
    minimal_identifiable_set_f,
    minimal_identifiable_set_separable,
    multiplier_polytope,
    necessity_verify,
    strict_complementarity,
)
from .numerics import Q, parse_rational
from .polyhedra import Polyhedron, normal_cone, project, tangent_cone
from .functions import CompositeFunction, PLQFunction, PolyhedralFunction, PolyMap, prox, subdifferential

__version__ = "0.1.0"

__all__ = [
    "IdkitError", "Verdict", "VerifierReport", "graph_reduction_verify", "identifiability_verify",
    "minimal_identifiable_set", "minimal_identifiable_set_composite", "minimal_identifiable_set_f",
    "minimal_identifiable_set_separable", "multiplier_polytope", "necessity_verify",
    "strict_complementarity", "Q", "parse_rational", "Polyhedron", "normal_cone", "project",
    "tangent_cone", "CompositeFunction", "PLQFunction", "PolyhedralFunction", "PolyMap", "prox",
    "subdifferential", "__version__",
]
