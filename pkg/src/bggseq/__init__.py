"""Jet-level construction and certification of BGG sequences for conformal and projective structures."""

__version__ = "0.1.0"

from .graded_lie import build_graded_algebra
from .reps import parse_rep
from .hodge import hodge_split
from .geometry import geometry_catalog, curvature_package, connection_of
from .twisted import TwistedContext
from .bgg import bgg_operator, splitting_operator, operator_catalog

__all__ = [
    "__version__",
    "build_graded_algebra",
    "parse_rep",
    "hodge_split",
    "geometry_catalog",
    "curvature_package",
    "connection_of",
    "TwistedContext",
    "bgg_operator",
    "splitting_operator",
    "operator_catalog",
]
