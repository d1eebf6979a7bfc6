"""Shared builders for the test suite."""
import numpy as np

from bggseq.geometry import MetricJet, connection_of, curvature_package, geometry_catalog
from bggseq.graded_lie import build_graded_algebra
from bggseq.reps import parse_rep
from bggseq.twisted import TwistedContext


def make_package(flavor, geometry, n, order, **params):
    geom = geometry_catalog(geometry, n, order, **params)
    conn = connection_of(geom)
    metric = geom if isinstance(geom, MetricJet) else None
    return curvature_package(conn, flavor, metric)


def make_context(flavor, geometry, n, rep, order, **params):
    pkg = make_package(flavor, geometry, n, order, **params)
    return TwistedContext(parse_rep(build_graded_algebra(flavor, n), rep), pkg)


def radial_square(sp):
    """Jet of |x|^2."""
    return sum(sp.mul(sp.coordinate(i), sp.coordinate(i)) for i in range(sp.dim))
