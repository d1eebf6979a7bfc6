"""Chart-local curvature from jets of a metric or a torsion-free connection.

Tensors are numpy arrays whose trailing axis holds jet coefficients for a
single :class:`~bggseq.jets.JetSpace`.  Each object records ``valid``: the
jet order up to which its coefficients are exact.  Coefficients above that
order are meaningless and are never compared.

Index conventions: ``gamma[l, i, j]`` is the Christoffel symbol with upper
index ``l``; ``R[l, k, i, j]`` is the component of ``R(d_i, d_j) d_k`` along
``d_l``; ``ric[j, k]`` is ``Ric(d_j, d_k)``; ``Y[i, j, k]`` is ``Y(d_i, d_j)(d_k)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jets import JetSpace, jet_space

EXACT = 10**6  # validity marker for exactly known jets


class GeometryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MetricJet:
    space: JetSpace
    g: np.ndarray  # (n, n, size)
    valid: int
    name: str = "metric"

    @property
    def n(self) -> int:
        return self.space.dim

    @property
    def order(self) -> int:
        return min(self.valid, self.space.order)

    def entry(self, i, j):
        from .jets import Jet

        return Jet(self.n, self.order, self.g[i, j, : _ncoef(self.space, self.order)])


@dataclass(frozen=True, eq=False)
class ConnectionJet:
    space: JetSpace
    gamma: np.ndarray  # (n, n, n, size)
    density: np.ndarray  # (size,) volume density rho with nu = rho dx
    valid: int
    metric: MetricJet | None = None
    name: str = "connection"

    @property
    def n(self) -> int:
        return self.space.dim


@dataclass(frozen=True, eq=False)
class CurvaturePackage:
    flavor: str
    connection: ConnectionJet
    R: np.ndarray
    ric: np.ndarray
    sc: np.ndarray | None
    P: np.ndarray
    W: np.ndarray
    Y: np.ndarray
    valid: dict

    @property
    def space(self) -> JetSpace:
        return self.connection.space

    @property
    def n(self) -> int:
        return self.connection.n

    @property
    def metric(self):
        return self.connection.metric


def _ncoef(space, order):
    return math.comb(space.dim + order, space.dim)


def _partials(space: JetSpace, a: np.ndarray) -> np.ndarray:
    """Stack of all first partials along a new leading axis."""
    return np.array([space.partial(a, i) for i in range(space.dim)])


def christoffel_from_metric(m: MetricJet) -> ConnectionJet:
    if m.valid < 1:
        raise GeometryError("metric jet order exhausted: need order >= 1 for Christoffel symbols")
    sp = m.space
    ginv = sp.inv_matrix(m.g)
    dg = _partials(sp, m.g)  # dg[l, i, j] = d_l g_ij
    # lower[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    lower = dg + np.einsum("jil...->ijl...", dg) - np.einsum("lij...->ijl...", dg)
    gamma = 0.5 * sp.contract("kl,ijl->kij", ginv, lower)
    density = sp.sqrt(sp.det(m.g))
    return ConnectionJet(sp, gamma, density, m.valid - 1, metric=m, name=m.name)


def metricity_residual(c: ConnectionJet) -> float:
    """max |nabla g| over valid coefficients."""
    m = c.metric
    sp = c.space
    dg = _partials(sp, m.g)
    # (nabla_i g)_jk = d_i g_jk - Gamma^a_ij g_ak - Gamma^a_ik g_ja
    t1 = sp.contract("aij,ak->ijk", c.gamma, m.g)
    t2 = sp.contract("aik,ja->ijk", c.gamma, m.g)
    res = dg - t1 - t2
    return valid_norm(sp, res, c.valid)


def torsion_residual(c: ConnectionJet) -> float:
    return valid_norm(c.space, c.gamma - np.einsum("aji...->aij...", c.gamma), c.valid)


def volume_residual(c: ConnectionJet) -> float:
    """Trace of Gamma against d log(rho)."""
    sp = c.space
    trace = np.einsum("aia...->i...", c.gamma)
    dlog = _partials(sp, sp.log(c.density))
    return valid_norm(sp, trace - dlog, c.valid)


def valid_norm(space: JetSpace, a: np.ndarray, valid: int) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    mask = space.truncate_mask(min(valid, space.order))
    return float(np.abs(a[..., mask]).max())


def curvature_package(c: ConnectionJet, flavor: str, m: MetricJet | None = None) -> CurvaturePackage:
    sp = c.space
    n = c.n
    if flavor == "conformal":
        m = m if m is not None else c.metric
        if m is None:
            raise GeometryError("conformal curvature needs a metric")
        if n < 3:
            raise GeometryError("conformal Schouten tensor needs n >= 3")
    elif flavor != "projective":
        raise GeometryError(f"unknown flavor {flavor!r}")
    if c.valid < 1:
        raise GeometryError("connection jet order exhausted: need order >= 1 for curvature")
    gam = c.gamma
    dgam = _partials(sp, gam)  # dgam[i, l, j, k] = d_i Gamma^l_jk
    quad = sp.contract("lia,ajk->lkij", gam, gam)
    R = (np.einsum("iljk...->lkij...", dgam) - np.einsum("jlik...->lkij...", dgam)
         + quad - np.einsum("lkji...->lkij...", quad))
    v_r = c.valid - 1
    ric = np.einsum("ikij...->jk...", R)
    sc = None
    if flavor == "conformal":
        ginv = sp.inv_matrix(m.g)
        sc = sp.contract("jk,jk->", ginv, ric)
        P = (ric - sp.mul(sc[None, None], m.g) / (2 * (n - 1))) / (n - 2)
    else:
        P = ric / (n - 1)
    W = R - weyl_trace_terms(sp, P, flavor, m)
    # Y[i, j, k] = d_i P_jk - d_j P_ik - Gamma^a_ik P_ja + Gamma^a_jk P_ia
    dP = _partials(sp, P)
    t = sp.contract("aik,ja->ijk", gam, P)
    Y = dP - np.einsum("jik...->ijk...", dP) - t + np.einsum("jik...->ijk...", t)
    valid = {"R": v_r, "ric": v_r, "sc": v_r, "P": v_r, "W": v_r, "Y": v_r - 1}
    return CurvaturePackage(flavor, c, R, ric, sc, P, W, Y, valid)


def projective_curvature_package(c: ConnectionJet) -> CurvaturePackage:
    return curvature_package(c, "projective")


def bracket_tensor(sp: JetSpace, P: np.ndarray, flavor: str, m: MetricJet | None) -> np.ndarray:
    """B[l, k, i, j]: component along d_l of {d_i, P(d_j)}(d_k)."""
    n = sp.dim
    # P_jk delta^l_i + P_ji delta^l_k
    out = np.zeros((n, n, n, n, sp.size))
    for l in range(n):
        out[l, :, l, :] += np.transpose(P, (1, 0, 2))  # [k, j] <- P[j, k]
        out[l, l, :, :] += np.transpose(P, (1, 0, 2))  # [i, j] <- P[j, i]
    if flavor == "conformal":
        ginv = sp.inv_matrix(m.g)
        p_up = sp.contract("la,ja->jl", ginv, P)  # P_j^l
        out -= sp.mul(m.g[None, :, :, None], np.transpose(p_up, (1, 0, 2))[:, None, None, :])
    return out


def weyl_trace_terms(sp, P, flavor, m) -> np.ndarray:
    b = bracket_tensor(sp, P, flavor, m)
    return b - np.einsum("lkji...->lkij...", b)


# -- invariants -------------------------------------------------------

def bianchi_residual(pkg: CurvaturePackage) -> float:
    R = pkg.R
    # R^l_{kij} + R^l_{ijk} + R^l_{jki}
    cyc = R + np.einsum("lijk...->lkij...", R) + np.einsum("ljki...->lkij...", R)
    return valid_norm(pkg.space, cyc, pkg.valid["R"])


def weyl_trace_residual(pkg: CurvaturePackage) -> float:
    """Largest contraction of W (all contractions with the identity, and with g for conformal)."""
    sp, W = pkg.space, pkg.W
    traces = [np.einsum("llij...->ij...", W), np.einsum("lkil...->ki...", W), np.einsum("lklj...->kj...", W)]
    if pkg.flavor == "conformal":
        ginv = sp.inv_matrix(pkg.metric.g)
        # lower the upper index and contract k with i using g^{-1}
        w_low = sp.contract("al,lkij->akij", pkg.metric.g, W)
        traces.append(sp.contract("ki,akij->aj", ginv, w_low))
        traces.append(sp.contract("ak,akij->ij", ginv, w_low))
    return max(valid_norm(sp, t, pkg.valid["W"]) for t in traces)


def weyl_reassembly_residual(pkg: CurvaturePackage) -> float:
    rebuilt = pkg.W + weyl_trace_terms(pkg.space, pkg.P, pkg.flavor, pkg.metric)
    return valid_norm(pkg.space, pkg.R - rebuilt, pkg.valid["R"])


def ricci_symmetry_residual(pkg: CurvaturePackage) -> float:
    return valid_norm(pkg.space, pkg.ric - np.transpose(pkg.ric, (1, 0, 2)), pkg.valid["ric"])


def schouten_formula_residual(pkg: CurvaturePackage) -> float:
    """Conformal P against (1/(n-2)) Ric_0 + Sc g / (2n(n-1))."""
    sp, n = pkg.space, pkg.n
    g = pkg.metric.g
    ric0 = pkg.ric - sp.mul(pkg.sc[None, None], g) / n
    other = ric0 / (n - 2) + sp.mul(pkg.sc[None, None], g) / (2 * n * (n - 1))
    return valid_norm(sp, pkg.P - other, pkg.valid["P"])


# -- catalog ----------------------------------------------------------

def _metric(sp, g, name, valid=None):
    return MetricJet(sp, g, sp.order if valid is None else valid, name)


def flat_metric(n: int, order: int) -> MetricJet:
    sp = jet_space(n, order)
    return _metric(sp, sp.constant(np.eye(n)), "flat", EXACT)


def conformal_metric(n: int, order: int, phi: np.ndarray) -> MetricJet:
    """e^{2 phi} times the Euclidean metric, for a scalar jet ``phi``."""
    sp = jet_space(n, order)
    factor = sp.exp(2.0 * phi)
    return _metric(sp, np.eye(n)[:, :, None] * factor[None, None], "conformal")


def random_scalar(sp: JetSpace, seed: int, scale: float = 0.3, max_degree: int = 3) -> np.ndarray:
    """Jet of a random polynomial of bounded degree."""
    rng = np.random.default_rng(seed)
    terms = {a: scale * rng.standard_normal() for a in sp.indices if 0 < sum(a) <= max_degree}
    return sp.from_monomials(terms)


def _radial(n, order, sign, name):
    sp = jet_space(n, order)
    r2 = sum(sp.mul(sp.coordinate(i), sp.coordinate(i)) for i in range(n))
    base = sp.constant(1.0) + sign * r2
    factor = 4.0 * sp.power(base, -2.0)
    return _metric(sp, np.eye(n)[:, :, None] * factor[None, None], name)


def sphere_metric(n: int, order: int) -> MetricJet:
    return _radial(n, order, 1.0, "sphere")


def hyperbolic_metric(n: int, order: int) -> MetricJet:
    return _radial(n, order, -1.0, "hyperbolic")


def _random_symmetric_polys(sp, rng, degrees, scale):
    n = sp.dim
    h = sp.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            terms = {a: scale * rng.standard_normal() for a in sp.indices if sum(a) in degrees}
            h[i, j] = h[j, i] = sp.from_monomials(terms)
    return h


def perturbed_metric(n: int, order: int, eps: float, seed: int) -> MetricJet:
    """Euclidean metric plus eps times a random symmetric quadratic-plus-cubic field."""
    sp = jet_space(n, order)
    rng = np.random.default_rng(seed)
    h = _random_symmetric_polys(sp, rng, (2, 3), 1.0)
    g = sp.constant(np.eye(n)) + eps * h
    _check_positive(g)
    return _metric(sp, g, "perturbed")


def random_metric(n: int, order: int, seed: int, scale: float = 0.3) -> MetricJet:
    """Random positive definite constant part plus random linear, quadratic and cubic terms."""
    sp = jet_space(n, order)
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    g0 = a @ a.T / n + np.eye(n)
    g = sp.constant(g0) + _random_symmetric_polys(sp, rng, (1, 2, 3), scale)
    _check_positive(g)
    return _metric(sp, g, "random_metric")


def _check_positive(g):
    g0 = g[..., 0]
    if np.linalg.eigvalsh(g0).min() <= 0:
        raise GeometryError("metric perturbation is not positive definite at the basepoint")


def flat_affine(n: int, order: int) -> ConnectionJet:
    sp = jet_space(n, order)
    return ConnectionJet(sp, sp.zeros((n, n, n)), sp.constant(1.0), EXACT, name="flat_affine")


def random_affine(n: int, order: int, seed: int, scale: float = 0.3) -> ConnectionJet:
    """Random torsion-free connection with polynomial symbols, trace repaired so rho = 1 is parallel."""
    sp = jet_space(n, order)
    rng = np.random.default_rng(seed)
    gam = sp.zeros((n, n, n))
    for a in range(n):
        for i in range(n):
            for j in range(i, n):
                terms = {al: scale * rng.standard_normal() for al in sp.indices if sum(al) <= 2}
                gam[a, i, j] = gam[a, j, i] = sp.from_monomials(terms)
    tau = np.einsum("aia...->i...", gam)
    eye = np.eye(n)
    fix = np.einsum("ai,js->aijs", eye, tau) + np.einsum("aj,is->aijs", eye, tau)
    gam = gam - fix / (n + 1)
    return ConnectionJet(sp, gam, sp.constant(1.0), EXACT, name="random_affine")


def geometry_catalog(name: str, n: int, order: int, **params):
    """Named test geometries; returns a MetricJet or a ConnectionJet."""
    if name == "flat":
        return flat_metric(n, order)
    if name == "sphere":
        return sphere_metric(n, order)
    if name == "hyperbolic":
        return hyperbolic_metric(n, order)
    if name == "conformal":
        sp = jet_space(n, order)
        phi = params.get("phi")
        if phi is None:
            phi = random_scalar(sp, params.get("seed", 0), params.get("scale", 0.3))
        return conformal_metric(n, order, np.asarray(phi, float))
    if name == "perturbed":
        return perturbed_metric(n, order, params.get("eps", 0.1), params.get("seed", 0))
    if name == "random_metric":
        return random_metric(n, order, params.get("seed", 0), params.get("scale", 0.3))
    if name == "flat_affine":
        return flat_affine(n, order)
    if name == "random_affine":
        return random_affine(n, order, params.get("seed", 0), params.get("scale", 0.3))
    raise GeometryError(f"unknown geometry {name!r}")


CATALOG_NAMES = ("flat", "conformal", "sphere", "hyperbolic", "perturbed", "random_metric",
                 "flat_affine", "random_affine")


def connection_of(geom) -> ConnectionJet:
    if isinstance(geom, MetricJet):
        return christoffel_from_metric(geom)
    return geom
