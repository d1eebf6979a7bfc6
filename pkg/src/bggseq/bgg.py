"""Splitting operators, BGG operators and their certification on jets."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import EXACT, CurvaturePackage, MetricJet, curvature_package, connection_of, geometry_catalog, valid_norm
from .graded_lie import build_graded_algebra
from .hodge import hodge_split, harmonic_structure
from .reps import parse_rep
from .twisted import (OrderBudgetError, TwistedContext, VForm, covariant_derivative, curvature_actions,
                      curvature_defect_form, d_nabla, d_twisted, delta_form, delta_p_form, harmonic_projection,
                      homotopy_form, section_form, twisted_connection, zero_form)


class GradeMismatch(ValueError):
    """The closed-form formula does not apply to this grade displacement."""

    def __init__(self, actual_order: int):
        super().__init__(f"closed form not applicable; actual order is {actual_order}")
        self.actual_order = actual_order


# -- core operators ---------------------------------------------------------

def build_G(ctx: TwistedContext, phi: VForm) -> VForm:
    """Inverse of T d on im T, as the finite Neumann series in T (d - delta)."""
    term = homotopy_form(ctx, phi)
    total = term
    for _ in range(ctx.rep.top_grade + 1):
        if term.is_zero():
            break
        term = -homotopy_form(ctx, d_nabla(ctx, term) + delta_p_form(ctx, term))
        total = total + term
    else:
        if not term.is_zero():
            raise OrderBudgetError("series for G did not terminate")
    return total


def splitting_operator(ctx: TwistedContext, alpha: VForm) -> VForm:
    return alpha - build_G(ctx, d_twisted(ctx, alpha))


def bgg_operator(ctx: TwistedContext, alpha: VForm) -> VForm:
    return harmonic_projection(ctx, d_twisted(ctx, splitting_operator(ctx, alpha)))


def splitting_properties(ctx: TwistedContext, alpha: VForm) -> dict[str, float]:
    """Residuals of the three properties that characterize the splitting."""
    sp = ctx.space
    s = splitting_operator(ctx, alpha)
    ds = d_twisted(ctx, s)
    diff = s - alpha
    return {
        "T_of_S": homotopy_form(ctx, s).norm(sp) if s.k else 0.0,
        "S_minus_alpha_in_im_T": _im_t_defect(ctx, diff).norm(sp),
        "T_d_S": homotopy_form(ctx, ds).norm(sp),
    }


def _im_t_defect(ctx, x: VForm) -> VForm:
    # x lies in im T exactly when T(delta x) = x
    return homotopy_form(ctx, delta_form(ctx, x)) - x


def im_t_residual(ctx: TwistedContext, alpha: VForm) -> float:
    """Non-harmonic part of d S(alpha) lies in im T."""
    ds = d_twisted(ctx, splitting_operator(ctx, alpha))
    rest = ds - harmonic_projection(ctx, ds)
    return _im_t_defect(ctx, rest).norm(ctx.space)


def g_properties(ctx: TwistedContext, phi: VForm) -> dict[str, float]:
    sp = ctx.space
    g = build_G(ctx, phi)
    out = {"T_d_G_equals_T": (homotopy_form(ctx, d_twisted(ctx, g)) - homotopy_form(ctx, phi)).norm(sp)}
    out["G_in_im_T"] = _im_t_defect(ctx, g).norm(sp) if g.k >= 0 and g.c.size else 0.0
    return out


# -- closed forms ---------------------------------------------------------

def closed_form_bgg(ctx: TwistedContext, psi: VForm, order: int) -> VForm:
    """Order-one or order-two explicit formula for the BGG operator on psi."""
    k = psi.k
    actual = measured_displacement(ctx, k)
    if actual is None or actual != order:
        raise GradeMismatch(actual if actual is not None else -1)
    dpsi = d_nabla(ctx, psi)
    if order == 1:
        return dpsi - delta_form(ctx, homotopy_form(ctx, dpsi))
    if order == 2:
        inner = -d_nabla(ctx, homotopy_form(ctx, dpsi)) + delta_p_form(ctx, psi)
        return inner - delta_form(ctx, homotopy_form(ctx, inner)) - homotopy_form(ctx, delta_form(ctx, inner))
    raise ValueError("closed forms exist for orders 1 and 2 only")


def measured_displacement(ctx: TwistedContext, k: int) -> int | None:
    """Grade displacement plus one between single-grade harmonic spaces, if defined."""
    h = ctx.hodge
    if k + 1 > ctx.n:
        return None
    a, b = h.harmonic_grade_set(k), h.harmonic_grade_set(k + 1)
    if len(a) != 1 or len(b) != 1:
        return None
    return b[0] - a[0] + 1


def closed_form_residual(ctx: TwistedContext, k: int, trials: int, seed: int) -> float:
    order = measured_displacement(ctx, k)
    if order not in (1, 2):
        raise GradeMismatch(order if order is not None else -1)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        psi = ctx.random_harmonic(k, rng)
        worst = max(worst, (bgg_operator(ctx, psi) - closed_form_bgg(ctx, psi, order)).norm(ctx.space))
    return worst


# -- complex property -----------------------------------------------------

def _relative(num: float, den: float) -> float:
    return num / den if den > 0 else num


def complex_residual(ctx: TwistedContext, k: int, trials: int, seed: int) -> dict[str, float]:
    """Relative size of D D on random harmonic sections plus the chain-map defect."""
    if not 0 <= k <= ctx.n - 2:
        raise ValueError(f"D D needs 0 <= k <= n - 2, got {k}")
    sp = ctx.space
    rng = np.random.default_rng(seed)
    out = {"dd_relative": 0.0, "chain_map": 0.0, "dd_twisted_relative": 0.0}
    for _ in range(trials):
        alpha = ctx.random_harmonic(k, rng)
        d1 = bgg_operator(ctx, alpha)
        d2 = bgg_operator(ctx, d1)
        scale = alpha.norm(sp, strict=False) + d1.norm(sp)
        out["dd_relative"] = max(out["dd_relative"], _relative(d2.norm(sp), scale))
        chain = d_twisted(ctx, splitting_operator(ctx, alpha)) - splitting_operator(ctx, d1)
        out["chain_map"] = max(out["chain_map"], _relative(chain.norm(sp), scale))
        phi = ctx.random_form(k, rng)
        dd = d_twisted(ctx, d_twisted(ctx, phi))
        out["dd_twisted_relative"] = max(out["dd_twisted_relative"],
                                         _relative(dd.norm(sp), phi.norm(sp, strict=False)))
    return out


def defect_formula_residual(ctx: TwistedContext, k: int, trials: int, seed: int,
                            cotton_sign: float = 1.0, overall_sign: float = 1.0) -> dict[str, float]:
    """Compare d d on random k-forms with the Weyl/Cotton-York defect formula."""
    sp = ctx.space
    rng = np.random.default_rng(seed)
    ca = curvature_actions(ctx)
    out = {"dd_norm": 0.0, "residual": 0.0}
    for _ in range(trials):
        phi = ctx.random_form(k, rng)
        dd = d_twisted(ctx, d_twisted(ctx, phi))
        pred = curvature_defect_form(ctx, ca, phi, cotton_sign, overall_sign)
        out["dd_norm"] = max(out["dd_norm"], dd.norm(sp))
        out["residual"] = max(out["residual"], (dd - pred).norm(sp))
    return out


# -- normal solutions -----------------------------------------------------

def normality_check(ctx: TwistedContext, alpha: VForm) -> tuple[float, float]:
    """(|D alpha|, |twisted derivative of S alpha|) over surviving jet orders."""
    if alpha.k != 0:
        raise ValueError("normality is a degree-zero notion")
    sp = ctx.space
    s = splitting_operator(ctx, alpha)
    sol = bgg_operator(ctx, alpha).norm(sp)
    normal = max(twisted_connection(ctx, s, i).norm(sp) for i in range(ctx.n))
    return sol, normal


def scalar_section(ctx: TwistedContext, f: np.ndarray, valid: int) -> VForm:
    """Degree-zero section with lowest-grade component f (for one-dimensional lowest grade)."""
    if ctx.rep.grade_dims()[0] != 1:
        raise ValueError("lowest grade is not one-dimensional")
    return section_form(ctx, {0: f[None]}, valid)


def kernel_recovery_residual(ctx: TwistedContext, alpha: VForm) -> float:
    """phi = S(alpha) with d phi = 0 is recovered from its harmonic part."""
    phi = splitting_operator(ctx, alpha)
    back = splitting_operator(ctx, harmonic_projection(ctx, phi))
    return (phi - back).norm(ctx.space)


# -- operator orders ------------------------------------------------------

def _homogeneous_harmonic(ctx: TwistedContext, k: int, grade: int, degree: int, rng) -> VForm:
    sp = ctx.space
    ups = ctx.hodge.harmonic_block(k, grade)
    coeffs = np.zeros((ups.shape[1], sp.size))
    mask = sp.degree == degree
    coeffs[:, mask] = rng.standard_normal((ups.shape[1], int(mask.sum())))
    return ctx.harmonic_from_frame(k, coeffs, EXACT, grade)


def operator_order(ctx: TwistedContext, k: int, max_order: int = 4, seed: int = 0,
                   tol: float = 1e-9) -> dict[tuple[int, int], int]:
    """Highest input jet degree that reaches the basepoint value of each output component.

    Keys are (input grade, output grade) of harmonic components.
    """
    if max_order > ctx.space.order:
        raise OrderBudgetError(f"jet order {ctx.space.order} cannot hold inputs of degree {max_order}")
    rng = np.random.default_rng(seed)
    h = ctx.hodge
    out = {}
    for gin in h.harmonic_grade_set(k):
        for gout in h.harmonic_grade_set(k + 1):
            order = -1
            for m in range(0, max_order + 1):
                alpha = _homogeneous_harmonic(ctx, k, gin, m, rng)
                d = bgg_operator(ctx, alpha).grade_part(gout)
                if d.valid[gout] < 0:
                    raise OrderBudgetError(f"jet order too low to read degree {m}")
                scale = max(1.0, float(np.abs(alpha.c).max()))
                if np.abs(d.value_at_basepoint()).max() > tol * scale:
                    order = m
            out[(gin, gout)] = order
    return out


def uniqueness_margin(ctx: TwistedContext) -> list[float]:
    """Smallest singular value of T composed with delta, restricted to im T, per degree."""
    h = ctx.hodge
    margins = []
    for k in range(h.n):
        t = h.T(k + 1)  # C^{k+1} -> C^k
        if not t.size:
            margins.append(float("inf"))
            continue
        u, s, _ = np.linalg.svd(t, full_matrices=False)
        basis = u[:, s > 1e-10]
        if basis.shape[1] == 0:
            margins.append(float("inf"))
            continue
        op = t @ h.d(k) @ basis
        margins.append(float(np.linalg.svd(op, compute_uv=False).min()))
    return margins


# -- catalog --------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    name: str
    flavor: str
    rep: str
    n: int
    degree: int
    expected_order: int
    target: str
    target_dim: int | None = None
    sequence_orders: tuple = field(default=())


def _sym0_dim(n):
    return n * (n + 1) // 2 - 1


def operator_catalog() -> list[CatalogEntry]:
    n = 3
    return [
        CatalogEntry("conformal almost-Einstein", "conformal", "std", n, 0, 2,
                     "trace-free symmetric 2-tensors", _sym0_dim(n), (2,) + (1,) * (n - 2) + (2,)),
        CatalogEntry("conformal almost-Einstein n=4", "conformal", "std", 4, 0, 2,
                     "trace-free symmetric 2-tensors", _sym0_dim(4), (2, 1, 1, 2)),
        CatalogEntry("conformal Killing on vector fields", "conformal", "adjoint", n, 0, 1,
                     "trace-free symmetric 2-tensors", _sym0_dim(n), (1, 3, 1)),
        CatalogEntry("conformal Killing-Yano on 1-forms", "conformal", "alt(2,dual(std))", 4, 0, 1,
                     "kernel of the complete alternation", _sym0_dim(4), (1, 2, 2, 1)),
        CatalogEntry("conformal Killing-Yano on 2-forms", "conformal", "alt(3,dual(std))", 5, 0, 1,
                     "kernel of the complete alternation", 35, ()),
        CatalogEntry("projective Hessian", "projective", "dual(std)", n, 0, 2,
                     "symmetric 2-tensors", n * (n + 1) // 2, (2,) + (1,) * (n - 1)),
        CatalogEntry("projective divergence sequence", "projective", "std", n, 0, 1,
                     "trace-free endomorphisms", n * n - 1, (1,) * (n - 1) + (2,)),
        CatalogEntry("projective Killing on 1-forms", "projective", "alt(2,dual(std))", n, 0, 1,
                     "symmetric 2-tensors", n * (n + 1) // 2, (1, 2, 1)),
        CatalogEntry("projective Killing on symmetric tensors", "projective", "sym(2,std)", n, 0, 1,
                     "trace-free part of the covariant derivative", 15, (1, 1, 3)),
        CatalogEntry("projective symmetric dual", "projective", "sym(2,dual(std))", n, 0, 3,
                     "completely symmetric 3-tensors", n * (n + 1) * (n + 2) // 6, (3, 1, 1)),
    ]


def catalog_context(entry: CatalogEntry, order: int, seed: int = 0) -> TwistedContext:
    if entry.flavor == "conformal":
        geom = geometry_catalog("random_metric", entry.n, order, seed=seed)
    else:
        geom = geometry_catalog("random_affine", entry.n, order, seed=seed)
    conn = connection_of(geom)
    pkg = curvature_package(conn, entry.flavor, geom if isinstance(geom, MetricJet) else None)
    rep = parse_rep(build_graded_algebra(entry.flavor, entry.n), entry.rep)
    return TwistedContext(rep, pkg)


def sequence_orders(ctx: TwistedContext, max_order: int = 4, seed: int = 0) -> list[dict]:
    return [operator_order(ctx, k, max_order, seed) for k in range(ctx.n)]


def harmonic_target_dim(ctx: TwistedContext, k: int) -> int:
    return int(ctx.hodge.harmonic[k].shape[1])


# -- explicit formulas ------------------------------------------------------

def hessian_jets(ctx: TwistedContext, f: np.ndarray) -> np.ndarray:
    """Covariant Hessian of a scalar jet, (n, n, M)."""
    sp, gam = ctx.space, ctx.conn.gamma
    df = np.array([sp.partial(f, i) for i in range(ctx.n)])
    ddf = np.array([[sp.partial(df[j], i) for j in range(ctx.n)] for i in range(ctx.n)])
    return ddf - sp.contract("kij,k->ij", gam, df)


def std_ops_closed_form(ctx: TwistedContext, f: np.ndarray):
    """Splitting and first operator for the conformal standard representation.

    Returns the frame components (f, grad f, -(Delta + tr P) f / n) and the
    one-form with frame values tfp(Hess f + P f)(d_i, e_a).
    """
    sp, n = ctx.space, ctx.n
    g = ctx.pkg.metric.g
    ginv = sp.inv_matrix(g)
    fr = ctx.frame
    df = np.array([sp.partial(f, i) for i in range(n)])
    grad = sp.contract("ai,i->a", fr.coframe, sp.contract("ij,j->i", ginv, df))
    hess = hessian_jets(ctx, f)
    lap = sp.contract("ij,ij->", ginv, hess)
    trp = sp.contract("ij,ij->", ginv, ctx.pkg.P)
    top = -(lap + sp.mul(trp, f)) / n
    h = hess + sp.mul(f[None, None], ctx.pkg.P)
    trh = sp.contract("ij,ij->", ginv, h)
    tfp = h - sp.mul(trh[None, None], g) / n
    d = sp.contract("ij,ja->ia", tfp, fr.frame)
    return (f, grad, top), d


def projective_hessian_closed_form(ctx: TwistedContext, f: np.ndarray):
    sp, n = ctx.space, ctx.n
    fr = ctx.frame
    df = np.array([sp.partial(f, i) for i in range(n)])
    split = (f, sp.contract("ia,i->a", fr.frame, df))
    h = hessian_jets(ctx, f) + sp.mul(f[None, None], ctx.pkg.P)
    return split, sp.contract("ij,ja->ia", h, fr.frame)


def projective_divergence_closed_form(ctx: TwistedContext, eta_frame: np.ndarray):
    """nabla eta - (1/n) div(eta) id, frame values along coordinate slots, (n, n, M)."""
    sp, n = ctx.space, ctx.n
    fr, gam = ctx.frame, ctx.conn.gamma
    eta = sp.contract("ia,a->i", fr.frame, eta_frame)
    nab = np.array([[sp.partial(eta[l], i) for l in range(n)] for i in range(n)])  # [i, l]
    nab = nab + sp.contract("lim,m->il", gam, eta)
    div = sum(nab[i, i] for i in range(n))
    tf = nab - np.eye(n)[:, :, None] * div[None, None] / n
    return sp.contract("al,il->ia", fr.coframe, tf)


def one_form_frame_values(ctx: TwistedContext, form: VForm, grade: int) -> np.ndarray:
    """(n, dim grade, M) array of frame values on coordinate slots."""
    return form.c[:, ctx.rep.grade_slice(grade)]
