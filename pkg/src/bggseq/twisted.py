"""Bundle-valued forms on a chart and the covariant calculus acting on them.

Sections are expressed in an adapted frame (orthonormal for the conformal
flavor, unimodular for the projective one) so that the representation
matrices act verbatim.  Form slots stay indexed by coordinate directions.

Every :class:`VForm` carries, per representation grade, the jet order up to
which that grade block is exact.  Derivatives lower it by one, products take
the minimum, and blocks that are structurally zero are marked ``EXACT``.
Residual norms only read coefficients inside the recorded validity.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .graded_lie import phi_to_g0_map
from .geometry import EXACT, ConnectionJet, CurvaturePackage, MetricJet, valid_norm
from .hodge import HodgeDecomposition, hodge_split, sort_sign, subsets
from .jets import JetSpace
from .reps import GradedRep


class OrderBudgetError(RuntimeError):
    """Raised when a quantity is needed at a jet order that no longer survives."""


class FlavorMismatch(ValueError):
    pass


def _lower(v, by=1):
    return v if v >= EXACT // 2 else v - by


# -- frames -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrameData:
    flavor: str
    space: JetSpace
    frame: np.ndarray  # (n, n, M); columns are frame vectors in coordinates
    coframe: np.ndarray  # inverse of frame
    omega: np.ndarray  # (n, n, n, M); omega[i] is the connection matrix along d_i
    valid_frame: int
    valid_omega: int

    @property
    def n(self) -> int:
        return self.space.dim


def _gram_schmidt(sp: JetSpace, g: np.ndarray) -> np.ndarray:
    n = sp.dim
    cols = []
    for a in range(n):
        v = sp.constant(np.eye(n)[:, a])
        for f in cols:
            proj = sp.contract("i,i->", sp.contract("ij,j->i", g, f), v)
            v = v - sp.mul(proj[None], f)
        norm2 = sp.contract("i,i->", sp.contract("ij,j->i", g, v), v)
        v = sp.mul(sp.power(norm2, -0.5)[None], v)
        cols.append(v)
    return np.stack(cols, axis=1)


def build_frame(conn: ConnectionJet, flavor: str) -> FrameData:
    sp, n = conn.space, conn.n
    if conn.valid < 0:
        raise OrderBudgetError("connection jet order exhausted")
    if flavor == "conformal":
        if conn.metric is None:
            raise FlavorMismatch("conformal frames need a metric")
        frame = _gram_schmidt(sp, conn.metric.g)
        valid_frame = conn.metric.valid
    elif flavor == "projective":
        scale = sp.power(conn.density, -1.0 / n)
        frame = np.eye(n)[:, :, None] * scale[None, None]
        valid_frame = conn.metric.valid if conn.metric is not None else _density_valid(conn)
    else:
        raise FlavorMismatch(f"unknown flavor {flavor!r}")
    coframe = sp.inv_matrix(frame)
    omega = np.zeros((n, n, n, sp.size))
    for i in range(n):
        gam_i = conn.gamma[:, i, :]  # (Gamma_i)[l, m] = Gamma^l_{i m}
        inner = sp.partial(frame, i) + sp.matmul(gam_i, frame)
        omega[i] = sp.matmul(coframe, inner)
    valid_omega = min(_lower(valid_frame), conn.valid)
    return FrameData(flavor, sp, frame, coframe, omega, valid_frame, valid_omega)


def _density_valid(conn: ConnectionJet) -> int:
    # a parallel density is determined by the connection one order higher
    return conn.valid if conn.valid >= EXACT // 2 else conn.valid + 1


def frame_orthonormality_residual(fr: FrameData, m: MetricJet) -> float:
    sp = fr.space
    gram = sp.matmul(np.einsum("iam->aim", fr.frame), sp.matmul(m.g, fr.frame))
    return valid_norm(sp, gram - sp.constant(np.eye(fr.n)), fr.valid_frame)


def connection_form_skew_residual(fr: FrameData) -> float:
    return valid_norm(fr.space, fr.omega + np.einsum("iabm->ibam", fr.omega), fr.valid_omega)


def connection_form_trace_residual(fr: FrameData) -> float:
    return valid_norm(fr.space, np.einsum("iaam->im", fr.omega), fr.valid_omega)


# -- forms --------------------------------------------------------------

@dataclass(eq=False)
class VForm:
    rep: GradedRep
    k: int
    c: np.ndarray  # (C(n, k), dim V, M)
    valid: np.ndarray  # (top grade + 1,) int

    def __post_init__(self):
        self.valid = np.asarray(self.valid, dtype=np.int64)

    @property
    def n(self) -> int:
        return self.rep.alg.n

    def copy(self) -> "VForm":
        return VForm(self.rep, self.k, self.c.copy(), self.valid.copy())

    def __add__(self, other: "VForm") -> "VForm":
        _check_compatible(self, other)
        return VForm(self.rep, self.k, self.c + other.c, np.minimum(self.valid, other.valid))

    def __sub__(self, other: "VForm") -> "VForm":
        _check_compatible(self, other)
        return VForm(self.rep, self.k, self.c - other.c, np.minimum(self.valid, other.valid))

    def __neg__(self) -> "VForm":
        return VForm(self.rep, self.k, -self.c, self.valid.copy())

    def scale(self, s: float) -> "VForm":
        return VForm(self.rep, self.k, s * self.c, self.valid.copy())

    def is_zero(self) -> bool:
        return not np.any(self.c)

    def grade_part(self, j: int) -> "VForm":
        out = np.zeros_like(self.c)
        idx = self.rep.grade_slice(j)
        out[:, idx] = self.c[:, idx]
        valid = np.full_like(self.valid, EXACT)
        valid[j] = self.valid[j]
        return VForm(self.rep, self.k, out, valid)

    def surviving_order(self, space: JetSpace) -> int:
        live = [int(v) for j, v in enumerate(self.valid) if np.any(self.c[:, self.rep.grade_slice(j)])]
        return min(min(live, default=space.order), space.order)

    def norm(self, space: JetSpace, grades=None, strict: bool = True) -> float:
        """Max coefficient over valid coefficients of the given grades."""
        worst = 0.0
        for j in range(len(self.valid)):
            if grades is not None and j not in grades:
                continue
            block = self.c[:, self.rep.grade_slice(j)]
            if block.size == 0:
                continue
            v = int(self.valid[j])
            if v < 0:
                if strict and np.any(block):
                    raise OrderBudgetError(f"grade {j} block has no surviving jet order")
                continue
            worst = max(worst, valid_norm(space, block, v))
        return worst

    def value_at_basepoint(self) -> np.ndarray:
        return self.c[..., 0]


def _check_compatible(a: VForm, b: VForm):
    if a.k != b.k or a.rep is not b.rep:
        raise ValueError("forms of different degree or representation")


def zero_form(rep: GradedRep, k: int, space: JetSpace) -> VForm:
    return VForm(rep, k, np.zeros((math.comb(rep.alg.n, k), rep.dim, space.size)),
                 np.full(rep.top_grade + 1, EXACT))


def random_form(rep: GradedRep, k: int, space: JetSpace, rng: np.random.Generator,
                grades=None, valid: int | None = None) -> VForm:
    valid = space.order if valid is None else valid
    c = rng.standard_normal((math.comb(rep.alg.n, k), rep.dim, space.size))
    v = np.full(rep.top_grade + 1, valid)
    if grades is not None:
        for j in range(rep.top_grade + 1):
            if j not in grades:
                c[:, rep.grade_slice(j)] = 0.0
                v[j] = EXACT
    return VForm(rep, k, c, v)


# -- context ------------------------------------------------------------

class TwistedContext:
    """Everything needed to differentiate forms with values in one representation."""

    def __init__(self, rep: GradedRep, pkg: CurvaturePackage, frame: FrameData | None = None,
                 hodge: HodgeDecomposition | None = None):
        if pkg.flavor != rep.alg.kind:
            raise FlavorMismatch(f"{pkg.flavor} curvature with a {rep.alg.kind} representation")
        self.rep = rep
        self.alg = rep.alg
        self.pkg = pkg
        self.conn = pkg.connection
        self.space = pkg.space
        self.n = self.alg.n
        if self.conn.n != self.n:
            raise ValueError("geometry and algebra dimensions differ")
        self.frame = frame if frame is not None else build_frame(self.conn, pkg.flavor)
        self.hodge = hodge if hodge is not None else hodge_split(rep)
        sp, fr = self.space, self.frame
        # X_i = sum_a coframe[a, i] rho(X_a)
        self.x_ops = np.einsum("aim,ade->idem", fr.coframe, rep.x_action)
        # P(d_i) = sum_a (P F)[i, a] e^a acting through rho(Z_a), with the sign it
        # carries inside the twisted connection
        pf = sp.matmul(pkg.P, fr.frame)
        self.p_ops = -np.einsum("iam,ade->idem", pf, rep.z_action)
        g0map = _g0_map(self.alg)
        om = fr.omega.reshape(self.n, self.n * self.n, sp.size)
        coeffs = np.einsum("cq,iqm->icm", g0map, om)
        self.omega_ops = np.einsum("icm,cde->idem", coeffs, rep.g0_action)
        self.valid_x = fr.valid_frame
        self.valid_z = min(fr.valid_frame, pkg.valid["P"])
        self.valid_omega = fr.valid_omega
        self._minors = {}

    # -- pointwise helpers ------------------------------------------------
    def act(self, mat: np.ndarray, c: np.ndarray) -> np.ndarray:
        """Jet matrix (d, d, M) acting on form coefficients (S, d, M)."""
        return self.space.contract("de,se->sd", mat, c)

    def shifted_valid(self, valid: np.ndarray, shift: int, op_valid: int) -> np.ndarray:
        top = len(valid) - 1
        out = np.full_like(valid, EXACT)
        for j in range(top + 1):
            src = j - shift
            if 0 <= src <= top and valid[src] < EXACT:
                out[j] = min(int(valid[src]), op_valid)
            elif 0 <= src <= top:
                out[j] = min(EXACT, op_valid) if op_valid < EXACT // 2 else EXACT
        return out

    # -- frame slot conversion ---------------------------------------------
    def minors(self, k: int):
        if k not in self._minors:
            sp = self.space
            subs = subsets(self.n, k)
            to_frame = np.zeros((len(subs), len(subs), sp.size))
            to_coord = np.zeros_like(to_frame)
            for p, a in enumerate(subs):
                for q, j in enumerate(subs):
                    # phi_A = sum_J det(F[J, A]) phi_J
                    to_frame[p, q] = sp.det(self.frame.frame[np.ix_(j, a)])
                    to_coord[q, p] = sp.det(self.frame.coframe[np.ix_(a, j)])
            self._minors[k] = (to_frame, to_coord)
        return self._minors[k]

    def to_frame_slots(self, f: VForm) -> VForm:
        if f.k == 0:
            return f
        tf, _ = self.minors(f.k)
        c = _slot_mix(self.space, tf, f.c)
        valid = np.array([min(int(v), self.frame.valid_frame) if v < EXACT // 2 else
                          (EXACT if self.frame.valid_frame >= EXACT // 2 else self.frame.valid_frame)
                          for v in f.valid])
        valid = _exact_blocks(f, valid)
        return VForm(f.rep, f.k, c, valid)

    def to_coord_slots(self, f: VForm) -> VForm:
        if f.k == 0:
            return f
        _, tc = self.minors(f.k)
        c = _slot_mix(self.space, tc, f.c)
        valid = np.array([min(int(v), self.frame.valid_frame) if v < EXACT // 2 else
                          (EXACT if self.frame.valid_frame >= EXACT // 2 else self.frame.valid_frame)
                          for v in f.valid])
        valid = _exact_blocks(f, valid)
        return VForm(f.rep, f.k, c, valid)

    # -- random inputs -------------------------------------------------
    def random_form(self, k, rng, grades=None, valid=None) -> VForm:
        return random_form(self.rep, k, self.space, rng, grades, valid)

    def random_harmonic(self, k: int, rng, grade: int | None = None, valid: int | None = None) -> VForm:
        """Random section of the harmonic subbundle (or of one grade component)."""
        sp = self.space
        ups = self.hodge.harmonic[k]
        if grade is not None:
            ups = self.hodge.harmonic_block(k, grade)
        valid = sp.order if valid is None else valid
        coeffs = rng.standard_normal((ups.shape[1], sp.size))
        flat = ups @ coeffs  # (S * d, M)
        c = flat.reshape(math.comb(self.n, k), self.rep.dim, sp.size)
        v = np.full(self.rep.top_grade + 1, EXACT)
        for g in set(self.hodge.harmonic_grades[k].tolist()) if grade is None else {grade}:
            v[g] = valid
        return self.to_coord_slots(VForm(self.rep, k, c, v))

    def harmonic_from_frame(self, k: int, coeffs: np.ndarray, valid: int, grade: int | None = None) -> VForm:
        ups = self.hodge.harmonic[k] if grade is None else self.hodge.harmonic_block(k, grade)
        flat = ups @ coeffs
        c = flat.reshape(math.comb(self.n, k), self.rep.dim, self.space.size)
        v = np.full(self.rep.top_grade + 1, EXACT)
        grades = self.hodge.harmonic_grades[k] if grade is None else [grade]
        for g in set(np.asarray(grades).tolist()):
            v[g] = valid
        return self.to_coord_slots(VForm(self.rep, k, c, v))


def _exact_blocks(f: VForm, valid: np.ndarray) -> np.ndarray:
    out = valid.copy()
    for j in range(len(out)):
        if not np.any(f.c[:, f.rep.grade_slice(j)]):
            out[j] = EXACT
    return out


def _slot_mix(sp: JetSpace, mix: np.ndarray, c: np.ndarray) -> np.ndarray:
    # out[p, d] = sum_q mix[p, q] * c[q, d] as jets
    return sp.contract("pq,qd->pd", mix, c)


def _g0_map(alg):
    return phi_to_g0_map(alg)


# -- operators on forms ---------------------------------------------------

def _wedge_positions(n: int, k: int):
    """For each (k+1)-subset J and slot t: (t, position of J without j_t, j_t)."""
    src = {s: i for i, s in enumerate(subsets(n, k))}
    out = []
    for p, J in enumerate(subsets(n, k + 1)):
        for t, j in enumerate(J):
            out.append((p, t, src[J[:t] + J[t + 1 :]], j))
    return out


def _pointwise_exterior(ctx: TwistedContext, f: VForm, ops: np.ndarray, shift: int, op_valid: int) -> VForm:
    """(Op phi)_J = sum_t (-1)^t op_{j_t} phi_{J without j_t} for jet matrices op_i."""
    sp, n = ctx.space, ctx.n
    out = np.zeros((math.comb(n, f.k + 1), f.rep.dim, sp.size))
    if f.k < n:
        for p, t, q, j in _wedge_positions(n, f.k):
            out[p] += (-1) ** t * sp.contract("de,e->d", ops[j], f.c[q])
    valid = ctx.shifted_valid(f.valid, shift, op_valid)
    res = VForm(f.rep, f.k + 1, out, valid)
    res.valid = _exact_blocks(res, res.valid)
    return res


def delta_form(ctx: TwistedContext, f: VForm) -> VForm:
    """Algebraic differential: alternating action of the slot vectors."""
    return _pointwise_exterior(ctx, f, ctx.x_ops, -1, ctx.valid_x)


def delta_p_form(ctx: TwistedContext, f: VForm) -> VForm:
    """Schouten part of the twisted exterior derivative.

    Alternating action of -P(slot vector), so that the twisted derivative is
    the plain one plus ``delta_form`` plus this operator.
    """
    return _pointwise_exterior(ctx, f, ctx.p_ops, +1, ctx.valid_z)


def d_nabla(ctx: TwistedContext, f: VForm) -> VForm:
    """Covariant exterior derivative of the frame-induced connection."""
    sp, n = ctx.space, ctx.n
    out = np.zeros((math.comb(n, f.k + 1), f.rep.dim, sp.size))
    if f.k < n:
        for p, t, q, j in _wedge_positions(n, f.k):
            term = sp.partial(f.c[q], j) + sp.contract("de,e->d", ctx.omega_ops[j], f.c[q])
            out[p] += (-1) ** t * term
    valid = np.array([_lower(int(v)) if v < EXACT // 2 else EXACT for v in f.valid])
    valid = np.minimum(valid, np.where(f.valid < EXACT // 2, ctx.valid_omega, EXACT))
    res = VForm(f.rep, f.k + 1, out, valid)
    res.valid = _exact_blocks(res, res.valid)
    return res


def d_twisted(ctx: TwistedContext, f: VForm) -> VForm:
    """Covariant exterior derivative of the twisted connection."""
    return d_nabla(ctx, f) + delta_form(ctx, f) + delta_p_form(ctx, f)


def d_twisted_direct(ctx: TwistedContext, f: VForm) -> VForm:
    """Same operator, assembled from the full twisted connection matrices."""
    sp, n = ctx.space, ctx.n
    a_ops = ctx.omega_ops + ctx.x_ops + ctx.p_ops
    out = np.zeros((math.comb(n, f.k + 1), f.rep.dim, sp.size))
    if f.k < n:
        for p, t, q, j in _wedge_positions(n, f.k):
            out[p] += (-1) ** t * (sp.partial(f.c[q], j) + sp.contract("de,e->d", a_ops[j], f.c[q]))
    valid = np.minimum(np.minimum(d_nabla(ctx, f).valid, delta_form(ctx, f).valid), delta_p_form(ctx, f).valid)
    return VForm(f.rep, f.k + 1, out, valid)


def _constant_op(ctx: TwistedContext, f: VForm, mats, k_out: int, shift: int) -> VForm:
    fr = ctx.to_frame_slots(f)
    flat = fr.c.reshape(-1, ctx.space.size)
    out = (mats @ flat).reshape(math.comb(ctx.n, k_out), f.rep.dim, ctx.space.size)
    valid = ctx.shifted_valid(fr.valid, shift, EXACT)
    res = VForm(f.rep, k_out, out, valid)
    res.valid = _exact_blocks(res, res.valid)
    return ctx.to_coord_slots(res)


def homotopy_form(ctx: TwistedContext, f: VForm) -> VForm:
    """Fiberwise partial inverse of the algebraic differential (degree k to k-1)."""
    if f.k == 0:
        return VForm(f.rep, 0, np.zeros((0, f.rep.dim, ctx.space.size)), np.full_like(f.valid, EXACT))
    return _constant_op(ctx, f, ctx.hodge.T(f.k), f.k - 1, +1)


def harmonic_projection(ctx: TwistedContext, f: VForm) -> VForm:
    return _constant_op(ctx, f, ctx.hodge.projector[f.k], f.k, 0)


def delta_form_constant(ctx: TwistedContext, f: VForm) -> VForm:
    """Algebraic differential applied in frame slots with the constant matrix."""
    return _constant_op(ctx, f, ctx.hodge.d(f.k), f.k + 1, -1)


def algebraic_form_ops(ctx: TwistedContext, f: VForm, which: str) -> VForm:
    if which == "del":
        return delta_form(ctx, f)
    if which == "delP":
        return delta_p_form(ctx, f)
    if which == "T":
        return homotopy_form(ctx, f)
    if which == "proj_harmonic":
        return harmonic_projection(ctx, f)
    raise ValueError(f"unknown algebraic operation {which!r}")


def covariant_exterior_derivative(ctx: TwistedContext, f: VForm, mode: str = "plain") -> VForm:
    if mode == "plain":
        return d_nabla(ctx, f)
    if mode == "twisted":
        return d_twisted(ctx, f)
    raise ValueError(f"unknown mode {mode!r}")


# -- sections -------------------------------------------------------------

def covariant_derivative(ctx: TwistedContext, s: VForm, i: int) -> VForm:
    """nabla_i s for a degree-0 form."""
    return _directional(ctx, s, i, twisted=False)


def twisted_connection(ctx: TwistedContext, s: VForm, i: int) -> VForm:
    return _directional(ctx, s, i, twisted=True)


def action_connection(ctx: TwistedContext, s: VForm, i: int) -> VForm:
    """nabla_i s plus the action of d_i (no Schouten term)."""
    out = _directional(ctx, s, i, twisted=False)
    return out + _pointwise(ctx, s, ctx.x_ops[i], -1, ctx.valid_x)


def _pointwise(ctx, s: VForm, mat, shift, op_valid) -> VForm:
    c = np.array([ctx.space.contract("de,e->d", mat, s.c[q]) for q in range(s.c.shape[0])])
    c = c.reshape(s.c.shape)
    res = VForm(s.rep, s.k, c, ctx.shifted_valid(s.valid, shift, op_valid))
    res.valid = _exact_blocks(res, res.valid)
    return res


def _directional(ctx, s: VForm, i: int, twisted: bool) -> VForm:
    if s.k != 0:
        raise ValueError("directional derivatives act on sections (degree 0)")
    sp = ctx.space
    base = sp.partial(s.c, i)
    deriv = VForm(s.rep, 0, base, np.array([_lower(int(v)) if v < EXACT // 2 else EXACT for v in s.valid]))
    out = deriv + _pointwise(ctx, s, ctx.omega_ops[i], 0, ctx.valid_omega)
    if twisted:
        out = out + _pointwise(ctx, s, ctx.x_ops[i], -1, ctx.valid_x)
        out = out + _pointwise(ctx, s, ctx.p_ops[i], +1, ctx.valid_z)
    out.valid = _exact_blocks(out, out.valid)
    return out


def section_form(ctx: TwistedContext, parts: dict[int, np.ndarray], valid: int) -> VForm:
    """Degree-0 form from per-grade frame components ``{grade: (dim_j, M)}``."""
    rep = ctx.rep
    c = np.zeros((1, rep.dim, ctx.space.size))
    v = np.full(rep.top_grade + 1, EXACT)
    for j, comp in parts.items():
        c[0, rep.grade_slice(j)] = comp
        v[j] = valid
    return VForm(rep, 0, c, v)


# -- curvature actions ------------------------------------------------------

@dataclass(eq=False)
class CurvatureActions:
    weyl: np.ndarray  # (n, n, d, d, M): rho(W(d_i, d_j)) in the frame
    cotton: np.ndarray  # (n, n, d, d, M): rho(Y(d_i, d_j))
    riemann: np.ndarray  # (n, n, d, d, M): rho(R(d_i, d_j))
    valid_w: int
    valid_y: int
    valid_r: int


def curvature_actions(ctx: TwistedContext) -> CurvatureActions:
    sp, n, rep, alg = ctx.space, ctx.n, ctx.rep, ctx.alg
    fr, pkg = ctx.frame, ctx.pkg
    g0map = _g0_map(alg)

    def endo_action(tensor):  # tensor[l, k, i, j] -> rho of frame endomorphism per (i, j)
        # frame endomorphism: coframe @ T(d_i, d_j) @ frame
        out = np.zeros((n, n, rep.dim, rep.dim, sp.size))
        for i in range(n):
            for j in range(n):
                e = sp.matmul(fr.coframe, sp.matmul(tensor[:, :, i, j], fr.frame))
                coeffs = np.einsum("cq,qm->cm", g0map, e.reshape(n * n, sp.size))
                out[i, j] = np.einsum("cm,cde->dem", coeffs, rep.g0_action)
        return out

    weyl = endo_action(pkg.W)
    riemann = endo_action(pkg.R)
    cotton = np.zeros((n, n, rep.dim, rep.dim, sp.size))
    yf = sp.contract("ijk,ka->ija", pkg.Y, fr.frame)
    for i in range(n):
        for j in range(n):
            cotton[i, j] = np.einsum("am,ade->dem", yf[i, j], rep.z_action)
    vf = fr.valid_frame
    return CurvatureActions(weyl, cotton, riemann, min(pkg.valid["W"], vf), min(pkg.valid["Y"], vf),
                            min(pkg.valid["R"], vf))


def _commutator_of(ctx, deriv, s, i, j):
    a = deriv(ctx, deriv(ctx, s, j), i)
    b = deriv(ctx, deriv(ctx, s, i), j)
    return a - b


def twisted_curvature_on(ctx: TwistedContext, s: VForm, i: int, j: int) -> VForm:
    """R(d_i, d_j) s of the twisted connection, from second derivatives."""
    return _commutator_of(ctx, twisted_connection, s, i, j)


def predicted_twisted_curvature(ctx: TwistedContext, ca: CurvatureActions, s: VForm, i: int, j: int,
                                cotton_sign: float = 1.0) -> VForm:
    w = _pointwise(ctx, s, ca.weyl[i, j], 0, ca.valid_w)
    y = _pointwise(ctx, s, ca.cotton[i, j], +1, ca.valid_y)
    return w + y.scale(cotton_sign)


def twisted_curvature_residual(ctx: TwistedContext, trials: int, seed: int) -> dict[str, float]:
    """Compare the curvature of the twisted connection with Weyl and Cotton-York actions.

    Reports the residual against W + Y and against W - Y, the grade-by-grade
    components, and the size of the curvature itself.
    """
    rng = np.random.default_rng(seed)
    ca = curvature_actions(ctx)
    sp = ctx.space
    out = {"residual_w_plus_y": 0.0, "residual_w_minus_y": 0.0, "curvature_norm": 0.0,
           "grade_minus2": 0.0, "grade_minus1": 0.0, "grade_plus2": 0.0,
           "grade_plus1_vs_y": 0.0, "grade_plus1_vs_minus_y": 0.0}
    surviving = sp.order
    for _ in range(trials):
        for i, j in itertools.combinations(range(ctx.n), 2):
            s = ctx.random_form(0, rng)
            lhs = twisted_curvature_on(ctx, s, i, j)
            plus = predicted_twisted_curvature(ctx, ca, s, i, j, 1.0)
            minus = predicted_twisted_curvature(ctx, ca, s, i, j, -1.0)
            out["residual_w_plus_y"] = max(out["residual_w_plus_y"], (lhs - plus).norm(sp))
            out["residual_w_minus_y"] = max(out["residual_w_minus_y"], (lhs - minus).norm(sp))
            out["curvature_norm"] = max(out["curvature_norm"], lhs.norm(sp))
            surviving = min(surviving, (lhs - plus).surviving_order(sp))
            # grade bookkeeping on a single-grade section
            for g in range(ctx.rep.top_grade + 1):
                sg = s.grade_part(g)
                r = twisted_curvature_on(ctx, sg, i, j)
                y = _pointwise(ctx, sg, ca.cotton[i, j], +1, ca.valid_y)
                for shift, key in ((-2, "grade_minus2"), (-1, "grade_minus1"), (2, "grade_plus2")):
                    tgt = g + shift
                    if 0 <= tgt <= ctx.rep.top_grade:
                        out[key] = max(out[key], r.grade_part(tgt).norm(sp))
                tgt = g + 1
                if tgt <= ctx.rep.top_grade:
                    out["grade_plus1_vs_y"] = max(out["grade_plus1_vs_y"],
                                                  (r.grade_part(tgt) - y.grade_part(tgt)).norm(sp))
                    out["grade_plus1_vs_minus_y"] = max(out["grade_plus1_vs_minus_y"],
                                                        (r.grade_part(tgt) + y.grade_part(tgt)).norm(sp))
    out["surviving_order"] = surviving
    return out


def riemann_action_residual(ctx: TwistedContext, trials: int, seed: int) -> float:
    """[nabla_i, nabla_j] s against rho(R(d_i, d_j)) s."""
    rng = np.random.default_rng(seed)
    ca = curvature_actions(ctx)
    worst = 0.0
    for _ in range(trials):
        for i, j in itertools.combinations(range(ctx.n), 2):
            s = ctx.random_form(0, rng)
            lhs = _commutator_of(ctx, covariant_derivative, s, i, j)
            rhs = _pointwise(ctx, s, ca.riemann[i, j], 0, ca.valid_r)
            worst = max(worst, (lhs - rhs).norm(ctx.space))
    return worst


def action_connection_curvature_residual(ctx: TwistedContext, trials: int, seed: int) -> float:
    """Curvature of nabla + (action of the direction) against rho(R)."""
    rng = np.random.default_rng(seed)
    ca = curvature_actions(ctx)
    worst = 0.0
    for _ in range(trials):
        for i, j in itertools.combinations(range(ctx.n), 2):
            s = ctx.random_form(0, rng)
            lhs = _commutator_of(ctx, action_connection, s, i, j)
            rhs = _pointwise(ctx, s, ca.riemann[i, j], 0, ca.valid_r)
            worst = max(worst, (lhs - rhs).norm(ctx.space))
    return worst


def leibniz_action_residual(ctx: TwistedContext, trials: int, seed: int) -> float:
    """nabla_i (d_j . s) = (nabla_i d_j) . s + d_j . nabla_i s."""
    rng = np.random.default_rng(seed)
    sp = ctx.space
    gam = ctx.conn.gamma
    worst = 0.0
    for _ in range(trials):
        s = ctx.random_form(0, rng)
        for i in range(ctx.n):
            ns = covariant_derivative(ctx, s, i)
            for j in range(ctx.n):
                xs = _pointwise(ctx, s, ctx.x_ops[j], -1, ctx.valid_x)
                lhs = covariant_derivative(ctx, xs, i)
                nab_ij = sum(sp.mul(gam[k, i, j][None, None], ctx.x_ops[k]) for k in range(ctx.n))
                rhs = _pointwise(ctx, s, nab_ij, -1, min(ctx.valid_x, ctx.conn.valid)) + \
                    _pointwise(ctx, ns, ctx.x_ops[j], -1, ctx.valid_x)
                worst = max(worst, (lhs - rhs).norm(sp))
    return worst


def curvature_defect_form(ctx: TwistedContext, ca: CurvatureActions, f: VForm, cotton_sign: float = 1.0,
                          overall_sign: float = 1.0) -> VForm:
    """overall * sum_{t<u} (-1)^{t+u} (W + cotton_sign Y)(d_{j_t}, d_{j_u}) . phi(remaining slots).

    The defaults give the literal alternating formula; overall_sign = -1 with
    cotton_sign = -1 is the wedge of the computed curvature with phi.
    """
    sp, n = ctx.space, ctx.n
    k = f.k
    out = np.zeros((math.comb(n, k + 2), f.rep.dim, sp.size))
    src = {s: i for i, s in enumerate(subsets(n, k))}
    for p, J in enumerate(subsets(n, k + 2)):
        for t, u in itertools.combinations(range(k + 2), 2):
            rest = tuple(x for m, x in enumerate(J) if m not in (t, u))
            q = src[rest]
            mat = ca.weyl[J[t], J[u]] + cotton_sign * ca.cotton[J[t], J[u]]
            out[p] += overall_sign * (-1) ** (t + u) * sp.contract("de,e->d", mat, f.c[q])
    valid_w = ctx.shifted_valid(f.valid, 0, ca.valid_w)
    valid_y = ctx.shifted_valid(f.valid, 1, ca.valid_y)
    res = VForm(f.rep, k + 2, out, np.minimum(valid_w, valid_y))
    res.valid = _exact_blocks(res, res.valid)
    return res
