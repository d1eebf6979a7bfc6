"""Lie algebra cohomology of the abelian algebra g_-1 with values in a graded rep.

Cochains of degree k are alternating k-linear maps on g_-1 = R^n with values
in the representation.  A cochain is stored as a flat vector indexed by
``(subset, rep index)`` where ``subset`` runs over increasing k-subsets of
``range(n)`` in lexicographic order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import null_space

from .graded_lie import dual_basis_pairing
from .reps import GradedRep

RANK_TOL = 1e-10


class HodgeError(RuntimeError):
    pass


def subsets(n: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(n), k))


def sort_sign(idx) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation of ``idx`` (0 if an index repeats)."""
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign, tuple(sorted(idx))


@dataclass(frozen=True, eq=False)
class CochainSpace:
    rep: GradedRep
    k: int

    @property
    def n(self) -> int:
        return self.rep.alg.n

    @cached_property
    def subsets(self) -> list[tuple[int, ...]]:
        return subsets(self.n, self.k)

    @cached_property
    def position(self) -> dict:
        return {s: i for i, s in enumerate(self.subsets)}

    @property
    def dim(self) -> int:
        return len(self.subsets) * self.rep.dim

    @cached_property
    def grades(self) -> np.ndarray:
        return np.tile(self.rep.grades, len(self.subsets))

    def index(self, subset_pos: int, v: int) -> int:
        return subset_pos * self.rep.dim + v

    def g0_action(self, coeff_index: int) -> np.ndarray:
        """Action of a g_0 basis element on cochains.

        Acts by the representation on values and by minus the transpose of
        the induced endomorphism on arguments.
        """
        alg, rep = self.rep.alg, self.rep
        a = alg.basis[coeff_index]
        phi = alg.endo(a)
        d = rep.dim
        out = np.kron(np.eye(len(self.subsets)), rep.action[coeff_index])
        for p, subset in enumerate(self.subsets):
            # (A.f)_I -= sum_slot sum_b Phi[b, i_slot] f(I with i_slot -> b)
            for slot, i in enumerate(subset):
                for b in range(self.n):
                    c = phi[b, i]
                    if c == 0:
                        continue
                    replaced = list(subset)
                    replaced[slot] = b
                    sign, srt = sort_sign(replaced)
                    if sign == 0:
                        continue
                    q = self.position[srt]
                    out[p * d : (p + 1) * d, q * d : (q + 1) * d] -= sign * c * np.eye(d)
        return out


def lie_differential(space: CochainSpace) -> np.ndarray:
    """Matrix of the differential from degree k to degree k+1."""
    rep = space.rep
    n, k, d = space.n, space.k, rep.dim
    target = CochainSpace(rep, k + 1)
    out = np.zeros((target.dim, space.dim))
    xs = rep.x_action
    for p, subset in enumerate(target.subsets):
        for i, j in enumerate(subset):
            rest = subset[:i] + subset[i + 1 :]
            q = space.position[rest]
            out[p * d : (p + 1) * d, q * d : (q + 1) * d] += (-1) ** i * xs[j]
    return out


def kostant_codifferential(space: CochainSpace) -> np.ndarray:
    """Matrix of the codifferential from degree k to degree k-1.

    Uses the homology formula: insert the g_-1 basis in the first slot and act
    with the dual g_1 basis.
    """
    rep = space.rep
    alg = rep.alg
    n, k, d = space.n, space.k, rep.dim
    zdual = dual_basis_pairing(alg)
    zact = np.array([rep.rho(z) for z in zdual])
    target = CochainSpace(rep, k - 1)
    out = np.zeros((target.dim, space.dim))
    for p, subset in enumerate(target.subsets):
        for a in range(n):
            sign, srt = sort_sign((a,) + subset)
            if sign == 0:
                continue
            q = space.position[srt]
            out[p * d : (p + 1) * d, q * d : (q + 1) * d] += sign * zact[a]
    return out


def _range_basis(m: np.ndarray) -> np.ndarray:
    if m.size == 0:
        return np.zeros((m.shape[0], 0))
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((m.shape[0], 0))
    return u[:, s > RANK_TOL * s[0]]


def _kernel_basis(m: np.ndarray, cols: int) -> np.ndarray:
    if m.size == 0:
        return np.eye(cols)
    smax = np.linalg.norm(m, 2)
    if smax == 0:
        return np.eye(cols)
    return null_space(m, rcond=RANK_TOL)


def rank(m: np.ndarray) -> int:
    return _range_basis(m).shape[1]


def grade_mask(grades_out: np.ndarray, grades_in: np.ndarray, shift: int) -> np.ndarray:
    return grades_out[:, None] == grades_in[None, :] + shift


@dataclass(eq=False)
class HodgeDecomposition:
    rep: GradedRep
    spaces: list
    delta: list  # delta[k]: C^k -> C^{k+1}, k = 0..n-1
    codelta: list  # codelta[k]: C^k -> C^{k-1}, k = 1..n (index 0 unused)
    homotopy: list  # homotopy[k]: C^k -> C^{k-1}, k = 1..n
    projector: list  # projector[k]: C^k -> C^k onto the harmonic part
    harmonic: list  # orthonormal basis columns per degree, grade-pure
    harmonic_grades: list  # grade of each harmonic basis column
    cohomology: list  # h_k
    masked: dict = field(default_factory=dict)  # magnitudes dropped by grade masks

    @property
    def n(self) -> int:
        return self.rep.alg.n

    def d(self, k):
        return self.delta[k] if 0 <= k < self.n else np.zeros((self.dim(k + 1), self.dim(k)))

    def dstar(self, k):
        return self.codelta[k] if 1 <= k <= self.n else np.zeros((self.dim(k - 1), self.dim(k)))

    def T(self, k):
        return self.homotopy[k] if 1 <= k <= self.n else np.zeros((self.dim(k - 1), self.dim(k)))

    def dim(self, k):
        if 0 <= k <= self.n:
            return self.spaces[k].dim
        return 0

    def harmonic_grade_set(self, k) -> list[int]:
        return sorted(set(self.harmonic_grades[k].tolist()))

    def harmonic_block(self, k, grade) -> np.ndarray:
        return self.harmonic[k][:, self.harmonic_grades[k] == grade]


def hodge_split(rep: GradedRep) -> HodgeDecomposition:
    n = rep.alg.n
    spaces = [CochainSpace(rep, k) for k in range(n + 1)]
    masked = {}

    def mask(name, m, gout, gin, shift):
        keep = grade_mask(gout, gin, shift)
        dropped = float(np.abs(m[~keep]).max()) if (~keep).any() and m.size else 0.0
        masked[name] = max(masked.get(name, 0.0), dropped)
        return np.where(keep, m, 0.0)

    delta = [lie_differential(spaces[k]) for k in range(n)]
    codelta = [None] + [kostant_codifferential(spaces[k]) for k in range(1, n + 1)]
    for k in range(n):
        delta[k] = mask("delta", delta[k], spaces[k + 1].grades, spaces[k].grades, -1)
    for k in range(1, n + 1):
        codelta[k] = mask("codelta", codelta[k], spaces[k - 1].grades, spaces[k].grades, 1)

    homotopy = [None]
    for k in range(1, n + 1):
        # C^k = im(delta_{k-1}) + ker(codelta_k); T inverts delta on im(codelta_k)
        dim_k, dim_km1 = spaces[k].dim, spaces[k - 1].dim
        u = _range_basis(codelta[k])  # in C^{k-1}
        img = delta[k - 1] @ u
        ker = _kernel_basis(codelta[k], dim_k)
        basis = np.hstack([img, ker])
        if basis.shape[1] != dim_k or np.linalg.matrix_rank(basis, tol=RANK_TOL) != dim_k:
            raise HodgeError(f"complementarity fails in degree {k} for {rep.name}")
        coeff = np.linalg.inv(basis)
        t = np.hstack([u, np.zeros((dim_km1, ker.shape[1]))]) @ coeff
        homotopy.append(mask("homotopy", t, spaces[k - 1].grades, spaces[k].grades, 1))

    projector, harmonic, harmonic_grades, cohomology = [], [], [], []
    for k in range(n + 1):
        sp = spaces[k]
        parts = []
        if k < n:
            parts.append(delta[k])
        if k >= 1:
            parts.append(codelta[k])
        stacked = np.vstack(parts)
        cols, gr = [], []
        for j in range(rep.top_grade + 1):
            idx = np.flatnonzero(sp.grades == j)
            ns = _kernel_basis(stacked[:, idx], len(idx))
            if ns.shape[1]:
                full = np.zeros((sp.dim, ns.shape[1]))
                full[idx] = ns
                cols.append(full)
                gr += [j] * ns.shape[1]
        ups = np.hstack(cols) if cols else np.zeros((sp.dim, 0))
        harmonic.append(ups)
        harmonic_grades.append(np.array(gr, dtype=int))
        blocks = [ups]
        if k >= 1:
            blocks.append(_range_basis(delta[k - 1]))
        if k < n:
            blocks.append(_range_basis(codelta[k + 1]))
        basis = np.hstack(blocks)
        if basis.shape[1] != sp.dim:
            raise HodgeError(f"harmonic complement has wrong dimension in degree {k}")
        coeff = np.linalg.inv(basis)
        p = ups @ coeff[: ups.shape[1]]
        projector.append(mask("projector", p, sp.grades, sp.grades, 0))
        ker_d = sp.dim - (rank(delta[k]) if k < n else 0)
        im_prev = rank(delta[k - 1]) if k >= 1 else 0
        cohomology.append(ker_d - im_prev)
    return HodgeDecomposition(rep, spaces, delta, codelta, homotopy, projector,
                              harmonic, harmonic_grades, cohomology, masked)


# -- residual checks --------------------------------------------------

def _maxabs(m) -> float:
    return float(np.abs(m).max()) if np.size(m) else 0.0


def identity_residuals(h: HodgeDecomposition) -> dict[str, float]:
    n = h.n
    out = {"dd": 0.0, "dstar_dstar": 0.0, "TT": 0.0, "TdT": 0.0, "dTd": 0.0,
           "harmonic_in_kernels": 0.0, "projector_idempotent": 0.0, "cohomology_vs_harmonic": 0.0}
    for k in range(n + 1):
        out["dd"] = max(out["dd"], _maxabs(h.d(k + 1) @ h.d(k)))
        out["dstar_dstar"] = max(out["dstar_dstar"], _maxabs(h.dstar(k - 1) @ h.dstar(k)))
        out["TT"] = max(out["TT"], _maxabs(h.T(k - 1) @ h.T(k)))
        out["TdT"] = max(out["TdT"], _maxabs(h.T(k) @ h.d(k - 1) @ h.T(k) - h.T(k)))
        out["dTd"] = max(out["dTd"], _maxabs(h.d(k) @ h.T(k + 1) @ h.d(k) - h.d(k)))
        ups = h.harmonic[k]
        out["harmonic_in_kernels"] = max(out["harmonic_in_kernels"],
                                         _maxabs(h.d(k) @ ups), _maxabs(h.T(k) @ ups))
        p = h.projector[k]
        out["projector_idempotent"] = max(out["projector_idempotent"], _maxabs(p @ p - p))
        out["cohomology_vs_harmonic"] = max(out["cohomology_vs_harmonic"],
                                            abs(h.cohomology[k] - ups.shape[1]))
    return out


def complementarity(h: HodgeDecomposition) -> dict[str, bool]:
    """im(d) + ker(d*) and the three-way harmonic split are direct and complete."""
    ok_split, ok_harm = True, True
    for k in range(1, h.n + 1):
        r_im = rank(h.d(k - 1))
        ker = _kernel_basis(h.dstar(k), h.dim(k))
        both = np.hstack([_range_basis(h.d(k - 1)), ker])
        ok_split &= (r_im + ker.shape[1] == h.dim(k)) and rank(both) == h.dim(k)
    for k in range(h.n + 1):
        blocks = [h.harmonic[k], _range_basis(h.d(k - 1)), _range_basis(h.dstar(k + 1))]
        both = np.hstack(blocks)
        ok_harm &= both.shape[1] == h.dim(k) and rank(both) == h.dim(k)
    return {"image_plus_cokernel": bool(ok_split), "harmonic_split": bool(ok_harm)}


def equivariance_residuals(h: HodgeDecomposition) -> dict[str, float]:
    alg = h.rep.alg
    worst = {"d": 0.0, "dstar": 0.0, "T": 0.0, "grading_dstar": 0.0}
    acts = [{c: sp.g0_action(c) for c in alg.g0_index} for sp in h.spaces]
    for k in range(h.n + 1):
        for c in alg.g0_index:
            a_k = acts[k][c]
            if k < h.n:
                a_next = acts[k + 1][c]
                worst["d"] = max(worst["d"], _maxabs(a_next @ h.d(k) - h.d(k) @ a_k))
            if k >= 1:
                a_prev = acts[k - 1][c]
                r_ds = _maxabs(a_prev @ h.dstar(k) - h.dstar(k) @ a_k)
                worst["dstar"] = max(worst["dstar"], r_ds)
                worst["T"] = max(worst["T"], _maxabs(a_prev @ h.T(k) - h.T(k) @ a_k))
                if c == alg.e_index:
                    worst["grading_dstar"] = max(worst["grading_dstar"], r_ds)
    return worst


def euler_characteristic(h: HodgeDecomposition) -> tuple[int, int]:
    chain = sum((-1) ** k * math.comb(h.n, k) * h.rep.dim for k in range(h.n + 1))
    coh = sum((-1) ** k * c for k, c in enumerate(h.cohomology))
    return chain, coh


def _eigen_commutant(a: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Column-major vectorized span containing the commutant of a diagonalizable matrix.

    Pairs of eigenvalues are matched with a loose tolerance; spurious extra
    directions are removed later by the exact commutation constraints.
    """
    m = a.shape[0]
    lam, v = np.linalg.eig(a)
    vinv = np.linalg.inv(v)
    scale = max(1.0, float(np.abs(lam).max()))
    cols = []
    for i in range(m):
        for j in range(m):
            if abs(lam[i] - lam[j]) <= tol * scale:
                y = np.outer(v[:, i], vinv[j])
                cols += [y.real.reshape(-1, order="F"), y.imag.reshape(-1, order="F")]
    u, s, _ = np.linalg.svd(np.array(cols).T, full_matrices=False)
    return u[:, s > 1e-9 * s.max()]


def _right_kernel(m: np.ndarray, rcond: float = 1e-9) -> np.ndarray:
    # tall constraint matrices: the thin SVD already holds every right singular vector
    _, sv, vt = np.linalg.svd(m, full_matrices=m.shape[0] < m.shape[1])
    rank = int(np.sum(sv > rcond * sv.max(initial=0.0)))
    return vt[rank:].T


def commutant_basis(actions: list[np.ndarray]) -> np.ndarray:
    """Basis (count, m, m) of the matrices commuting with every action matrix."""
    m = actions[0].shape[0]
    acts = np.asarray(actions)
    rng = np.random.default_rng(0)
    # a random element of the associative algebra generated by the actions has
    # the same commutant and, unlike a Lie algebra element, few repeated eigenvalues
    generic = np.tensordot(rng.standard_normal(len(acts)), acts, axes=1)
    left = np.tensordot(rng.standard_normal(len(acts)), acts, axes=1)
    generic = generic + left @ np.tensordot(rng.standard_normal(len(acts)), acts, axes=1)
    basis = _eigen_commutant(generic)
    for a in [generic, *actions]:
        mats = basis.T.reshape(-1, m, m).transpose(0, 2, 1)  # undo column-major vec
        sub = (a @ mats - mats @ a).transpose(0, 2, 1).reshape(len(mats), -1).T
        if not np.any(np.abs(sub) > 1e-12):
            continue
        basis = basis @ _right_kernel(sub)
        if basis.shape[1] <= 1:
            break
    return np.array([basis[:, i].reshape(m, m, order="F") for i in range(basis.shape[1])])


def commutant_dimension(actions: list[np.ndarray]) -> int:
    return len(commutant_basis(actions))


def is_irreducible(actions: list[np.ndarray], tol: float = 1e-8) -> bool:
    """Real irreducibility: the commutant is a division algebra (R, C or H).

    Every trace-free commutant element must square to a negative multiple of
    the identity, which rules out zero divisors.
    """
    return _is_division_algebra(commutant_basis(actions), tol)


def _is_division_algebra(comm: np.ndarray, tol: float = 1e-8) -> bool:
    m = comm.shape[1]
    if len(comm) not in (1, 2, 4):
        return False
    eye = np.eye(m)
    flat = np.array([(c - np.trace(c) / m * eye).reshape(-1) for c in comm])
    u, sv, vt = np.linalg.svd(flat, full_matrices=False)
    free = [v.reshape(m, m) for v in vt[sv > tol]]
    q = np.zeros((len(free), len(free)))
    for i, x in enumerate(free):
        for j, y in enumerate(free):
            sym = (x @ y + y @ x) / 2
            scalar = np.trace(sym) / m
            if np.abs(sym - scalar * eye).max() > tol * max(1.0, abs(scalar)):
                return False
            q[i, j] = -scalar
    return bool(len(free) == 0 or np.linalg.eigvalsh(q).min() > tol)


def harmonic_structure(h: HodgeDecomposition, k: int) -> list[dict]:
    """Grade location, dimension and commutant dimension of each grade block of the harmonic part."""
    alg = h.rep.alg
    sp = h.spaces[k]
    out = []
    acts = [sp.g0_action(c) for c in alg.g0_index]
    for g in h.harmonic_grade_set(k):
        y = h.harmonic_block(k, g)
        restricted = [y.T @ a @ y for a in acts]
        comm = commutant_basis(restricted)
        out.append({"grade": g, "dim": y.shape[1], "commutant": len(comm),
                    "irreducible": _is_division_algebra(comm)})
    return out


def inner_product_agreement(h: HodgeDecomposition) -> float:
    """Largest sine of the principal angles between two descriptions of the harmonic part.

    Compares ker(d) intersected with the orthogonal complement of im(d) in
    the coordinate inner product against the codifferential-based version.
    """
    worst = 0.0
    for k in range(h.n + 1):
        ker = _kernel_basis(h.d(k), h.dim(k)) if k < h.n else np.eye(h.dim(k))
        im_prev = _range_basis(h.d(k - 1)) if k >= 1 else np.zeros((h.dim(k), 0))
        if im_prev.shape[1]:
            comp = ker - im_prev @ (im_prev.T @ ker)
            alt = _range_basis(comp)
        else:
            alt = ker
        ups = h.harmonic[k]
        if alt.shape[1] != ups.shape[1]:
            return float("inf")
        if ups.shape[1] == 0:
            continue
        q, _ = np.linalg.qr(ups)
        resid = alt - q @ (q.T @ alt)
        worst = max(worst, float(np.linalg.norm(resid, 2)))
    return worst
