"""Matrix realizations of the |1|-graded algebras o(n+1,1) and sl(n+1).

Basis order is fixed: g_-1 (the X_a), then g_0 with the grading element last,
then g_1 (the Z_a).  The trace form tr(AB) pairs g_-1 with g_1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MEMBERSHIP_TOL = 1e-12


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GradedLieAlgebra:
    kind: str
    n: int
    basis: np.ndarray  # (dim, size, size)
    grades: np.ndarray  # (dim,) entries in {-1, 0, 1}
    labels: tuple
    form: np.ndarray | None = None  # Lorentzian form for the conformal case
    _coord_map: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        flat = self.basis.reshape(len(self.basis), -1)
        object.__setattr__(self, "_coord_map", np.linalg.pinv(flat))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def matrix_size(self) -> int:
        return self.basis.shape[1]

    @property
    def x_index(self) -> np.ndarray:
        return np.arange(self.n)

    @property
    def g0_index(self) -> np.ndarray:
        return np.flatnonzero(self.grades == 0)

    @property
    def z_index(self) -> np.ndarray:
        return np.arange(self.dim - self.n, self.dim)

    @property
    def e_index(self) -> int:
        return int(self.g0_index[-1])

    @property
    def X(self) -> np.ndarray:
        return self.basis[self.x_index]

    @property
    def Z(self) -> np.ndarray:
        return self.basis[self.z_index]

    @property
    def E(self) -> np.ndarray:
        return self.basis[self.e_index]

    @property
    def grade_dims(self) -> tuple[int, int, int]:
        return tuple(int(np.sum(self.grades == g)) for g in (-1, 0, 1))

    # -- coordinates --------------------------------------------------
    def coords(self, a: np.ndarray) -> np.ndarray:
        """Coefficients of a matrix in the algebra basis."""
        return a.reshape(-1) @ self._coord_map

    def element(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, float), self.basis, axes=1)

    def membership_residual(self, a: np.ndarray) -> float:
        return float(np.abs(self.element(self.coords(a)) - a).max())

    def check_member(self, a: np.ndarray) -> None:
        res = self.membership_residual(a)
        if res > MEMBERSHIP_TOL * max(1.0, np.abs(a).max()):
            raise AlgebraError(f"matrix is not in {self.kind} algebra (residual {res:.3g})")

    def grade_parts(self, a: np.ndarray) -> dict[int, np.ndarray]:
        c = self.coords(a)
        return {g: self.element(np.where(self.grades == g, c, 0.0)) for g in (-1, 0, 1)}

    def vector(self, v) -> np.ndarray:
        """g_-1 element X_v for v in R^n."""
        return np.tensordot(np.asarray(v, float), self.X, axes=1)

    def covector(self, a) -> np.ndarray:
        """g_1 element Z_a for a row vector a in R^n*."""
        return np.tensordot(np.asarray(a, float), self.Z, axes=1)

    def vector_part(self, a: np.ndarray) -> np.ndarray:
        return self.coords(a)[self.x_index]

    def covector_part(self, a: np.ndarray) -> np.ndarray:
        return self.coords(a)[self.z_index]

    # -- g_0 versus endomorphisms of g_-1 -----------------------------
    def endo(self, a0: np.ndarray) -> np.ndarray:
        """Endomorphism Phi of R^n with [a0, X_v] = X_{Phi v}."""
        cols = [self.vector_part(a0 @ x - x @ a0) for x in self.X]
        return np.array(cols).T

    def g0_from_endo(self, phi: np.ndarray) -> np.ndarray:
        """g_0 coefficient vector of the element acting on g_-1 as ``phi``.

        Conformal: exact on co(n); a symmetric trace-free part is dropped.
        Projective: exact on gl(n).
        """
        return phi_to_g0_map(self) @ np.asarray(phi, float).reshape(-1)

    def g0_element(self, phi: np.ndarray) -> np.ndarray:
        c = np.zeros(self.dim)
        c[self.g0_index] = self.g0_from_endo(phi)
        return self.element(c)

    def bracket_endo(self, eta, phi) -> np.ndarray:
        """The operation {eta, phi} as an endomorphism of R^n."""
        return self.endo(commutator(self.vector(eta), self.covector(phi)))

    def structure_constants(self) -> np.ndarray:
        """c[i, j, k] with [b_i, b_j] = sum_k c[i, j, k] b_k."""
        b = self.basis
        out = np.zeros((self.dim, self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                out[i, j] = self.coords(commutator(b[i], b[j]))
        return out


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def lorentz_form(n: int) -> np.ndarray:
    b = np.zeros((n + 2, n + 2))
    b[0, n + 1] = b[n + 1, 0] = 1.0
    b[1 : n + 1, 1 : n + 1] = np.eye(n)
    return b


def _conformal(n: int) -> GradedLieAlgebra:
    size = n + 2
    basis, grades, labels = [], [], []
    for a in range(1, n + 1):
        m = np.zeros((size, size))
        m[a, 0] = 1.0
        m[n + 1, a] = -1.0
        basis.append(m), grades.append(-1), labels.append(f"X{a}")
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            m = np.zeros((size, size))
            m[a, b] = 1.0
            m[b, a] = -1.0
            basis.append(m), grades.append(0), labels.append(f"L{a}{b}")
    e = np.zeros((size, size))
    e[0, 0] = 1.0
    e[n + 1, n + 1] = -1.0
    basis.append(e), grades.append(0), labels.append("E")
    for a in range(1, n + 1):
        m = np.zeros((size, size))
        m[0, a] = 1.0
        m[a, n + 1] = -1.0
        basis.append(m), grades.append(1), labels.append(f"Z{a}")
    return GradedLieAlgebra("conformal", n, np.array(basis), np.array(grades), tuple(labels),
                            form=lorentz_form(n))


def _projective(n: int) -> GradedLieAlgebra:
    size = n + 1
    basis, grades, labels = [], [], []
    for a in range(1, n + 1):
        m = np.zeros((size, size))
        m[a, 0] = 1.0
        basis.append(m), grades.append(-1), labels.append(f"X{a}")
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            if a != b:
                m = np.zeros((size, size))
                m[a, b] = 1.0
                basis.append(m), grades.append(0), labels.append(f"A{a}{b}")
    for a in range(1, n):
        m = np.zeros((size, size))
        m[a, a] = 1.0
        m[a + 1, a + 1] = -1.0
        basis.append(m), grades.append(0), labels.append(f"H{a}")
    e = np.zeros((size, size))
    e[0, 0] = n / (n + 1)
    e[1:, 1:] = -np.eye(n) / (n + 1)
    basis.append(e), grades.append(0), labels.append("E")
    for a in range(1, n + 1):
        m = np.zeros((size, size))
        m[0, a] = 1.0
        basis.append(m), grades.append(1), labels.append(f"Z{a}")
    return GradedLieAlgebra("projective", n, np.array(basis), np.array(grades), tuple(labels))


_CACHE: dict = {}


def build_graded_algebra(kind: str, n: int) -> GradedLieAlgebra:
    if n < 2:
        raise AlgebraError(f"need n >= 2, got {n}")
    key = (kind, n)
    if key not in _CACHE:
        if kind == "conformal":
            _CACHE[key] = _conformal(n)
        elif kind == "projective":
            _CACHE[key] = _projective(n)
        else:
            raise AlgebraError(f"unknown algebra kind {kind!r}")
    return _CACHE[key]


_PHI_MAPS: dict = {}


def phi_to_g0_map(alg: GradedLieAlgebra) -> np.ndarray:
    """Linear map from flattened endomorphisms of R^n to g_0 coefficients."""
    key = (alg.kind, alg.n)
    if key in _PHI_MAPS:
        return _PHI_MAPS[key]
    n = alg.n
    g0 = alg.g0_index
    # images of the g_0 basis as endomorphisms; invert on the relevant subspace
    images = np.array([alg.endo(alg.basis[k]).reshape(-1) for k in g0]).T  # (n*n, dim g0)
    if alg.kind == "conformal":
        # orthogonal projection of gl(n) onto co(n) = o(n) + R id, then solve
        proj = np.zeros((n * n, n * n))
        for i in range(n):
            for j in range(n):
                unit = np.zeros((n, n))
                unit[i, j] = 1.0
                skew = (unit - unit.T) / 2
                trace = np.trace(unit) / n * np.eye(n)
                proj[:, i * n + j] = (skew + trace).reshape(-1)
        m = np.linalg.pinv(images) @ proj
    else:
        m = np.linalg.pinv(images)
    _PHI_MAPS[key] = m
    return m


def dual_basis_pairing(alg: GradedLieAlgebra) -> np.ndarray:
    """Dual basis {Z^a} of g_1 with tr(X_a Z^b) = delta_ab, shape (n, size, size)."""
    pairing = np.einsum("aij,bji->ab", alg.X, alg.Z)
    if abs(np.linalg.det(pairing)) < 1e-12:
        raise AlgebraError("singular g_-1/g_1 pairing")
    inv = np.linalg.inv(pairing)
    return np.einsum("cb,cij->bij", inv, alg.Z)


def trace_pairing(alg: GradedLieAlgebra) -> np.ndarray:
    return np.einsum("aij,bji->ab", alg.X, alg.Z)


def graded_bracket(alg: GradedLieAlgebra, a: np.ndarray, b: np.ndarray):
    """Commutator together with its decomposition into g_-1, g_0, g_1 parts."""
    alg.check_member(a)
    alg.check_member(b)
    c = commutator(a, b)
    return c, alg.grade_parts(c)


def jacobi_residual(alg: GradedLieAlgebra) -> float:
    b = alg.basis
    worst = 0.0
    for i in range(alg.dim):
        for j in range(alg.dim):
            bij = commutator(b[i], b[j])
            for k in range(alg.dim):
                r = (commutator(bij, b[k]) + commutator(commutator(b[j], b[k]), b[i])
                     + commutator(commutator(b[k], b[i]), b[j]))
                worst = max(worst, float(np.abs(r).max()))
    return worst


def grade_additivity_residual(alg: GradedLieAlgebra) -> float:
    worst = 0.0
    for i in range(alg.dim):
        for j in range(alg.dim):
            c = alg.coords(commutator(alg.basis[i], alg.basis[j]))
            target = alg.grades[i] + alg.grades[j]
            off = c[alg.grades != target] if abs(target) <= 1 else c
            if off.size:
                worst = max(worst, float(np.abs(off).max()))
    return worst


def grading_element_residual(alg: GradedLieAlgebra) -> float:
    """max |ad(E) b - grade(b) b| over the basis."""
    e = alg.E
    return max(float(np.abs(commutator(e, b) - g * b).max()) for b, g in zip(alg.basis, alg.grades))


def membership_residuals(alg: GradedLieAlgebra) -> float:
    worst = 0.0
    for m in alg.basis:
        if alg.kind == "conformal":
            r = np.abs(m.T @ alg.form + alg.form @ m).max()
        else:
            r = abs(np.trace(m))
        worst = max(worst, float(r))
    return worst
