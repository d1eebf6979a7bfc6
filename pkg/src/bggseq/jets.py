"""Truncated multivariate Taylor jets.

Coefficients are stored as derivative values at the basepoint, so the entry
for the multi-index ``alpha`` is ``d^alpha f(0)``.  Multi-indices are
enumerated once per ``(dim, order)`` in graded-lexicographic order; a jet of
lower order is therefore a prefix of a jet of higher order.

Two layers live here.  :class:`JetSpace` works on plain numpy arrays whose
last axis holds the coefficients (this is what the geometry code uses, with
many jets batched together).  :class:`Jet` is a small value type on top of it
for single scalar jets.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


def multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices with ``|alpha| <= order``, graded-lex ordered."""
    out = []
    for deg in range(order + 1):
        level = [a for a in itertools.product(range(deg + 1), repeat=dim) if sum(a) == deg]
        level.sort(reverse=True)
        out.extend(level)
    return out


def n_coeffs(dim: int, order: int) -> int:
    return math.comb(dim + order, dim)


def _factorial(alpha) -> int:
    return math.prod(math.factorial(a) for a in alpha)


class JetSpace:
    """Array-level jet arithmetic for a fixed ``(dim, order)``.

    All arrays handled by a space have trailing axis of length ``size``.
    Products and derivatives keep that length; a derivative leaves its top
    degree coefficients at zero and callers track how many orders remain
    valid.
    """

    def __init__(self, dim: int, order: int):
        if dim < 1:
            raise ValueError("jet dimension must be positive")
        if order < 0:
            raise ValueError("jet order must be non-negative")
        self.dim = dim
        self.order = order
        self.indices = multi_indices(dim, order)
        self.size = len(self.indices)
        self.position = {a: k for k, a in enumerate(self.indices)}
        self.degree = np.array([sum(a) for a in self.indices])

        ia, ib, ic, w = [], [], [], []
        for c, gamma in enumerate(self.indices):
            g_fact = _factorial(gamma)
            for alpha in itertools.product(*(range(g + 1) for g in gamma)):
                beta = tuple(g - a for g, a in zip(gamma, alpha))
                ia.append(self.position[alpha])
                ib.append(self.position[beta])
                ic.append(c)
                w.append(g_fact / (_factorial(alpha) * _factorial(beta)))
        self._ia = np.array(ia)
        self._ib = np.array(ib)
        # scatter matrix carrying the binomial weights
        scatter = np.zeros((len(ia), self.size))
        scatter[np.arange(len(ia)), ic] = w
        self._scatter = scatter

        self._shift = []
        for i in range(dim):
            src = np.full(self.size, -1)
            for k, alpha in enumerate(self.indices):
                up = list(alpha)
                up[i] += 1
                up = tuple(up)
                if up in self.position:
                    src[k] = self.position[up]
            self._shift.append(src)

    # -- construction -------------------------------------------------
    def zeros(self, shape=()) -> np.ndarray:
        return np.zeros(tuple(shape) + (self.size,))

    def constant(self, value) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        out = np.zeros(value.shape + (self.size,))
        out[..., 0] = value
        return out

    def coordinate(self, i: int) -> np.ndarray:
        out = self.zeros()
        if self.order >= 1:
            e = [0] * self.dim
            e[i] = 1
            out[self.position[tuple(e)]] = 1.0
        return out

    def from_monomials(self, terms: dict) -> np.ndarray:
        """Jet of a polynomial given as ``{exponent tuple: coefficient}``."""
        out = self.zeros()
        for alpha, c in terms.items():
            alpha = tuple(alpha)
            if sum(alpha) <= self.order:
                out[self.position[alpha]] += c * _factorial(alpha)
        return out

    def random(self, rng: np.random.Generator, shape=()) -> np.ndarray:
        return rng.standard_normal(tuple(shape) + (self.size,))

    def truncate_mask(self, valid: int) -> np.ndarray:
        """Boolean mask of coefficients of degree ``<= valid``."""
        return self.degree <= valid

    # -- arithmetic ---------------------------------------------------
    def mul(self, a, b) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        return (a[..., self._ia] * b[..., self._ib]) @ self._scatter

    def contract(self, subscripts: str, a, b) -> np.ndarray:
        """Bilinear ``einsum`` where every scalar product is a jet product.

        ``subscripts`` omits the coefficient axis, e.g. ``"ij,j->i"`` for a
        jet matrix acting on a jet vector.
        """
        lhs, out = subscripts.split("->")
        sa, sb = lhs.split(",")
        spec = f"{sa}z,{sb}z->{out}z"
        prod = np.einsum(spec, a[..., self._ia], b[..., self._ib], optimize=True)
        return prod @ self._scatter

    def matvec(self, m, v) -> np.ndarray:
        return self.contract("ij,j->i", m, v)

    def matmul(self, a, b) -> np.ndarray:
        return self.contract("ij,jk->ik", a, b)

    def partial(self, a, i: int) -> np.ndarray:
        a = np.asarray(a, float)
        src = self._shift[i]
        out = np.zeros_like(a)
        ok = src >= 0
        out[..., ok] = a[..., src[ok]]
        return out

    def compose(self, a, derivs) -> np.ndarray:
        """``f(a)`` for a scalar function given by its derivatives at ``a(0)``.

        ``derivs[k]`` is ``f^(k)(a0)``; the nilpotent part of ``a`` makes the
        Taylor sum finite.
        """
        a = np.asarray(a, float)
        u = a.copy()
        u[..., 0] = 0.0
        out = self.constant(np.asarray(derivs[0]) * np.ones(a.shape[:-1]))
        term = self.constant(np.ones(a.shape[:-1]))
        for k in range(1, self.order + 1):
            term = self.mul(term, u)
            out = out + (np.asarray(derivs[k])[..., None] / math.factorial(k)) * term
        return out

    def power(self, a, p: float) -> np.ndarray:
        a = np.asarray(a, float)
        a0 = a[..., 0]
        if p != int(p) and np.any(a0 <= 0):
            raise ValueError("non-integer power of a jet needs a positive constant term")
        if np.any(a0 == 0) and p < 0:
            raise ZeroDivisionError("jet with zero constant term is not invertible")
        derivs = []
        coeff = 1.0
        for k in range(self.order + 1):
            derivs.append(coeff * a0 ** (p - k))
            coeff *= p - k
        return self.compose(a, derivs)

    def reciprocal(self, a) -> np.ndarray:
        return self.power(a, -1.0)

    def sqrt(self, a) -> np.ndarray:
        return self.power(a, 0.5)

    def exp(self, a) -> np.ndarray:
        a = np.asarray(a, float)
        e0 = np.exp(a[..., 0])
        return self.compose(a, [e0] * (self.order + 1))

    def log(self, a) -> np.ndarray:
        a = np.asarray(a, float)
        a0 = a[..., 0]
        if np.any(a0 <= 0):
            raise ValueError("log of a jet needs a positive constant term")
        derivs = [np.log(a0)]
        for k in range(1, self.order + 1):
            derivs.append((-1) ** (k - 1) * math.factorial(k - 1) / a0**k)
        return self.compose(a, derivs)

    def inv_matrix(self, m) -> np.ndarray:
        """Inverse of a square jet matrix by Newton iteration."""
        m = np.asarray(m, float)
        n = m.shape[0]
        x = self.constant(np.linalg.inv(m[..., 0]))
        two = self.constant(2.0 * np.eye(n))
        steps = max(1, math.ceil(math.log2(self.order + 1)))
        for _ in range(steps):
            x = self.matmul(x, two - self.matmul(m, x))
        return x

    def det(self, m) -> np.ndarray:
        m = np.asarray(m, float)
        k = m.shape[0]
        if k == 0:
            return self.constant(1.0)
        total = self.zeros()
        for perm in itertools.permutations(range(k)):
            term = self.constant(_perm_sign(perm))
            for r, c in enumerate(perm):
                term = self.mul(term, m[r, c])
            total = total + term
        return total

    def value(self, a) -> np.ndarray:
        return np.asarray(a)[..., 0]


def _perm_sign(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


@lru_cache(maxsize=None)
def jet_space(dim: int, order: int) -> JetSpace:
    return JetSpace(dim, order)


class Jet:
    """Scalar jet: ``dim`` variables truncated at ``order``.

    >>> x = Jet.coordinate(1, 0, 2)
    >>> ((1 + x) * (1 - x)).coeffs.tolist()
    [1.0, 0.0, -2.0]
    """

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, order: int, coeffs=None):
        space = jet_space(dim, order)
        if coeffs is None:
            coeffs = np.zeros(space.size)
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != (space.size,):
            raise ValueError(f"expected {space.size} coefficients, got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("jet coefficients must be finite")
        self.dim = dim
        self.order = order
        self.coeffs = coeffs

    @property
    def space(self) -> JetSpace:
        return jet_space(self.dim, self.order)

    @classmethod
    def constant(cls, value: float, dim: int, order: int) -> "Jet":
        return cls(dim, order, jet_space(dim, order).constant(value))

    @classmethod
    def coordinate(cls, i: int, dim: int, order: int) -> "Jet":
        return cls(dim, order, jet_space(dim, order).coordinate(i))

    @classmethod
    def from_monomials(cls, terms: dict, dim: int, order: int) -> "Jet":
        return cls(dim, order, jet_space(dim, order).from_monomials(terms))

    def __getitem__(self, alpha) -> float:
        return float(self.coeffs[self.space.position[tuple(alpha)]])

    def truncated(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Jet(self.dim, order, self.coeffs[: n_coeffs(self.dim, order)])

    def _coerce(self, other) -> tuple["Jet", "Jet"]:
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise ValueError(f"jet dimension mismatch: {self.dim} vs {other.dim}")
            order = min(self.order, other.order)
            return self.truncated(order), other.truncated(order)
        return self, Jet.constant(float(other), self.dim, self.order)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.dim, a.order, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.dim, a.order, a.coeffs - b.coeffs)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.dim, a.order, b.coeffs - a.coeffs)

    def __neg__(self):
        return Jet(self.dim, self.order, -self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.dim, self.order, float(other) * self.coeffs)
        a, b = self._coerce(other)
        return Jet(a.dim, a.order, a.space.mul(a.coeffs, b.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.dim, self.order, self.coeffs / float(other))
        return self * jet_reciprocal(other)

    def __rtruediv__(self, other):
        return jet_reciprocal(self) * other

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (self.dim, self.order) == (other.dim, other.order) and np.array_equal(
            self.coeffs, other.coeffs
        )

    def allclose(self, other: "Jet", atol: float = 1e-12) -> bool:
        a, b = self._coerce(other)
        return bool(np.allclose(a.coeffs, b.coeffs, atol=atol, rtol=0))

    def partial(self, i: int) -> "Jet":
        return jet_partial(self, i)

    def __repr__(self):
        terms = [f"{c:+.4g}*d{a}" for a, c in zip(self.space.indices, self.coeffs) if c != 0]
        return f"Jet(dim={self.dim}, order={self.order}, {' '.join(terms) or '0'})"


def jet_arith(a: Jet, b, op: str) -> Jet:
    """Binary jet arithmetic: ``op`` is one of add, sub, mul, scale."""
    if op == "scale":
        return a * float(b)
    if not isinstance(b, Jet):
        raise TypeError("jet_arith expects two jets unless op='scale'")
    if a.dim != b.dim:
        raise ValueError(f"jet dimension mismatch: {a.dim} vs {b.dim}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown jet operation {op!r}")


def jet_reciprocal(a: Jet) -> Jet:
    if a.coeffs[0] == 0:
        raise ZeroDivisionError("jet with zero constant term has no reciprocal")
    return Jet(a.dim, a.order, a.space.reciprocal(a.coeffs))


def jet_partial(a: Jet, i: int) -> Jet:
    if a.order < 1:
        raise ValueError("cannot differentiate an order-0 jet")
    if not 0 <= i < a.dim:
        raise IndexError(f"coordinate index {i} out of range for dim {a.dim}")
    shifted = a.space.partial(a.coeffs, i)
    return Jet(a.dim, a.order - 1, shifted[: n_coeffs(a.dim, a.order - 1)])
