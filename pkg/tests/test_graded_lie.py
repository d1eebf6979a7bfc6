import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bggseq.graded_lie import (AlgebraError, build_graded_algebra, commutator, dual_basis_pairing,
                               grade_additivity_residual, graded_bracket, grading_element_residual,
                               jacobi_residual, membership_residuals, trace_pairing)

ALGEBRAS = [("conformal", n) for n in (2, 3, 4, 5)] + [("projective", n) for n in (2, 3, 4)]


@pytest.mark.parametrize("kind,n", ALGEBRAS)
def test_grade_dimensions(kind, n):
    alg = build_graded_algebra(kind, n)
    middle = n * (n - 1) // 2 + 1 if kind == "conformal" else n * n
    assert alg.grade_dims == (n, middle, n)
    assert alg.matrix_size == (n + 2 if kind == "conformal" else n + 1)


def test_total_dimensions_match_matrix_count():
    # o(4,1) and sl(4) by counting independent matrices of the defining conditions
    assert build_graded_algebra("conformal", 3).dim == 10
    assert build_graded_algebra("projective", 3).dim == 15
    for kind, n in ALGEBRAS:
        alg = build_graded_algebra(kind, n)
        flat = alg.basis.reshape(alg.dim, -1)
        assert np.linalg.matrix_rank(flat) == alg.dim


@pytest.mark.parametrize("kind,n", ALGEBRAS)
def test_structural_residuals(kind, n):
    alg = build_graded_algebra(kind, n)
    assert jacobi_residual(alg) <= 1e-12
    assert grade_additivity_residual(alg) <= 1e-12
    assert grading_element_residual(alg) <= 1e-12
    assert membership_residuals(alg) <= 1e-12


@pytest.mark.parametrize("kind,n", ALGEBRAS)
def test_ad_grading_eigenspaces_reproduce_partition(kind, n):
    alg = build_graded_algebra(kind, n)
    ad_e = np.array([alg.coords(commutator(alg.E, b)) for b in alg.basis]).T
    eig = np.sort(np.linalg.eigvals(ad_e).real)
    assert np.allclose(eig, np.sort(alg.grades.astype(float)), atol=1e-12)


def test_projective_grading_element_blocks():
    for n in (2, 3, 4):
        e = build_graded_algebra("projective", n).E
        assert e[0, 0] == pytest.approx(n / (n + 1), abs=1e-14)
        assert np.allclose(e[1:, 1:], -np.eye(n) / (n + 1), atol=1e-14)
        assert np.allclose(e[0, 1:], 0) and np.allclose(e[1:, 0], 0)


def test_grading_element_acts_as_minus_one_on_vectors():
    for kind, n in ALGEBRAS:
        alg = build_graded_algebra(kind, n)
        for x in alg.X:
            assert np.allclose(commutator(alg.E, x), -x, atol=1e-14)


def _brace_on(alg, eta, phi, xi):
    return alg.vector_part(commutator(commutator(alg.vector(eta), alg.covector(phi)), alg.vector(xi)))


def test_conformal_bracket_example():
    alg = build_graded_algebra("conformal", 3)
    e = np.eye(3)
    assert np.allclose(_brace_on(alg, e[0], e[0], e[1]), e[1], atol=1e-14)


def test_conformal_bracket_formula_random():
    rng = np.random.default_rng(0)
    for n in (3, 4, 5):
        alg = build_graded_algebra("conformal", n)
        for _ in range(10):
            eta, phi, xi = rng.standard_normal((3, n))
            want = (phi @ eta) * xi + (phi @ xi) * eta - (xi @ eta) * phi
            assert np.allclose(_brace_on(alg, eta, phi, xi), want, atol=1e-12)


def test_projective_bracket_matrix_realization():
    alg = build_graded_algebra("projective", 3)
    e = np.eye(3)
    assert np.allclose(_brace_on(alg, e[0], e[0], e[1]), e[1], atol=1e-14)
    rng = np.random.default_rng(1)
    for n in (2, 3, 4):
        alg = build_graded_algebra("projective", n)
        for _ in range(10):
            eta, phi, xi = rng.standard_normal((3, n))
            want = (phi @ xi) * eta + (phi @ eta) * xi
            assert np.allclose(_brace_on(alg, eta, phi, xi), want, atol=1e-12)


def test_graded_bracket_reports_grades():
    alg = build_graded_algebra("conformal", 3)
    c, parts = graded_bracket(alg, alg.X[0], alg.Z[0])
    assert np.allclose(parts[0], c)
    assert np.allclose(parts[-1], 0) and np.allclose(parts[1], 0)


def test_graded_bracket_rejects_non_members():
    alg = build_graded_algebra("projective", 2)
    with pytest.raises(AlgebraError):
        graded_bracket(alg, np.eye(3), alg.X[0])


def test_small_dimension_and_unknown_kind_rejected():
    with pytest.raises(AlgebraError):
        build_graded_algebra("conformal", 1)
    with pytest.raises(AlgebraError):
        build_graded_algebra("symplectic", 3)


@pytest.mark.parametrize("kind,n", ALGEBRAS)
def test_dual_basis_biorthogonal(kind, n):
    alg = build_graded_algebra(kind, n)
    zd = dual_basis_pairing(alg)
    pairing = np.einsum("aij,bji->ab", alg.X, zd)
    assert np.abs(pairing - np.eye(n)).max() <= 1e-12


def test_conformal_pairing_is_multiple_of_identity():
    alg = build_graded_algebra("conformal", 3)
    p = trace_pairing(alg)
    assert abs(p[0, 0]) > 0.1
    assert np.allclose(p, p[0, 0] * np.eye(3), atol=1e-14)
    zd = dual_basis_pairing(alg)
    assert np.allclose(zd, alg.Z / p[0, 0], atol=1e-14)


def test_vectors_are_trace_orthogonal():
    for kind, n in ALGEBRAS:
        alg = build_graded_algebra(kind, n)
        assert np.allclose(np.einsum("aij,bji->ab", alg.X, alg.X), 0, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(ALGEBRAS), st.integers(0, 2**32 - 1))
def test_random_elements_bracket_respects_grading(algebra, seed):
    alg = build_graded_algebra(*algebra)
    rng = np.random.default_rng(seed)
    parts = []
    for g in (-1, 0, 1):
        c = np.where(alg.grades == g, rng.standard_normal(alg.dim), 0.0)
        parts.append(alg.element(c))
    for i, a in zip((-1, 0, 1), parts):
        for j, b in zip((-1, 0, 1), parts):
            c = alg.coords(commutator(a, b))
            off = c[alg.grades != i + j] if abs(i + j) <= 1 else c
            assert np.abs(off).max(initial=0.0) <= 1e-11
    a, b, c = (alg.element(rng.standard_normal(alg.dim)) for _ in range(3))
    jac = commutator(commutator(a, b), c) + commutator(commutator(b, c), a) + commutator(commutator(c, a), b)
    assert np.abs(jac).max() <= 1e-11
