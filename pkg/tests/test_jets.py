import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bggseq.jets import Jet, jet_arith, jet_partial, jet_reciprocal, jet_space, multi_indices


def poly(terms, dim, order):
    return Jet.from_monomials(terms, dim, order)


def test_multi_indices_graded_lex():
    idx = multi_indices(2, 2)
    assert idx == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert len(multi_indices(3, 4)) == math.comb(7, 3)


def test_coefficients_are_derivative_values():
    # x^2 y / 1 has d_x^2 d_y value 2
    j = poly({(2, 1): 1.0}, 2, 3)
    assert j[(2, 1)] == 2.0


def test_difference_of_squares():
    x = Jet.coordinate(0, 1, 2)
    assert (jet_arith(1 + x, 1 - x, "mul")).allclose(poly({(0,): 1.0, (2,): -1.0}, 1, 2))


def test_adding_zero_is_identity():
    a = Jet(2, 3, np.random.default_rng(0).standard_normal(10))
    assert jet_arith(a, Jet(2, 3), "add") == a


def test_square_of_xy_truncates():
    xy = poly({(1, 1): 1.0}, 2, 3)
    assert np.all((xy * xy).coeffs == 0)


def test_mul_takes_minimum_order():
    a = Jet.constant(2.0, 2, 4)
    b = Jet.constant(3.0, 2, 2)
    assert (a * b).order == 2


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError, match="dimension"):
        jet_arith(Jet(1, 2), Jet(2, 2), "add")


def test_scale_and_unknown_op():
    a = poly({(1,): 1.0}, 1, 2)
    assert jet_arith(a, 3.0, "scale").allclose(poly({(1,): 3.0}, 1, 2))
    with pytest.raises(ValueError):
        jet_arith(a, a, "pow")


def test_reciprocal_geometric_series():
    x = Jet.coordinate(0, 1, 2)
    assert jet_reciprocal(1 + x).allclose(poly({(0,): 1.0, (1,): -1.0, (2,): 1.0}, 1, 2))


def test_reciprocal_of_constant():
    assert jet_reciprocal(Jet.constant(2.0, 1, 3)).coeffs.tolist() == [0.5, 0.0, 0.0, 0.0]


def test_reciprocal_two_variable_first_order():
    a = poly({(0, 0): 2.0, (1, 0): 1.0, (0, 1): 1.0}, 2, 1)
    r = jet_reciprocal(a)
    assert np.allclose(r.coeffs, [0.5, -0.25, -0.25], atol=1e-15)
    assert (a * r).allclose(Jet.constant(1.0, 2, 1), atol=1e-15)


def test_reciprocal_of_zero_constant_term_raises():
    with pytest.raises(ZeroDivisionError):
        jet_reciprocal(Jet.coordinate(0, 1, 2))


def test_partial_lowers_order():
    f = poly({(2, 1): 1.0}, 2, 3)
    d = jet_partial(f, 0)
    assert d.order == 2
    assert d.allclose(poly({(1, 1): 2.0}, 2, 2))


def test_partial_of_constant_is_zero():
    assert not np.any(jet_partial(Jet.constant(5.0, 2, 3), 0).coeffs)


def test_partial_of_order_zero_jet_raises():
    with pytest.raises(ValueError, match="order"):
        jet_partial(Jet.constant(1.0, 2, 0), 0)


def test_mixed_partials_commute():
    rng = np.random.default_rng(3)
    f = Jet(2, 4, rng.standard_normal(15))
    assert jet_partial(jet_partial(f, 0), 1) == jet_partial(jet_partial(f, 1), 0)


def test_non_finite_coefficients_rejected():
    with pytest.raises(ValueError, match="finite"):
        Jet(1, 1, [np.nan, 0.0])


def test_array_space_transcendentals_match_series():
    sp = jet_space(1, 5)
    x = sp.coordinate(0)
    expx = sp.exp(x)
    assert np.allclose(expx, np.ones(6))
    log1p = sp.log(sp.constant(1.0) + x)
    want = [0.0] + [(-1) ** (k - 1) * math.factorial(k - 1) for k in range(1, 6)]
    assert np.allclose(log1p, want)


def test_inverse_matrix_and_determinant():
    sp = jet_space(2, 3)
    rng = np.random.default_rng(1)
    m = sp.constant(np.eye(3) * 2) + 0.3 * sp.random(rng, (3, 3))
    inv = sp.inv_matrix(m)
    assert np.allclose(sp.matmul(m, inv), sp.constant(np.eye(3)), atol=1e-12)
    det_inv = sp.det(inv)
    assert np.allclose(sp.mul(sp.det(m), det_inv), sp.constant(1.0), atol=1e-12)


# -- properties -----------------------------------------------------------

coeff = st.floats(min_value=-3, max_value=3, allow_nan=False)


@st.composite
def jets(draw, dim=2, order=3):
    size = math.comb(dim + order, dim)
    return Jet(dim, order, draw(st.lists(coeff, min_size=size, max_size=size)))


@settings(max_examples=60, deadline=None)
@given(jets(), jets(), jets())
def test_ring_axioms(a, b, c):
    assert (a * b).allclose(b * a, atol=1e-10)
    assert ((a * b) * c).allclose(a * (b * c), atol=1e-9)
    assert (a * (b + c)).allclose(a * b + a * c, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(jets(), jets(), st.integers(0, 1))
def test_leibniz_rule(a, b, i):
    lhs = jet_partial(a * b, i)
    rhs = jet_partial(a, i) * b + a * jet_partial(b, i)
    assert lhs.allclose(rhs, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(jets(), st.floats(min_value=0.5, max_value=3))
def test_reciprocal_is_two_sided_inverse(a, shift):
    a = Jet(a.dim, a.order, a.coeffs.copy())
    a.coeffs[0] = shift if a.coeffs[0] >= 0 else -shift
    r = jet_reciprocal(a)
    one = Jet.constant(1.0, a.dim, a.order)
    tol = 1e-8 * max(1.0, float(np.abs(r.coeffs).max()))
    assert (a * r).allclose(one, atol=tol)
    assert (r * a).allclose(one, atol=tol)


@settings(max_examples=40, deadline=None)
@given(jets(dim=3, order=2), jets(dim=3, order=2))
def test_product_matches_monomial_convolution(a, b):
    # independent oracle: multiply Taylor coefficients as polynomials
    sp = a.space
    ta = {al: c / math.prod(math.factorial(x) for x in al) for al, c in zip(sp.indices, a.coeffs)}
    tb = {al: c / math.prod(math.factorial(x) for x in al) for al, c in zip(sp.indices, b.coeffs)}
    prod = {}
    for x, cx in ta.items():
        for y, cy in tb.items():
            z = tuple(p + q for p, q in zip(x, y))
            prod[z] = prod.get(z, 0.0) + cx * cy
    assert (a * b).allclose(Jet.from_monomials(prod, 3, 2), atol=1e-10)
