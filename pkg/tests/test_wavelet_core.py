import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wigner_mrsolve.errors import InvalidArgumentError, UnsupportedOrderError
from wigner_mrsolve.wavelet_core import (
    CoefficientPyramid, basis_entropy, best_basis, cascade_evaluate, connection_coefficients,
    daubechies_filter, dwt_1d, dwt_2d, idwt_1d, inverse_dwt_2d, reconstruct, scaling_moments,
    shannon_entropy, standard_basis_leaves, two_scale_residual,
)

# Published Daubechies-2 (db2) and Daubechies-4 low-pass coefficients
DB2 = [0.48296291314453414, 0.8365163037378079, 0.22414386804201339, -0.12940952255126037]
DB4_HEAD = [0.23037781330885523, 0.7148465705525415, 0.6308807679295904, -0.02798376941698385]


@pytest.mark.parametrize("order", range(1, 11))
def test_filter_orthonormality(order):
    h = daubechies_filter(order).low_pass
    g = daubechies_filter(order).high_pass
    assert h.size == 2 * order
    assert h.sum() == pytest.approx(np.sqrt(2), abs=1e-12)
    for m in range(order):
        shifted = np.dot(h[2 * m:], h[:h.size - 2 * m])
        assert shifted == pytest.approx(1.0 if m == 0 else 0.0, abs=1e-12)
        assert abs(np.dot(g[2 * m:], h[:h.size - 2 * m])) < 1e-12
    k = np.arange(h.size)
    for j in range(order):
        # vanishing wavelet moments
        assert abs(np.dot(g, k ** j)) < 1e-9 * max(1, h.size ** j)


def test_known_filters():
    assert np.allclose(daubechies_filter(2).low_pass, DB2, atol=1e-14)
    assert np.allclose(daubechies_filter(4).low_pass[:4], DB4_HEAD, atol=1e-13)
    assert np.allclose(daubechies_filter(1).low_pass, [2 ** -0.5] * 2, atol=1e-15)


def test_filter_order_bounds():
    for bad in (0, 11):
        with pytest.raises(InvalidArgumentError):
            daubechies_filter(bad)


def test_cascade_two_scale_relation():
    x, phi = cascade_evaluate(3, 8)
    assert two_scale_residual(3, x, phi) < 1e-10
    dx = x[1] - x[0]
    assert phi.sum() * dx == pytest.approx(1.0, abs=1e-8)


def test_scaling_moments_first():
    m = scaling_moments(3, 3)
    assert m[0] == 1.0
    # M2 = M1^2 for Daubechies filters of order >= 2 (approximately for D3)
    assert m[2] == pytest.approx(m[1] ** 2, rel=1e-2)


@pytest.mark.parametrize("order,d", [(3, 1), (4, 2), (6, 1), (6, 2), (6, 3), (8, 5)])
def test_connection_moments(order, d):
    table = connection_coefficients(order, d)
    from math import factorial

    assert table.moment(d) == pytest.approx((-1) ** d * factorial(d), abs=1e-10)
    for j in range(d):
        assert abs(table.moment(j)) < 1e-10
    assert np.allclose(table.gamma, (-1) ** d * table.gamma[::-1], atol=1e-14)


def test_connection_d1_d3_known_values():
    g = connection_coefficients(3, 1)
    # exact rationals for the Daubechies-3 first-derivative table (magnitudes)
    exact = {1: 272 / 365, 2: 53 / 365, 3: 16 / 1095, 4: 1 / 2920}
    for k, v in exact.items():
        assert abs(abs(g[k]) - v) < 1e-12
        assert g[k] == pytest.approx(-g[-k], abs=1e-14)
    # sum k Gamma_k = -1 fixes the sign: Gamma_1 < 0
    assert g[1] < 0


def test_connection_order_rejected():
    with pytest.raises(UnsupportedOrderError):
        connection_coefficients(2, 2)
    with pytest.raises(UnsupportedOrderError):
        connection_coefficients(6, 6)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 8), st.integers(3, 7), st.integers(0, 2 ** 31 - 1))
def test_dwt_1d_roundtrip_parseval(order, level, seed):
    x = np.random.default_rng(seed).standard_normal(2 ** level)
    levels = level - 1
    c = dwt_1d(x, order, levels)
    assert np.dot(c, c) == pytest.approx(np.dot(x, x), rel=1e-10)
    assert np.allclose(idwt_1d(c, order, levels), x, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([2, 4, 6]), st.integers(1, 4), st.integers(0, 2 ** 31 - 1))
def test_dwt_2d_roundtrip_parseval(order, levels, seed):
    v = np.random.default_rng(seed).standard_normal((32, 32))
    pyr = dwt_2d(v, order, levels)
    assert pyr.energy() == pytest.approx(float(np.sum(v * v)), rel=1e-10)
    assert np.allclose(inverse_dwt_2d(pyr), v, atol=1e-10)
    packed = pyr.to_array()
    again = CoefficientPyramid.from_array(packed, levels, order)
    assert np.array_equal(again.to_array(), packed)


def test_dwt_rejects_non_dyadic():
    with pytest.raises(InvalidArgumentError):
        dwt_2d(np.zeros((24, 24)), 2, 1)


def test_entropy_of_delta_and_uniform():
    assert shannon_entropy(np.array([0.0, 3.0, 0.0])) == 0.0
    assert shannon_entropy(np.ones(16)) == pytest.approx(np.log(16))


def test_best_basis_tiles_and_reconstructs():
    rng = np.random.default_rng(5)
    v = rng.standard_normal((32, 32))
    tree, blocks = best_basis(v, 4, 3)
    assert tree.covers_exactly_once(5)
    assert np.allclose(reconstruct(blocks, 4), v, atol=1e-10)
    assert tree.entropy_total <= basis_entropy(v, 4, standard_basis_leaves(3), 3) + 1e-12


def test_best_basis_zero_field():
    with pytest.raises(InvalidArgumentError):
        best_basis(np.zeros((16, 16)), 2, 2)
