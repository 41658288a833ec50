import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qheis.kernel import (GridSpec, GridVector, LinearOperator, affine_resample_2d, beta, dilate, ebar, eta,
                          fourier_resample, gaussian_battery, operator_residual, quadrature, shift_zero_fill,
                          unit_gaussian_battery, unitarity_residual)

reals = st.floats(-50, 50, allow_nan=False)


def test_ebar_values():
    assert ebar(0.0) == 1.0
    assert abs(ebar(0.25) - (-1j)) < 1e-15
    assert abs(ebar(0.5) + 1) < 1e-15
    assert abs(ebar(1e12 + 0.25) - (-1j)) < 1e-15


def test_ebar_rejects_nonfinite():
    with pytest.raises(ValueError):
        ebar(np.inf)


@given(reals, reals)
def test_ebar_character(s, t):
    assert abs(ebar(s + t) - ebar(s) * ebar(t)) < 1e-12
    assert abs(abs(ebar(s)) - 1) < 1e-14


def test_eta_closed_form():
    assert eta(1.0, 0.5) == pytest.approx((np.e - 1) / 2, rel=1e-15)
    assert eta(0.0, 0.7) == 0.7
    assert eta(2.0, 0.0) == 0.0


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_eta_continuous_in_lambda(lam, r):
    # series branch and expm1 branch agree across the switch
    a = eta(lam, r)
    b = eta(lam * (1 + 1e-9), r)
    assert abs(a - b) <= 1e-7 * (1 + abs(a))
    assert eta(-lam, -r) == pytest.approx(-eta(lam, r), rel=1e-12, abs=1e-300)


def test_eta_small_lambda_limit():
    for lam in (1e-3, 1e-6, 1e-9, 0.0):
        r = 1.3
        assert eta(lam, r) == pytest.approx(r + lam * r ** 2 + 2 * lam ** 2 * r ** 3 / 3, rel=1e-8)


def test_eta_vectorized():
    r = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(eta(1.0, r), np.expm1(2 * r) / 2, rtol=1e-14, atol=1e-16)


def test_beta():
    assert beta([1, 2], [3, 4]) == 11
    with pytest.raises(ValueError):
        beta([1, 2], [1, 2, 3])


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(1, 100, 8.0)
    with pytest.raises(ValueError):
        GridSpec(3, 64, 8.0)
    with pytest.raises(ValueError):
        GridSpec(1, 64, 0.0)
    s = GridSpec(1, 64, 4.0)
    assert s.h == 0.125 and s.axis[0] == -4.0 and s.axis[-1] == 4.0 - 0.125


def test_lattice_index_and_snap():
    s = GridSpec(1, 64, 4.0)
    assert s.lattice_index(0.375) == 3
    with pytest.raises(ValueError):
        s.lattice_index(0.3)
    x, err = s.snap(0.3)
    assert x == pytest.approx(0.25) and err == pytest.approx(0.05)


def test_grid_vector_norm():
    s = GridSpec(1, 256, 8.0)
    v = GridVector(s, np.exp(-np.pi * s.axis ** 2))
    assert v.norm() == pytest.approx(2 ** -0.25, rel=1e-12)
    with pytest.raises(ValueError):
        GridVector(s, np.zeros(3))


def test_linear_operator_algebra(rng):
    s = GridSpec(1, 32, 4.0)
    A = LinearOperator.dense(rng.standard_normal((32, 32)), s.shape, s.weight, "A")
    B = LinearOperator.dense(rng.standard_normal((32, 32)), s.shape, s.weight, "B")
    v = rng.standard_normal((3, 32)) + 0j
    np.testing.assert_allclose((A @ B).apply(v), A.apply(B.apply(v)))
    np.testing.assert_allclose((A + B).apply(v), A.apply(v) + B.apply(v))
    np.testing.assert_allclose((A - B).apply(v), A.apply(v) - B.apply(v))
    np.testing.assert_allclose((2j * A).apply(v), 2j * A.apply(v))
    lazy = LinearOperator(A.action, A.shape, A.weight)
    np.testing.assert_allclose(lazy.adjoint().matrix, A.matrix.conj().T)
    with pytest.raises(ValueError):
        A.apply(np.zeros((2, 16)))


def test_operator_residual_and_unitarity():
    s = GridSpec(1, 128, 8.0)
    bat = gaussian_battery(s, 4)
    I = LinearOperator.identity(s.shape, s.weight)
    assert operator_residual(I, I, bat) == 0.0
    assert operator_residual(2.0 * I, I, bat) == pytest.approx(1.0)
    assert unitarity_residual(I, bat) == 0.0
    assert unitarity_residual(2.0 * I, bat) == pytest.approx(1.0)


def test_battery_is_normalized_and_deterministic():
    s = GridSpec(1, 128, 8.0)
    a = gaussian_battery(s, 3, np.random.Generator(np.random.Philox(5)))
    b = gaussian_battery(s, 3, np.random.Generator(np.random.Philox(5)))
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_allclose(a.norms(), 1.0, rtol=1e-13)
    u = unit_gaussian_battery(s, slots=2)
    assert u.values.shape == (1, 128, 128)
    np.testing.assert_allclose(u.norms(), 1.0)


def test_quadrature_gaussian():
    val = quadrature(lambda x, y: np.exp(-np.pi * (x ** 2 + y ** 2)), [(-6, 6), (-6, 6)], 200)
    assert val == pytest.approx(1.0, abs=1e-13)


def test_quadrature_rejects_nonfinite():
    with pytest.raises(ValueError), np.errstate(divide="ignore"):
        quadrature(lambda x: 1 / x, [(-1, 1)], 2)


def test_shift_zero_fill():
    v = np.arange(5.0)
    np.testing.assert_array_equal(shift_zero_fill(v, 2, 0), [2, 3, 4, 0, 0])
    np.testing.assert_array_equal(shift_zero_fill(v, -1, 0), [0, 0, 1, 2, 3])
    np.testing.assert_array_equal(shift_zero_fill(v, 7, 0), 0)


@given(st.floats(-2.0, 2.0))
def test_fourier_resample_shift(d):
    s = GridSpec(1, 256, 8.0)
    u = s.axis
    v = np.exp(-2 * (u - 0.3) ** 2 + 1j * u)
    got = fourier_resample(v, s, u + d)
    ref = np.exp(-2 * (u + d - 0.3) ** 2 + 1j * (u + d))
    assert np.max(np.abs(got - ref)) < 1e-10


def test_dilate():
    s = GridSpec(1, 256, 8.0)
    u = s.axis
    v = np.exp(-np.pi * u ** 2)
    np.testing.assert_allclose(dilate(v, s, 1.5), np.exp(-np.pi * (1.5 * u) ** 2), atol=1e-12)


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_affine_resample_2d(a, b, c, d):
    M = np.array([[a, b], [c, d]])
    if abs(np.linalg.det(M)) < 0.3 or np.abs(M).max() > 1.4 or max(abs(a), abs(c)) < 0.3:
        return
    s = GridSpec(1, 128, 6.0)
    t = s.axis
    f = lambda x, y: np.exp(-2 * (x ** 2 + (y - 0.2) ** 2) + 0.5j * x)
    got = affine_resample_2d(f(t[:, None], t[None, :]), s, M)
    X = a * t[:, None] + b * t[None, :]
    Y = c * t[:, None] + d * t[None, :]
    assert np.max(np.abs(got - f(X, Y))) < 1e-9
