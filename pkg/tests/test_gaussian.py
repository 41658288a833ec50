import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qheis.gaussian import GaussianSum
from qheis.kernel import quadrature


def random_sum(rng, d=2, terms=2):
    out = GaussianSum.zero(d)
    for _ in range(terms):
        B = rng.standard_normal((d, d))
        A = B @ B.T + np.eye(d) + 1j * 0.5 * (lambda C: C + C.T)(rng.standard_normal((d, d)))
        b = rng.standard_normal(d) * 0.5 + 1j * rng.standard_normal(d)
        out = out + GaussianSum.single(complex(*rng.standard_normal(2)), A, b)
    return out


def test_unit_gaussian_total_and_fourier():
    g = GaussianSum.isotropic(1.0, np.pi, [0.0])
    assert g.total() == pytest.approx(1.0, abs=1e-15)
    k = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(g.fourier([0])(k), np.exp(-np.pi * k ** 2), atol=1e-15)


def test_integrate_matches_quadrature(rng):
    g = random_sum(rng)
    exact = g.total()
    num = quadrature(lambda x, y: g(x, y), [(-8, 8), (-8, 8)], 400)
    assert abs(exact - num) < 1e-10 * max(1, abs(exact))


def test_partial_integral(rng):
    g = random_sum(rng)
    part = g.integrate([1])
    for x in (-0.4, 0.0, 0.9):
        num = quadrature(lambda y: g(np.full_like(y, x), y), [(-10, 10)], 800)
        assert abs(part(np.array([x])) - num) < 1e-10


def test_fourier_matches_quadrature(rng):
    g = random_sum(rng)
    G = g.fourier([0, 1])
    for k in ([0.3, -0.2], [1.0, 0.5]):
        num = quadrature(lambda x, y: g(x, y) * np.exp(-2j * np.pi * (k[0] * x + k[1] * y)),
                         [(-8, 8), (-8, 8)], 400)
        assert abs(G(*k) - num) < 1e-10


def test_plancherel(rng):
    g = random_sum(rng)
    assert g.fourier([0, 1]).norm() == pytest.approx(g.norm(), rel=1e-12)


def test_product_and_affine(rng):
    g, h = random_sum(rng), random_sum(rng)
    z = rng.standard_normal((5, 2))
    np.testing.assert_allclose((g * h)(z), g(z) * h(z), rtol=1e-12)
    M = np.array([[1.0, 0.5], [-0.3, 2.0]])
    t = np.array([0.1, -0.2])
    np.testing.assert_allclose(g.affine(M, t)(z), g(z @ M.T + t), rtol=1e-12)


def test_linear_ops(rng):
    g, h = random_sum(rng), random_sum(rng)
    z = rng.standard_normal((4, 2))
    np.testing.assert_allclose((g - h)(z), g(z) - h(z))
    np.testing.assert_allclose(g.scale(2j)(z), 2j * g(z))
    np.testing.assert_allclose(g.conj()(z), np.conj(g(z)))
    with pytest.raises(ValueError):
        g + GaussianSum.zero(3)


def test_inner_matches_quadrature(rng):
    g, h = random_sum(rng), random_sum(rng)
    num = quadrature(lambda x, y: np.conj(g(x, y)) * h(x, y), [(-8, 8), (-8, 8)], 400)
    assert abs(g.inner(h) - num) < 1e-10


def test_divergent_integral_rejected():
    g = GaussianSum.single(1.0, [[-1.0]], [0.0])
    with pytest.raises(ValueError):
        g.total()


def test_prune_relative_and_support(rng):
    g = GaussianSum.isotropic(1.0, 1.0, [0.0]) + GaussianSum.isotropic(1e-30, 1.0, [0.0])
    assert len(g.prune_relative(1e-18)) == 1
    R = g.support_radius(1e-17)
    assert abs(g(np.array([R]))) <= 1e-17 * 1.0001


@given(st.floats(0.2, 5.0), st.floats(-2, 2), st.floats(1e-12, 1e-3))
def test_support_radius_bounds_tail(a, c, eps):
    g = GaussianSum.single(1.0, [[a]], [2 * a * c])
    R = g.support_radius(eps)
    peak = g.peaks().max()
    for x in (R, -R, 1.1 * R):
        assert abs(g(np.array([x]))) <= eps * peak * (1 + 1e-9)


def test_marginal_support_radius():
    # strongly correlated 2d Gaussian: the x marginal is wider than the x slice
    A = np.array([[2.0, 1.9], [1.9, 2.0]])
    g = GaussianSum.single(1.0, A, [0.0, 0.0])
    full = g.support_radius(1e-12)
    marg = g.support_radius(1e-12, idx=[0])
    assert marg <= full
    # maximize over y at x = marg: below threshold
    y = np.linspace(-50, 50, 20001)
    assert np.max(np.abs(g(np.full_like(y, marg * 1.0001), y))) <= 1e-12
