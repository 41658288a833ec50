import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qheis import _backend, _pykernels
from qheis.algebra import (BumpProfile, Fiber, Product, Term, TestFunction, involution, quotient_multiply,
                           sigma, twisted_convolve, twisted_convolve_grid)
from qheis.gaussian import GaussianSum
from qheis.kernel import GridSpec, eta, quadrature

seeds = st.integers(0, 2 ** 32 - 1)


def test_sigma_examples():
    assert sigma("A", 0.0, [1.0, 2.0], [3.0, 4.0], 1.3) == 1.0
    assert abs(sigma("A", 0.25, [1.0, 0.0], [0.0, 1.0], 0.0) - (-1j)) < 1e-15
    with pytest.raises(ValueError):
        sigma("B", 0.1, [0, 0], [0, 0])


@pytest.mark.parametrize("variant", ["A", "Atilde"])
@given(seed=seeds, r=st.floats(-1.5, 1.5), lam=st.floats(-1.5, 1.5), n=st.sampled_from([1, 2]))
def test_cocycle_identity(variant, seed, r, lam, n):
    rng = np.random.default_rng(seed)
    d = 2 * n + (variant == "Atilde")
    g, h, k = rng.uniform(-2, 2, (3, d))
    lhs = sigma(variant, r, g, h, lam) * sigma(variant, r, quotient_multiply(variant, g, h), k, lam)
    rhs = sigma(variant, r, h, k, lam) * sigma(variant, r, g, quotient_multiply(variant, h, k), lam)
    assert abs(lhs - rhs) < 1e-12
    e = np.zeros(d)
    assert sigma(variant, r, e, g, lam) == 1 and sigma(variant, r, g, e, lam) == 1
    assert sigma(variant, 0.0, g, h, lam) == 1


def test_bump_profile():
    b = BumpProfile(0.5, 1.0)
    assert b(0.5) == 1.0
    assert b(1.5) == 0.0 and b(-0.6) == 0.0
    assert 0 < b(1.2) < 1


def test_fiber_outside_support_is_zero():
    f = TestFunction.gaussian(profile=BumpProfile(0.0, 1.0))
    assert f.fiber(2.0).is_zero
    assert f(0.3, 0.2, 2.0) == 0


def test_fiber_integral_matches_quadrature(rng):
    f = TestFunction.random(rng)
    F = f.fiber(0.4)
    exact = F.xy.total()
    num = quadrature(lambda x, y: F(x, y), [(-7, 7), (-7, 7)], 300)
    assert abs(exact - num) < 1e-8


def test_term_validation():
    with pytest.raises(ValueError):
        Term(1.0, -1.0, (0.0,), 1.0, (0.0,))
    with pytest.raises(ValueError):
        TestFunction("A", 1, (Term(1.0, 1.0, (0.0,), 1.0, (0.0,), aw=2.0),))


def test_abelian_limit_gaussian_convolution():
    f = TestFunction.gaussian()
    conv = twisted_convolve(f, f, 0.0, 0.0)
    X, Y = np.meshgrid(np.linspace(-2, 2, 7), np.linspace(-2, 2, 7))
    np.testing.assert_allclose(conv(X, Y), 0.5 * np.exp(-np.pi * (X ** 2 + Y ** 2) / 2), atol=1e-15)


def test_zero_convolution():
    f = TestFunction.gaussian()
    assert twisted_convolve(TestFunction.zero(), f, 0.3).is_zero


def test_convolution_matches_quadrature(rng):
    f, g = TestFunction.random(rng), TestFunction.random(rng)
    r, lam = 0.6, 0.8
    et = eta(lam, r)
    F, G = f.fiber(r), g.fiber(r)
    conv = twisted_convolve(f, g, r, lam)
    for X, Y in [(0.2, -0.1), (-0.5, 0.4)]:
        num = quadrature(lambda x, y: F(x, y) * G(X - x, Y - y) * np.exp(-2j * np.pi * et * x * (Y - y)),
                         [(-6, 6), (-8, 8)], 400)
        assert abs(conv(X, Y) - num) < 1e-9


def test_extended_convolution_matches_quadrature(rng):
    f, g = (TestFunction.random(rng, "Atilde", aw=(3.0, 5.0)) for _ in range(2))
    r, lam = 0.3, 1.0
    et = eta(lam, r)
    F, G = f.fiber(r), g.fiber(r)
    conv = twisted_convolve(f, g, r, lam)
    X, Y, W = 0.2, -0.1, 0.15

    def integrand(x, y, w):
        e = np.exp(-w)
        return F(x, y, w) * G(e * (X - x), (Y - y) / e, W - w) * np.exp(-2j * np.pi * et * x * (Y - y))
    num = quadrature(integrand, [(-4, 4), (-6, 6), (-2.5, 2.5)], (100, 120, 80))
    assert abs(conv(X, Y, W) - num) < 1e-6 * max(1, abs(num))


@pytest.mark.parametrize("mod", [_pykernels, _backend.compiled_kernels], ids=["python", "compiled"])
def test_grid_convolution_kernels(mod, rng, monkeypatch):
    if mod is None:
        pytest.skip("compiled kernels not built")
    import qheis._backend as be
    monkeypatch.setattr(be, "kernels", mod)
    f, g = (TestFunction.random(rng, ay=(2.0, 4.0)) for _ in range(2))
    spec = GridSpec(1, 64, 5.0)
    t = spec.axis
    ref = twisted_convolve(f, g, 0.3, 1.0).xy(t[:, None], t[None, :])
    got = twisted_convolve_grid(f, g, 0.3, 1.0, spec)
    assert np.max(np.abs(got - ref)) < 1e-9 * np.max(np.abs(ref))


def test_compiled_and_python_kernels_agree(rng):
    if _backend.compiled_kernels is None:
        pytest.skip("compiled kernels not built")
    C, P = _backend.compiled_kernels, _pykernels
    fs = rng.standard_normal((5, 40)) + 1j * rng.standard_normal((5, 40))
    u, y = np.linspace(-3, 3, 32), np.linspace(-2, 2, 40)
    np.testing.assert_allclose(C.naive_rep_kernel(fs, u, y, 0.7, 0.1, 1), P.naive_rep_kernel(fs, u, y, 0.7, 0.1),
                               rtol=1e-12, atol=1e-13)
    F = rng.standard_normal((16, 16)) + 0j
    G = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    t = np.linspace(-2, 2, 16, endpoint=False)
    np.testing.assert_allclose(C.twisted_conv_direct(F, G, t, 0.4, 0.25, 1),
                               P.twisted_conv_direct(F, G, t, 0.4, 0.25), rtol=1e-12, atol=1e-13)


def test_thread_count_does_not_change_results(rng):
    if _backend.compiled_kernels is None:
        pytest.skip("compiled kernels not built")
    C = _backend.compiled_kernels
    fs = rng.standard_normal((3, 50)) + 1j * rng.standard_normal((3, 50))
    u, y = np.linspace(-3, 3, 40), np.linspace(-2, 2, 50)
    np.testing.assert_array_equal(C.naive_rep_kernel(fs, u, y, 0.7, 0.1, 1), C.naive_rep_kernel(fs, u, y, 0.7, 0.1, 4))


@given(seeds, st.floats(-1, 1))
def test_convolution_associative(seed, r):
    rng = np.random.default_rng(seed)
    f, g, h = (TestFunction.random(rng, terms=1) for _ in range(3))
    lam = 0.7
    a = twisted_convolve(Product(f, g, lam), h, r, lam)
    b = twisted_convolve(f, Product(g, h, lam), r, lam)
    z = rng.uniform(-1, 1, (6, 2))
    va, vb = a(z[:, 0], z[:, 1]), b(z[:, 0], z[:, 1])
    assert np.max(np.abs(va - vb)) <= 1e-10 * (1 + np.max(np.abs(va)))


@given(seeds, st.floats(-1, 1))
def test_involution(seed, r):
    rng = np.random.default_rng(seed)
    f, g = TestFunction.random(rng), TestFunction.random(rng)
    lam = 1.0
    z = rng.uniform(-1, 1, (6, 2))
    F = f.fiber(r)
    twice = involution(involution(f, lam), lam).fiber(r)
    np.testing.assert_allclose(twice(z[:, 0], z[:, 1]), F(z[:, 0], z[:, 1]), atol=1e-12)
    # (f * g)^* = g^* * f^*
    lhs = involution(Product(f, g, lam), lam).fiber(r)
    rhs = twisted_convolve(involution(g, lam), involution(f, lam), r, lam)
    a, b = lhs(z[:, 0], z[:, 1]), rhs(z[:, 0], z[:, 1])
    assert np.max(np.abs(a - b)) <= 1e-10 * (1 + np.max(np.abs(a)))


def test_involution_of_real_even_function():
    f = TestFunction.gaussian()
    z = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(involution(f, 0.0).fiber(0.0)(z, z), f.fiber(0.0)(z, z))


def test_involution_explicit(rng):
    f = TestFunction.random(rng)
    r, lam = 0.5, 1.0
    et = eta(lam, r)
    x, y = 0.3, -0.7
    want = np.conj(f(-x, -y, r)) * np.exp(-2j * np.pi * et * x * y)
    assert abs(involution(f, lam).fiber(r)(x, y) - want) < 1e-14
