"""The dense subalgebras of Gaussian-phase test functions: cocycles,
twisted convolution and involution.

Conventions fixed by multiplicativity of the representations:

    (f * g)(X, Y; r) = int f(x, y; r) g(X - x, Y - y; r) ebar[eta(r) x.(Y - y)] dx dy
    f^*(x, y; r)     = conj f(-x, -y; r) ebar[eta(r) x.y]

and on the extended algebra, with h^-1 k = (e^-w (X - x), e^w (Y - y), W - w),

    (f * g)(X, Y, W; r) = int f(x, y, w; r) g(h^-1 k; r) ebar[eta(r) x.(Y - y)] dx dy dw.

The phase is sigma(h, h^-1 k) in both cases.  Haar measure on the
extended quotient is dx dy dw (the dilation has determinant one).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .gaussian import GaussianSum
from .kernel import beta, ebar, eta

VARIANTS = ("A", "Atilde")


# ----------------------------------------------------------------------------
# cocycles
# ----------------------------------------------------------------------------

def sigma(variant: str, r: float, g1, g2, lam: float = 1.0):
    """Cocycle of H/Z (variant A) or Htilde/Z (variant Atilde).

    g1, g2 hold (x, y) or (x, y, w) along the last axis; the w of g1 enters
    the Atilde cocycle.
    """
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if variant == "A":
        n = g1.shape[-1] // 2
        return ebar(eta(lam, r) * beta(g1[..., :n], g2[..., n:2 * n]))
    if variant == "Atilde":
        n = (g1.shape[-1] - 1) // 2
        w = g1[..., 2 * n]
        return ebar(np.exp(-w) * eta(lam, r) * beta(g1[..., :n], g2[..., n:2 * n]))
    raise ValueError(f"unknown variant {variant!r}")


def quotient_multiply(variant: str, g1, g2):
    """Product in H/Z or Htilde/Z (the central coordinate dropped)."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if variant == "A":
        return g1 + g2
    n = (g1.shape[-1] - 1) // 2
    w = g1[..., 2 * n:2 * n + 1]
    return np.concatenate([g1[..., :n] + np.exp(w) * g2[..., :n],
                           g1[..., n:2 * n] + np.exp(-w) * g2[..., n:2 * n],
                           g1[..., 2 * n:] + g2[..., 2 * n:]], axis=-1)


# ----------------------------------------------------------------------------
# test functions
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class BumpProfile:
    """Smooth compactly supported profile  exp(1 - 1/(1 - t^2)),  t = (r - c)/h."""

    center: float = 0.0
    halfwidth: float = 4.0

    def __call__(self, r):
        t = (np.asarray(r, dtype=float) - self.center) / self.halfwidth
        inside = np.abs(t) < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            val = np.where(inside, np.exp(1.0 - 1.0 / np.where(inside, 1.0 - t * t, 1.0)), 0.0)
        return val[()] if val.ndim == 0 else val

    @property
    def support(self):
        return (self.center - self.halfwidth, self.center + self.halfwidth)


@dataclass(frozen=True)
class Term:
    """coeff * exp(-ax|x|^2 + bx.x) exp(-ay|y|^2 + by.y) [exp(-aw w^2 + bw w)] * profile(r)."""

    coeff: complex
    ax: complex
    bx: tuple
    ay: complex
    by: tuple
    profile: BumpProfile = field(default_factory=BumpProfile)
    aw: complex | None = None
    bw: complex = 0.0

    def __post_init__(self):
        for a in (self.ax, self.ay) + ((self.aw,) if self.aw is not None else ()):
            if not np.real(a) > 0:
                raise ValueError("Gaussian factors need a positive real quadratic part")


@dataclass(frozen=True)
class Fiber:
    """A test function frozen at one r.

    ``xy`` is a GaussianSum over (x, y).  For the extended variant ``w`` is a
    one-dimensional GaussianSum paired with ``xy`` term by term:
    value = sum_t xy_t(x, y) w_t(w).
    """

    r: float
    variant: str
    n: int
    xy: GaussianSum
    w: GaussianSum | None = None

    def __post_init__(self):
        if self.variant == "Atilde":
            if self.w is None or len(self.w) != len(self.xy):
                raise ValueError("extended fibers need paired w factors")

    def fiber(self, r: float) -> "Fiber":
        if not np.isclose(r, self.r, rtol=0, atol=1e-14):
            raise ValueError("fiber requested at a different r")
        return self

    @property
    def is_zero(self) -> bool:
        return len(self.xy) == 0

    def __call__(self, x, y, w=None):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.n == 1:
            coords = (x, y)
        else:
            coords = tuple(np.moveaxis(x, -1, 0)) + tuple(np.moveaxis(y, -1, 0))
        if self.is_zero:
            return np.zeros(np.broadcast_shapes(*[np.shape(c) for c in coords]), dtype=complex)
        if self.variant == "A":
            return self.xy(*coords)
        tx = self.xy.evaluate_terms(*coords)
        tw = self.w.evaluate_terms(np.asarray(w, dtype=float))
        return np.sum(tx * tw, axis=0)

    def w_factors_on(self, wgrid: np.ndarray) -> np.ndarray:
        """(T, Nw) matrix of the paired w factors on a grid."""
        return self.w.evaluate_terms(wgrid)

    def scale(self, c) -> "Fiber":
        return Fiber(self.r, self.variant, self.n, self.xy.scale(c), self.w)

    def __add__(self, other: "Fiber") -> "Fiber":
        _same(self, other)
        w = None if self.variant == "A" else self.w + other.w
        return Fiber(self.r, self.variant, self.n, self.xy + other.xy, w)

    def modulate(self, p, q) -> "Fiber":
        """Multiply by ebar(p.x + q.y)."""
        p = np.atleast_1d(np.asarray(p, dtype=float))
        q = np.atleast_1d(np.asarray(q, dtype=float))
        b = -2j * np.pi * np.concatenate([p, q])
        return Fiber(self.r, self.variant, self.n, self.xy.multiply_exp(b=b), self.w)

    def support_radius(self, eps: float = 1e-17) -> float:
        return self.xy.support_radius(eps)

    def w_support(self, eps: float = 1e-17):
        """Interval outside which every term is below eps times the largest peak."""
        pk = self.xy.peaks() * self.w.peaks()
        top = pk.max()
        lo, hi = np.inf, -np.inf
        for p, A, b in zip(pk, self.w.A, self.w.b):
            if p == 0.0:
                continue
            a = A[0, 0].real
            c = b[0].real / (2 * a)
            rad = np.sqrt(max(np.log(p / (eps * top)), 0.0) / a)
            lo, hi = min(lo, c - rad), max(hi, c + rad)
        return lo, hi

    def w_sigma(self) -> float:
        return float(min(1.0 / np.sqrt(2 * A[0, 0].real) for A in self.w.A))


def _same(f: Fiber, g: Fiber):
    if f.variant != g.variant or f.n != g.n or not np.isclose(f.r, g.r, rtol=0, atol=1e-14):
        raise ValueError("fibers live in different algebras or at different r")


def zero_fiber(r: float, variant: str, n: int) -> Fiber:
    w = GaussianSum.zero(1) if variant == "Atilde" else None
    return Fiber(r, variant, n, GaussianSum.zero(2 * n), w)


class Evaluable(Protocol):
    variant: str
    n: int

    def fiber(self, r: float) -> Fiber: ...


@dataclass(frozen=True)
class TestFunction:
    """Finite sum of Gaussian-phase terms with compact r-profiles."""

    __test__ = False

    variant: str
    n: int
    terms: tuple = ()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        for t in self.terms:
            if (t.aw is None) != (self.variant == "A"):
                raise ValueError("w factor present exactly for the extended variant")
            if len(t.bx) != self.n or len(t.by) != self.n:
                raise ValueError("term dimension mismatch")

    def fiber(self, r: float) -> Fiber:
        n = self.n
        live = [(t, t.profile(r)) for t in self.terms]
        live = [(t, v) for t, v in live if v != 0.0]
        if not live:
            return zero_fiber(r, self.variant, n)
        c = np.array([t.coeff * v for t, v in live], dtype=complex)
        A = np.zeros((len(live), 2 * n, 2 * n), dtype=complex)
        b = np.zeros((len(live), 2 * n), dtype=complex)
        for i, (t, _) in enumerate(live):
            A[i, :n, :n] = t.ax * np.eye(n)
            A[i, n:, n:] = t.ay * np.eye(n)
            b[i, :n] = t.bx
            b[i, n:] = t.by
        xy = GaussianSum(c, A, b)
        w = None
        if self.variant == "Atilde":
            w = GaussianSum(np.ones(len(live)), np.array([[[t.aw]] for t, _ in live]),
                            np.array([[t.bw] for t, _ in live]))
        return Fiber(float(r), self.variant, n, xy, w)

    def __call__(self, x, y, r, w=None):
        return self.fiber(r)(x, y, w)

    def __add__(self, other: "TestFunction") -> "TestFunction":
        if (self.variant, self.n) != (other.variant, other.n):
            raise ValueError("test functions live in different algebras")
        return TestFunction(self.variant, self.n, self.terms + other.terms)

    def scale(self, c) -> "TestFunction":
        return TestFunction(self.variant, self.n,
                            tuple(Term(c * t.coeff, t.ax, t.bx, t.ay, t.by, t.profile, t.aw, t.bw)
                                  for t in self.terms))

    @staticmethod
    def zero(variant: str = "A", n: int = 1) -> "TestFunction":
        return TestFunction(variant, n, ())

    @staticmethod
    def gaussian(n: int = 1, a: float = np.pi, variant: str = "A", aw: float = 20.0,
                 profile: BumpProfile | None = None) -> "TestFunction":
        """exp(-a(|x|^2 + |y|^2)) [exp(-aw w^2)] with a wide bump in r."""
        z = (0.0,) * n
        t = Term(1.0, a, z, a, z, profile or BumpProfile(), aw if variant == "Atilde" else None, 0.0)
        return TestFunction(variant, n, (t,))

    @staticmethod
    def random(rng: np.random.Generator, variant: str = "A", n: int = 1, terms: int = 2,
               ax=(2.0, 4.0), ay=(0.6, 1.5), aw=(16.0, 24.0), chirp: float = 1.0) -> "TestFunction":
        """Random Gaussian-phase element with terms centred near the origin."""
        out = []
        for _ in range(terms):
            coeff = complex(rng.normal(), rng.normal())
            bx = tuple(complex(rng.uniform(-0.5, 0.5), rng.uniform(-chirp, chirp)) for _ in range(n))
            by = tuple(complex(rng.uniform(-0.3, 0.3), rng.uniform(-chirp, chirp)) for _ in range(n))
            prof = BumpProfile(rng.uniform(-0.5, 0.5), 4.0)
            if variant == "Atilde":
                out.append(Term(coeff, rng.uniform(*ax), bx, rng.uniform(*ay), by, prof,
                                rng.uniform(*aw), complex(0.0, rng.uniform(-chirp, chirp))))
            else:
                out.append(Term(coeff, rng.uniform(*ax), bx, rng.uniform(*ay), by, prof))
        return TestFunction(variant, n, tuple(out))


def evaluate_fiber(f: Evaluable, r: float) -> Fiber:
    return f.fiber(r)


# ----------------------------------------------------------------------------
# twisted convolution
# ----------------------------------------------------------------------------

def _select(n: int, rows: list, dim: int) -> np.ndarray:
    M = np.zeros((2 * n, dim))
    for i, j in enumerate(rows):
        M[i, j] = 1.0
    return M


def _convolve_xy(fxy: GaussianSum, gxy: GaussianSum, n: int, et: float,
                 gscale: float = 1.0) -> GaussianSum:
    """int f(x,y) g(s^-1 (X - x), s (Y - y)) ebar[et x.(Y - y)] dx dy  with s = gscale."""
    d = 4 * n
    ix = list(range(0, n))
    iy = list(range(n, 2 * n))
    iX = list(range(2 * n, 3 * n))
    iY = list(range(3 * n, 4 * n))
    F = fxy.affine(_select(n, ix + iy, d))
    Mg = np.zeros((2 * n, d))
    for k in range(n):
        Mg[k, iX[k]] = 1.0 / gscale
        Mg[k, ix[k]] = -1.0 / gscale
        Mg[n + k, iY[k]] = gscale
        Mg[n + k, iy[k]] = -gscale
    Gs = gxy.affine(Mg)
    Q = np.zeros((d, d), dtype=complex)
    for k in range(n):
        Q[ix[k], iY[k]] = Q[iY[k], ix[k]] = 1j * np.pi * et
        Q[ix[k], iy[k]] = Q[iy[k], ix[k]] = -1j * np.pi * et
    return (F * Gs).multiply_exp(A=Q).integrate(ix + iy)


def twisted_convolve(f: Evaluable, g: Evaluable, r: float, lam: float = 1.0,
                     w_nodes: np.ndarray | None = None) -> Fiber:
    """Fiber at r of the twisted convolution f * g.

    The xy-integral is done in closed form.  For the extended variant the
    w-integral is a trapezoid sum over ``w_nodes`` (chosen from the widths
    of the w factors when omitted), so the result is again a paired fiber.
    """
    if f.variant != g.variant or f.n != g.n:
        raise ValueError("variant mismatch")
    F, G = f.fiber(r), g.fiber(r)
    n = F.n
    if F.is_zero or G.is_zero:
        return zero_fiber(r, F.variant, n)
    et = float(eta(lam, r))
    if F.variant == "A":
        return Fiber(float(r), "A", n, _convolve_xy(F.xy, G.xy, n, et))
    if w_nodes is None:
        lo, hi = F.w_support()
        step = min(F.w_sigma(), G.w_sigma()) / 1.5
        m = int(np.ceil((hi - lo) / step))
        w_nodes = np.linspace(lo, hi, m + 1)
    w_nodes = np.asarray(w_nodes, dtype=float)
    hw = np.full(len(w_nodes), (w_nodes[-1] - w_nodes[0]) / (len(w_nodes) - 1) if len(w_nodes) > 1 else 1.0)
    fw = F.w_factors_on(w_nodes)              # (Tf, Nw)
    Tf, Tg = len(F.xy), len(G.xy)
    xy_parts, w_parts = [], []
    for k, wk in enumerate(w_nodes):
        conv = _convolve_xy(F.xy, G.xy, n, et, gscale=np.exp(wk))   # Tf*Tg terms, f-major
        weights = np.repeat(hw[k] * fw[:, k], Tg)
        xy_parts.append(GaussianSum(conv.c * weights, conv.A, conv.b))
        shifted = G.w.affine(np.eye(1), np.array([-wk]))             # g_w(W - wk)
        w_parts.append(GaussianSum(np.tile(shifted.c, Tf), np.tile(shifted.A, (Tf, 1, 1)),
                                   np.tile(shifted.b, (Tf, 1))))
    xy = xy_parts[0]
    w = w_parts[0]
    for a, b in zip(xy_parts[1:], w_parts[1:]):
        xy = xy + a
        w = w + b
    # fold the w-term coefficients into xy so the w factors stay monic in c
    wc = w.c
    xy = GaussianSum(xy.c * wc, xy.A, xy.b)
    w = GaussianSum(np.ones_like(wc), w.A, w.b)
    pk = xy.peaks() * w.peaks()
    keep = pk >= 1e-18 * pk.max()
    return Fiber(float(r), "Atilde", n, GaussianSum(xy.c[keep], xy.A[keep], xy.b[keep]),
                 GaussianSum(w.c[keep], w.A[keep], w.b[keep]))


def twisted_convolve_grid(f: Evaluable, g: Evaluable, r: float, lam: float, spec) -> np.ndarray:
    """Fiber at r of f * g by direct quadrature on the (x, y) grid of ``spec``.

    Quadratic in the grid size per output point; used to cross-check the
    closed form and to benchmark the compiled kernel.  n = 1, variant A."""
    from ._backend import kernels, threads
    if f.variant != "A" or g.variant != "A" or f.n != 1 or g.n != 1:
        raise ValueError("grid convolution is implemented for variant A with n = 1")
    t = spec.axis
    F = np.ascontiguousarray(f.fiber(r).xy(t[:, None], t[None, :]))
    G = np.ascontiguousarray(g.fiber(r).xy(t[:, None], t[None, :]))
    return kernels.twisted_conv_direct(F, G, np.ascontiguousarray(t), float(eta(lam, r)), spec.h, threads())


# ----------------------------------------------------------------------------
# involution
# ----------------------------------------------------------------------------

def _involute_fiber(F: Fiber, lam: float) -> Fiber:
    if F.variant != "A":
        raise ValueError("involution is implemented for the A variant")
    n = F.n
    if F.is_zero:
        return F
    et = float(eta(lam, F.r))
    Q = np.zeros((2 * n, 2 * n), dtype=complex)
    for k in range(n):
        Q[k, n + k] = Q[n + k, k] = 1j * np.pi * et
    xy = F.xy.conj().affine(-np.eye(2 * n)).multiply_exp(A=Q)
    return Fiber(F.r, "A", n, xy)


@dataclass(frozen=True)
class Involuted:
    """Lazily evaluated f^*."""

    base: Evaluable
    lam: float = 1.0

    @property
    def variant(self):
        return self.base.variant

    @property
    def n(self):
        return self.base.n

    def fiber(self, r: float) -> Fiber:
        return _involute_fiber(self.base.fiber(r), self.lam)


def involution(f: Evaluable, lam: float = 1.0):
    """f^*(x, y; r) = conj f(-x, -y; r) ebar[eta(r) x.y]."""
    if f.variant != "A":
        raise ValueError("involution is implemented for the A variant")
    if isinstance(f, Fiber):
        return _involute_fiber(f, lam)
    return Involuted(f, lam)


@dataclass(frozen=True)
class Product:
    """Lazily evaluated f * g (fiberwise)."""

    left: Evaluable
    right: Evaluable
    lam: float = 1.0

    @property
    def variant(self):
        return self.left.variant

    @property
    def n(self):
        return self.left.n

    def fiber(self, r: float) -> Fiber:
        return twisted_convolve(self.left, self.right, r, self.lam)
