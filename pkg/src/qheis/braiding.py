"""Comultiplication, inner tensor products, intertwiners and the braid
composition.

Inner tensor products are evaluated through the collapsed kernel

    (pi boxtimes rho)(f) = int f(x, y; r_pi + r_rho) Q^pi(e^{lam r_rho} x, e^{lam r_rho} y) (x) Q^rho(x, y) dx dy,

obtained from the (x, y, r) form of the coproduct.  On a tensor grid the
first slot is axis -2 and the second slot axis -1.  Two-slot intertwiners
map H_pi (x) H_rho to H_rho (x) H_pi, so their output array is indexed by
(slot of rho, slot of pi).

Two-slot maps T_rr(r1, r2) act as  zeta(t1, t2) = C xi(M (t1, t2))  with

    M = [[(e^{lam r2} - e^{-lam r2}) e^{-lam r1}, e^{-lam r2}],
         [e^{-lam r1},                            0         ]],
    C = (e^{-lam r1 / 2})^n (e^{-lam r2 / 2})^n,

which is the intertwiner between pi_{r1} boxtimes pi_{r2} and
pi_{r2} boxtimes pi_{r1}.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .algebra import Fiber, twisted_convolve
from .gaussian import GaussianSum
from .groups import GroupElement, GroupId, multiply
from .kernel import (GridSpec, LinearOperator, TestBattery, affine_resample_2d, ebar, eta,
                     fourier_resample, operator_residual, quadrature, shift_zero_fill,
                     unitarity_residual)
from .representations import RepId, integrated_form, _x_offsets

# distance ||T_{r'r} T_{rr'} xi - xi|| for the normalized unit Gaussian at
# (lam, r, r') = (1, 1/2, 1/2), n = 1, from an independent 40-digit evaluation
FROZEN_BRAID_DISTANCE = 0.98431690856531177610


# ----------------------------------------------------------------------------
# coproduct
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Coproduct:
    """Delta f in its two variable forms.

    ``pqr`` evaluates in G-coordinates, where f is represented by its
    partial Fourier transform fhat(p, q, r) = int f(x, y, r) ebar(p.x + q.y);
    ``xyr`` is the (x, y, r) form with the dp dq integral damped by
    exp(-pi eps^2 (|p|^2 + |q|^2)), which turns the delta factor into a
    normalized Gaussian of width eps.
    """

    f: object
    lam: float = 1.0

    def fhat(self, p, q, r) -> complex:
        n = self.f.n
        F = self.f.fiber(r)
        if F.is_zero:
            return 0j
        k = np.concatenate([np.atleast_1d(p), np.atleast_1d(q)]).astype(float)
        return complex(F.xy.fourier(list(range(2 * n)))(*k))

    def pqr(self, g1, g2) -> complex:
        """Delta f(g1, g2) = fhat(e^{lam r'} p + p', e^{lam r'} q + q', r + r')."""
        n = self.f.n
        g1 = np.asarray(g1, dtype=float)
        g2 = np.asarray(g2, dtype=float)
        p, q, r = g1[:n], g1[n:2 * n], g1[2 * n]
        p2, q2, r2 = g2[:n], g2[n:2 * n], g2[2 * n]
        a = np.exp(self.lam * r2)
        return self.fhat(a * p + p2, a * q + q2, r + r2)

    def pqr_via_group(self, g1, g2) -> complex:
        """Same value through the group law of G."""
        gid = GroupId("G", self.f.n, self.lam)
        g = multiply(GroupElement(gid, g1), GroupElement(gid, g2)).coords
        n = self.f.n
        return self.fhat(g[:n], g[n:2 * n], g[2 * n])

    def xyr(self, x, y, r, x2, y2, r2, eps: float = 1e-2):
        n = self.f.n
        x, y, x2, y2 = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (x, y, x2, y2))
        a = np.exp(self.lam * r2)
        d2 = np.sum((a * x2 - x) ** 2 + (a * y2 - y) ** 2, axis=-1) if n > 1 else \
            ((a * x2 - x) ** 2 + (a * y2 - y) ** 2)[..., 0]
        delta = np.exp(-np.pi * d2 / eps ** 2) / eps ** (2 * n)
        xs = x2 if n > 1 else x2[..., 0]
        ys = y2 if n > 1 else y2[..., 0]
        return self.f.fiber(r + r2)(xs, ys) * delta


def comultiply(f, lam: float = 1.0) -> Coproduct:
    if f.variant != "A":
        raise ValueError("the coproduct is implemented for the A variant")
    return Coproduct(f, lam)


# ----------------------------------------------------------------------------
# tensor grids and inner tensor products
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class TensorGridVector:
    spec1: GridSpec
    spec2: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.spec1.shape + self.spec2.shape:
            raise ValueError("tensor samples do not match the grids")
        if not np.all(np.isfinite(v)):
            raise ValueError("tensor samples must be finite")
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        return float(np.sqrt(self.spec1.weight * self.spec2.weight * np.sum(np.abs(self.values) ** 2)))


def tensor_battery(spec: GridSpec, count: int = 6, rng=None) -> TestBattery:
    """Compact tensor battery used for the two-slot checks."""
    from .kernel import gaussian_battery
    return gaussian_battery(spec, count, rng, width=(3.0, 5.0), center=0.5, chirp=1.0, slots=2)


@dataclass(frozen=True)
class Modulated:
    """f(x, y; r) ebar(c (p.x + q.y)) as an evaluable test function."""

    base: object
    p: np.ndarray
    q: np.ndarray

    @property
    def variant(self):
        return self.base.variant

    @property
    def n(self):
        return self.base.n

    def fiber(self, r: float) -> Fiber:
        F = self.base.fiber(r)
        return F if F.is_zero else F.modulate(self.p, self.q)


def _r_of(rep_id: RepId) -> float:
    return rep_id.r if rep_id.tag == "pi_r" else 0.0


def _tensor_rr_action(F: GaussianSum, eta1: float, eta2: float, a: float, spec: GridSpec):
    """out(s1, s2) = h sum_j Fhat_y(x_j, eta1 a s1 + eta2 s2) xi(s1 + a x_j, s2 + x_j).

    The kernel depends on s only through k = eta1 a s1 + eta2 s2, so it is
    evaluated on the strip of grid points where Fhat_y is not negligible.
    """
    u = spec.axis
    N = spec.N
    offs = _x_offsets(F, spec)
    Fy = F.fourier([1]).prune_relative(1e-18)
    kk = (eta1 * a * u[:, None] + eta2 * u[None, :]).reshape(-1)
    idx = np.nonzero(np.abs(kk) <= Fy.support_radius(idx=[1]))[0]
    rows, cols = np.divmod(idx, N)
    ks = kk[idx]
    A, b, logc = Fy.A, Fy.b, np.log(Fy.c.astype(complex))
    base = -A[:, 1, 1][:, None] * ks ** 2 + b[:, 1][:, None] * ks + logc[:, None]

    def kernel(x):
        ex = base + (-A[:, 0, 0] * x * x + b[:, 0] * x)[:, None] - 2 * (A[:, 0, 1] * x)[:, None] * ks
        return np.exp(ex).sum(axis=0)

    k = np.fft.fftfreq(N, 1.0 / N)
    ss = u[rows]

    def act(v):
        out = np.zeros((len(v), len(idx)), dtype=complex)
        # slot-1 axis last and contiguous for the per-offset transforms
        coef = sfft.fft(np.ascontiguousarray(np.swapaxes(v, -1, -2)), axis=-1)
        coef[..., N // 2] = 0.0
        for j in offs:
            xj = j * spec.h
            c2 = cols + j
            t = ss + a * xj
            ok = (c2 >= 0) & (c2 < N) & (t >= -spec.L) & (t < spec.L)
            if not ok.any():
                continue
            K = kernel(xj)
            if not np.any(np.abs(K) > 0.0):
                continue
            sh = sfft.ifft(coef * np.exp(1j * np.pi * k * a * xj / spec.L), axis=-1, overwrite_x=True)
            out[:, ok] += spec.h * K[ok] * sh[:, c2[ok], rows[ok]]
        full = np.zeros(v.shape, dtype=complex)
        full.reshape(len(v), -1)[:, idx] = out
        return full
    return act


def inner_tensor(rep1: RepId, rep2: RepId, f, lam: float | None = None, spec: GridSpec | None = None,
                 backend: str = "fft"):
    """(rep1 boxtimes rep2)(f) through the collapsed kernel.

    Scalars are returned for two one-dimensional factors (evaluated by
    quadrature of the kernel); a single-slot operator when one factor is
    one-dimensional; a tensor-grid operator for pi_r boxtimes pi_r'.
    """
    if f.variant != "A":
        raise ValueError("inner tensor products act on A test functions")
    for rp in (rep1, rep2):
        if rp.tag not in ("pi_pq", "pi_r"):
            raise ValueError("inner tensor products are implemented for representations of A")
    lam = rep1.lam if lam is None else lam
    r1, r2 = _r_of(rep1), _r_of(rep2)
    a = np.exp(lam * r2)
    n = f.n
    if rep1.tag == "pi_pq" and rep2.tag == "pi_pq":
        F = f.fiber(0.0)
        if F.is_zero:
            return 0j
        p, q = rep1.p + rep2.p, rep1.q + rep2.q
        R = F.support_radius(1e-20)
        if n == 1:
            return quadrature(lambda x, y: F(x, y) * ebar(p[0] * x + q[0] * y), [(-R, R), (-R, R)], 600)
        return quadrature(lambda x1, x2, y1, y2: F(np.stack([x1, x2], -1), np.stack([y1, y2], -1))
                          * ebar(p[0] * x1 + p[1] * x2 + q[0] * y1 + q[1] * y2), [(-R, R)] * 4, 60)
    if rep1.tag == "pi_pq":
        # Q^{pi_pq}(e^{lam r} x, e^{lam r} y) multiplies the kernel of pi_r
        g = Modulated(f, a * rep1.p, a * rep1.q)
        return integrated_form(RepId("pi_r", (r2,), lam, n, spec or rep2.grid), g, backend)
    if rep2.tag == "pi_pq":
        g = Modulated(f, rep2.p, rep2.q)
        return integrated_form(RepId("pi_r", (r1,), lam, n, spec or rep1.grid), g, backend)
    if n != 1:
        raise NotImplementedError("tensor-grid inner products are implemented for n = 1")
    spec = spec or rep1.grid or GridSpec(N=512, L=10.0)
    F = f.fiber(r1 + r2)
    shape = spec.shape * 2
    if F.is_zero:
        return LinearOperator(lambda v: np.zeros_like(v), shape, spec.weight ** 2, "0")
    act = _tensor_rr_action(F.xy, float(eta(lam, r1)), float(eta(lam, r2)), a, spec)
    return LinearOperator(act, shape, spec.weight ** 2, f"pi_{r1} [x] pi_{r2}",
                          meta={"r": (r1, r2), "lam": lam})


def flip(spec: GridSpec) -> LinearOperator:
    return LinearOperator(lambda v: np.swapaxes(v, -1, -2).copy(), spec.shape * 2, spec.weight ** 2, "flip")


# ----------------------------------------------------------------------------
# intertwiners
# ----------------------------------------------------------------------------

def braid_matrix(r1: float, r2: float, lam: float):
    """(M, C) of T_rr(r1, r2) (n = 1)."""
    e1, e2 = np.exp(-lam * r1), np.exp(-lam * r2)
    M = np.array([[(np.exp(lam * r2) - e2) * e1, e2], [e1, 0.0]])
    return M, np.exp(-lam * (r1 + r2) / 2)


def composition_closed_form(r: float, rp: float, lam: float, prefactor: str = "derived"):
    """Argument map and prefactor of T_{r'r} T_{rr'} in closed form.

    ``prefactor='derived'`` uses (e^{-lam r})(e^{-lam r'}), the product of
    the two single-step prefactors; ``'literal'`` uses the alternative
    (e^{-lam r})(e^{lam r'}).
    """
    a, b = np.exp(-2 * lam * r), np.exp(-2 * lam * rp)
    M = np.array([[1 - (1 - b) * a, (np.exp(lam * rp) - np.exp(-lam * rp)) * a],
                  [(1 - a) * np.exp(-lam * rp), a]])
    if prefactor == "derived":
        C = np.exp(-lam * (r + rp))
    elif prefactor == "literal":
        C = np.exp(-lam * r) * np.exp(lam * rp)
    else:
        raise ValueError(prefactor)
    return M, C


def affine_operator(M, C, spec: GridSpec, label: str = "") -> LinearOperator:
    M = np.asarray(M, dtype=float)
    return LinearOperator(lambda v: C * affine_resample_2d(v, spec, M), spec.shape * 2,
                          spec.weight ** 2, label, meta={"M": M, "C": C})


def S_operator(p, q, r: float, lam: float, spec: GridSpec, inverse: bool = False,
               shift: str = "fourier") -> LinearOperator:
    """S xi(u) = ebar(p.u) xi(u - q/eta(r)) and its inverse."""
    if r == 0:
        raise ValueError("S needs r != 0")
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if spec.n != 1 or len(p) != 1:
        raise NotImplementedError("grid intertwiners are implemented for n = 1")
    et = float(eta(lam, r))
    d = -q[0] / et if not inverse else q[0] / et
    u = spec.axis
    snapped, snap_err = spec.snap(d)
    if shift == "snap":
        d = float(snapped)
    # inverse: e(p.(u + q/eta)) xi(u + q/eta)
    phase = ebar(p[0] * u) if not inverse else np.conj(ebar(p[0] * (u + d)))
    if shift == "snap":
        act = lambda v: phase * shift_zero_fill(v, int(round(d / spec.h)), axis=-1)
    else:
        act = lambda v: phase * fourier_resample(v, spec, u + d, axis=-1)
    return LinearOperator(act, spec.shape, spec.weight, "S^-1" if inverse else "S",
                          meta={"shift": d, "snap_error": snap_err, "mode": shift})


def T_pq_operator(p, q, r: float, lam: float, spec: GridSpec) -> LinearOperator:
    """S'^{-1} S with S' built from (e^{lam r} p, e^{lam r} q)."""
    a = np.exp(lam * r)
    S = S_operator(p, q, r, lam, spec)
    Sp_inv = S_operator(a * np.atleast_1d(p), a * np.atleast_1d(q), r, lam, spec, inverse=True)
    op = Sp_inv @ S
    return LinearOperator(op.action, op.shape, op.weight, "T_pq",
                          meta={"snap_error": max(S.meta["snap_error"], Sp_inv.meta["snap_error"])})


def T_pq_closed(p, q, r: float, lam: float, spec: GridSpec) -> LinearOperator:
    """The standalone closed form of T_pq."""
    p = float(np.atleast_1d(p)[0])
    q = float(np.atleast_1d(q)[0])
    et = float(eta(lam, r))
    a = np.exp(lam * r)
    u = spec.axis
    d = -q / et + a * q / et
    phase = ebar(p * u - a * p * (u + d))
    return LinearOperator(lambda v: phase * fourier_resample(v, spec, u + d, axis=-1),
                          spec.shape, spec.weight, "T_pq (closed form)")


def T_rr_operator(r1: float, r2: float, lam: float, spec: GridSpec) -> LinearOperator:
    M, C = braid_matrix(r1, r2, lam)
    return affine_operator(M, C, spec, f"T({r1},{r2})")


def r_matrix_factors(r: float, rp: float, lam: float):
    """Substitution matrices and prefactor of the two R factors (n = 1).

    Psi xi(u, v) = xi(S (u, v)) with S = [[1, 2 lam e^{-lam r'} eta(r')], [0, 1]];
    Phi zeta(u, v) = C zeta(D (u, v)) with D = diag(e^{-lam r'}, e^{-lam r}).
    """
    c = 2 * lam * np.exp(-lam * rp) * float(eta(lam, rp))
    S = np.array([[1.0, c], [0.0, 1.0]])
    D = np.diag([np.exp(-lam * rp), np.exp(-lam * r)])
    return S, D, np.exp(-lam * (r + rp) / 2)


def r_matrix_operator(r: float, rp: float, lam: float, spec: GridSpec, parts: bool = False):
    """(pi~_{r,0} (x) pi~_{r',0})(R) = Phi Psi.

    The product is applied as one substitution xi -> C xi(S D z), so the
    sheared intermediate never has to be sampled; ``parts`` returns the two
    factors as separate grid operators.
    """
    S, D, C = r_matrix_factors(r, rp, lam)
    if parts:
        return affine_operator(D, C, spec, "Phi"), affine_operator(S, 1.0, spec, "Psi")
    return affine_operator(S @ D, C, spec, "R")


def fromR_operator(r: float, rp: float, lam: float, spec: GridSpec) -> LinearOperator:
    """flip (pi~ (x) pi~)(R): the braiding built from the R function."""
    S, D, C = r_matrix_factors(r, rp, lam)
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    return affine_operator(S @ D @ P, C, spec, f"fromR({r},{rp})")


def intertwiner(kind: str, spec: GridSpec, lam: float = 1.0, **params) -> LinearOperator:
    """Intertwiner of the given kind: S, S_inv, T_pq, T_pq_closed, T_rr or fromR."""
    if kind == "S":
        return S_operator(params["p"], params["q"], params["r"], lam, spec)
    if kind == "S_inv":
        return S_operator(params["p"], params["q"], params["r"], lam, spec, inverse=True)
    if kind == "T_pq":
        return T_pq_operator(params["p"], params["q"], params["r"], lam, spec)
    if kind == "T_pq_closed":
        return T_pq_closed(params["p"], params["q"], params["r"], lam, spec)
    if kind == "T_rr":
        return T_rr_operator(params["r"], params["rp"], lam, spec)
    if kind == "fromR":
        return fromR_operator(params["r"], params["rp"], lam, spec)
    raise ValueError(f"unknown intertwiner {kind!r}")


def r_matrix_apply(r: float, rp: float, v: TensorGridVector, lam: float = 1.0) -> TensorGridVector:
    if v.spec1 != v.spec2:
        raise ValueError("both slots must share one grid")
    op = r_matrix_operator(r, rp, lam, v.spec1)
    return TensorGridVector(v.spec1, v.spec2, op.apply(v.values))


# ----------------------------------------------------------------------------
# analytic backend
# ----------------------------------------------------------------------------

def affine_gaussian(xi: GaussianSum, M, C) -> GaussianSum:
    """z -> C xi(M z) on Gaussian data."""
    return xi.affine(np.asarray(M, dtype=float)).scale(C)


def unit_gaussian_2d() -> GaussianSum:
    """sqrt(2) exp(-pi |z|^2) on R^2 (unit norm)."""
    return GaussianSum.isotropic(np.sqrt(2.0), np.pi, np.zeros(2))


def braid_distance_analytic(r: float, rp: float, lam: float, xi: GaussianSum | None = None) -> float:
    """||T_{r'r} T_{rr'} xi - xi|| evaluated in closed form."""
    xi = unit_gaussian_2d() if xi is None else xi
    M1, C1 = braid_matrix(r, rp, lam)
    M2, C2 = braid_matrix(rp, r, lam)
    out = affine_gaussian(affine_gaussian(xi, M2, C2), M1, C1)
    d2 = out.inner(out).real + xi.inner(xi).real - 2 * xi.inner(out).real
    return float(np.sqrt(max(d2, 0.0)))


# ----------------------------------------------------------------------------
# quadrature oracle for the R function
# ----------------------------------------------------------------------------

def _trap(lo, hi, m):
    x = np.linspace(lo, hi, m + 1)
    w = np.full(m + 1, (hi - lo) / m)
    w[[0, -1]] *= 0.5
    return x, w


def psi_quadrature(xi: GaussianSum, rp: float, lam: float, u, v, p_nodes: int = 400) -> np.ndarray:
    """(pi~ (x) pi~)(Psi) xi at points (u, v) from the R function.

    With Psi(p, q') = ebar[2 lam e^{-lam r'} p.q'] the y' integral pins
    q' = eta(r') v and leaves  int dp Psi(p, eta(r') v) e[-p u] xihat(-p; v),
    xihat being the transform of xi in its first slot.
    """
    c = 2 * lam * np.exp(-lam * rp)
    et = float(eta(lam, rp))
    xh = xi.fourier([0])
    P = xh.support_radius(1e-18)
    p, wp = _trap(-P, P, p_nodes)
    u = np.asarray(u, dtype=float)[..., None]
    v = np.asarray(v, dtype=float)[..., None]
    integrand = ebar(c * p * et * v) * ebar(p * u) * xh(-p + 0 * v, v + 0 * p)
    return np.sum(integrand * wp, axis=-1)


def _damped_delta(center: float, w: np.ndarray, eps: float, s_nodes: int = 2000) -> np.ndarray:
    """int ds ebar(center s) e(s w) exp(-pi eps^2 s^2) by the trapezoid rule."""
    S = 6.0 / eps
    s, ws = _trap(-S, S, s_nodes)
    kern = ebar(center * s) * np.exp(-np.pi * (eps * s) ** 2) * ws
    return np.exp(2j * np.pi * np.outer(w, s)) @ kern


def r_matrix_quadrature(xi: GaussianSum, r: float, rp: float, lam: float, points: np.ndarray,
                        eps: float = 1e-3, w_nodes: int = 24, p_nodes: int = 400) -> np.ndarray:
    """(pi~_{r,0} (x) pi~_{r',0})(R) xi at points, assembled by quadrature.

    The s and s' integrals of Phi = ebar[lam (r s' + r' s)] are damped by
    exp(-pi eps^2 s^2), which turns them into normalized Gaussians of width
    eps around w = lam r' and w' = lam r; the w, w' integrals and the Psi
    factor are then done by trapezoid sums.
    """
    pts = np.asarray(points, dtype=float)
    out = np.zeros(len(pts), dtype=complex)
    w1, ww1 = _trap(lam * rp - 4.5 * eps, lam * rp + 4.5 * eps, w_nodes)
    w2, ww2 = _trap(lam * r - 4.5 * eps, lam * r + 4.5 * eps, w_nodes)
    k1 = _damped_delta(lam * rp, w1, eps) * ww1 * np.exp(-w1 / 2)
    k2 = _damped_delta(lam * r, w2, eps) * ww2 * np.exp(-w2 / 2)
    for i, (u, v) in enumerate(pts):
        U = np.exp(-w1)[:, None] * u + 0 * w2[None, :]
        V = np.exp(-w2)[None, :] * v + 0 * w1[:, None]
        vals = psi_quadrature(xi, rp, lam, U, V, p_nodes)
        out[i] = k1 @ vals @ k2
    return out


def r_matrix_closed(xi: GaussianSum, r: float, rp: float, lam: float, points: np.ndarray) -> np.ndarray:
    """Composed closed form of the R action at points."""
    M, C = braid_matrix(r, rp, lam)
    # (R xi)(u, v) = C xi(e^{-lam r'} u + beta v, e^{-lam r} v) is M with its rows applied to (v, u)
    pts = np.asarray(points, dtype=float)
    z = np.stack([M[0, 0] * pts[:, 1] + M[0, 1] * pts[:, 0], M[1, 0] * pts[:, 1]], axis=-1)
    return C * xi(z)


# ----------------------------------------------------------------------------
# braid composition report
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class BraidReport:
    pair: tuple
    lam: float
    intertwining_residual: float
    composition_vs_closed_form: float
    composition_vs_closed_form_literal: float
    distance_to_identity: float
    grid_distance_to_identity: float
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        for k in ("intertwining_residual", "composition_vs_closed_form", "composition_vs_closed_form_literal",
                  "distance_to_identity", "grid_distance_to_identity"):
            if not getattr(self, k) >= 0:
                raise ValueError(f"{k} must be nonnegative")

    @property
    def passed(self) -> bool:
        t = self.thresholds
        ok = self.intertwining_residual < t.get("intertwining", 1e-6)
        ok &= self.composition_vs_closed_form < t.get("composition", 1e-6)
        if "min_distance" in t:
            ok &= self.distance_to_identity > t["min_distance"]
        if "max_distance" in t:
            ok &= self.distance_to_identity < t["max_distance"]
        return bool(ok)

    def as_dict(self) -> dict:
        return {"pair": list(self.pair), "lam": self.lam,
                "intertwining_residual": self.intertwining_residual,
                "composition_vs_closed_form": self.composition_vs_closed_form,
                "composition_vs_closed_form_literal": self.composition_vs_closed_form_literal,
                "distance_to_identity": self.distance_to_identity,
                "grid_distance_to_identity": self.grid_distance_to_identity,
                "passed": self.passed}


def intertwining_residual(T: LinearOperator, left: LinearOperator, right: LinearOperator,
                          battery: TestBattery) -> float:
    """operator_residual(T left, right T)."""
    return operator_residual(T @ left, right @ T, battery)


def braid_composition(r: float, rp: float, lam: float = 1.0, spec: GridSpec | None = None,
                      battery: TestBattery | None = None, functions=(), thresholds: dict | None = None
                      ) -> BraidReport:
    """Compose T_{r'r} T_{rr'} and compare with the closed form."""
    spec = spec or GridSpec(N=512, L=10.0)
    battery = battery or tensor_battery(spec)
    T1 = T_rr_operator(r, rp, lam, spec)
    T2 = T_rr_operator(rp, r, lam, spec)
    comp = T2 @ T1
    M, C = composition_closed_form(r, rp, lam, "derived")
    Ml, Cl = composition_closed_form(r, rp, lam, "literal")
    res = operator_residual(comp, affine_operator(M, C, spec), battery)
    res_lit = operator_residual(comp, affine_operator(Ml, Cl, spec), battery)
    ident = LinearOperator.identity(spec.shape * 2, spec.weight ** 2)
    grid_dist = operator_residual(comp, ident, battery)
    inter = 0.0
    rep1 = RepId("pi_r", (r,), lam, 1, spec)
    rep2 = RepId("pi_r", (rp,), lam, 1, spec)
    for f in functions:
        inter = max(inter, intertwining_residual(T1, inner_tensor(rep1, rep2, f, lam, spec),
                                                 inner_tensor(rep2, rep1, f, lam, spec), battery))
    return BraidReport((f"pi_r({r})", f"pi_r({rp})"), lam, float(inter), float(res), float(res_lit),
                       braid_distance_analytic(r, rp, lam), float(grid_dist), dict(thresholds or {}))


def tensor_homomorphism_residual(rep1: RepId, rep2: RepId, f, g, battery: TestBattery,
                                 lam: float | None = None, spec: GridSpec | None = None) -> float:
    """(pi boxtimes rho)(f * g) against the product of the two images."""
    lam = rep1.lam if lam is None else lam
    r = _r_of(rep1) + _r_of(rep2)
    prod = twisted_convolve(f, g, r, lam)
    A = inner_tensor(rep1, rep2, prod, lam, spec)
    B = inner_tensor(rep1, rep2, f, lam, spec) @ inner_tensor(rep1, rep2, g, lam, spec)
    return operator_residual(A, B, battery)


def unitarity(T: LinearOperator, battery: TestBattery) -> float:
    return unitarity_residual(T, battery)
