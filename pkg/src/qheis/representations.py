"""Irreducible representations of E, Etilde and of the twisted algebras.

Group elements of E are (x, y; t) and of Etilde (x, y, w; t) with the
circle coordinate theta = exp(2 pi i t).  Infinite-dimensional
representations act on grid samples (``GridSpec``) or, for Gaussian data,
on ``GaussianSum`` vectors through the analytic backend.

Integrated forms on grids are assembled as dense matrices for n = 1:

    (pi_r(f) xi)(u_i) = h sum_j K(u_i, x_j) xi(u_i + x_j),
    K(u, x) = int f(x, y; r) ebar(eta(r) u.y) dy,

with K computed either by a chirp-z transform along y (``fft``) or by the
direct triple sum (``naive``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import czt

from ._backend import kernels, threads
from .algebra import Fiber, twisted_convolve
from .gaussian import GaussianSum
from .groups import GroupElement
from .kernel import (GridSpec, GridVector, LinearOperator, TestBattery, beta, ebar, eta,
                     fourier_matrix, fourier_resample, operator_residual, quadrature,
                     shift_zero_fill)

TAGS = {
    "Q_pq": ("p", "q"), "Q_r": ("r",), "Qt_s": ("s",), "Qt_pq": ("p", "q"), "Qt_rs": ("r", "s"),
    "pi_pq": ("p", "q"), "pi_r": ("r",), "pit_s": ("s",), "pit_pq": ("p", "q"), "pit_rs": ("r", "s"),
}
SCALAR_TAGS = {"Q_pq", "Qt_s", "pi_pq", "pit_s"}
EXTENDED_TAGS = {"Qt_s", "Qt_pq", "Qt_rs", "pit_s", "pit_pq", "pit_rs"}
VECTOR_PARAMS = {"p", "q"}


@dataclass(frozen=True)
class RepId:
    tag: str
    params: tuple
    lam: float = 1.0
    n: int = 1
    grid: GridSpec | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown representation tag {self.tag!r}")
        names = TAGS[self.tag]
        if len(self.params) != len(names):
            raise ValueError(f"{self.tag} takes parameters {names}")
        norm = []
        for name, val in zip(names, self.params):
            if name in VECTOR_PARAMS:
                val = tuple(float(v) for v in np.atleast_1d(val))
                if len(val) != self.n:
                    raise ValueError(f"parameter {name} must have length n = {self.n}")
            else:
                val = float(val)
            norm.append(val)
        object.__setattr__(self, "params", tuple(norm))
        if self.grid is not None and self.hilbert_n != self.grid.n:
            raise ValueError("grid dimension does not match the Hilbert space")

    def _get(self, name):
        names = TAGS[self.tag]
        if name not in names:
            raise AttributeError(f"{self.tag} has no parameter {name}")
        v = self.params[names.index(name)]
        return np.array(v) if name in VECTOR_PARAMS else v

    p = property(lambda self: self._get("p"))
    q = property(lambda self: self._get("q"))
    r = property(lambda self: self._get("r"))
    s = property(lambda self: self._get("s"))

    @property
    def scalar(self) -> bool:
        return self.tag in SCALAR_TAGS

    @property
    def extended(self) -> bool:
        return self.tag in EXTENDED_TAGS

    @property
    def hilbert_n(self) -> int:
        """Dimension of the base space of the Hilbert space L^2."""
        if self.scalar:
            return 0
        return 1 if self.tag in ("Qt_pq", "pit_pq") else self.n

    @property
    def eta(self) -> float:
        return float(eta(self.lam, self.r))

    def with_grid(self, grid: GridSpec) -> "RepId":
        return RepId(self.tag, self.params, self.lam, self.n, grid)

    def spec(self) -> GridSpec:
        if self.grid is not None:
            return self.grid
        return GridSpec(n=self.hilbert_n)


def rep(tag: str, *params, lam: float = 1.0, n: int = 1, grid: GridSpec | None = None) -> RepId:
    return RepId(tag, tuple(params), lam, n, grid)


# ----------------------------------------------------------------------------
# group representations
# ----------------------------------------------------------------------------

def _coords(rep_id: RepId, g):
    """Split g into (x, y, w, theta)."""
    if isinstance(g, GroupElement):
        gid = g.group
        if gid.name not in ("E", "Etilde"):
            raise ValueError("representations act on E or Etilde")
        if (gid.name == "Etilde") != rep_id.extended:
            raise ValueError(f"{rep_id.tag} is a representation of {'Etilde' if rep_id.extended else 'E'}")
        if gid.n != rep_id.n:
            raise ValueError("dimension mismatch")
        if rep_id.tag in ("Q_r", "Qt_rs") and (not np.isclose(gid.r, rep_id.r) or
                                               not np.isclose(gid.lam, rep_id.lam)):
            raise ValueError("group element lives in the extension at a different (lam, r)")
        c = np.asarray(g.coords, dtype=float)
    else:
        c = np.asarray(g, dtype=float)
    n = rep_id.n
    x, y = c[:n], c[n:2 * n]
    if rep_id.extended:
        w, t = float(c[2 * n]), float(c[2 * n + 1])
    else:
        w, t = 0.0, float(c[2 * n])
    return x, y, w, np.exp(2j * np.pi * t)


def _shift(values: np.ndarray, spec: GridSpec, x: np.ndarray) -> np.ndarray:
    """v(u + x) on the lattice (axes are the trailing spec.n axes)."""
    k = spec.lattice_index(x)
    out = values
    for i, ki in enumerate(np.atleast_1d(k)):
        out = shift_zero_fill(out, int(ki), axis=values.ndim - spec.n + i)
    return out


def _resample_axes(values: np.ndarray, spec: GridSpec, scale: float, offset: np.ndarray) -> np.ndarray:
    """v(scale * (u + offset)) by Fourier interpolation, one axis at a time."""
    out = values
    for i, o in enumerate(np.atleast_1d(offset)):
        out = fourier_resample(out, spec, scale * (spec.axis + o), axis=values.ndim - spec.n + i)
    return out


def _phase_uy(spec: GridSpec, coef: float, y: np.ndarray) -> np.ndarray:
    """ebar(coef * u.y) on the grid."""
    mesh = spec.mesh()
    return ebar(coef * (mesh @ np.asarray(y, dtype=float)))


def Q_scalar(rep_id: RepId, g) -> complex:
    x, y, w, theta = _coords(rep_id, g)
    if rep_id.tag == "Q_pq":
        return complex(ebar(beta(rep_id.p, x) + beta(rep_id.q, y)))
    if rep_id.tag == "Qt_s":
        return complex(ebar(rep_id.s * w))
    raise ValueError(f"{rep_id.tag} is not one-dimensional")


def Q_operator(rep_id: RepId, g) -> LinearOperator:
    """Grid operator of Q_r, Qt_pq or Qt_rs at g."""
    x, y, w, theta = _coords(rep_id, g)
    spec = rep_id.spec()
    tag = rep_id.tag
    if tag == "Q_r":
        ph = theta * _phase_uy(spec, rep_id.eta, y)
        act = lambda v: ph * _shift(v, spec, x)
        return LinearOperator(act, spec.shape, spec.weight, f"Q_r({rep_id.r})", meta={"path": "shift"})
    if tag == "Qt_rs":
        ph = theta * ebar(rep_id.s * w) * np.exp(-rep_id.n * w / 2) * _phase_uy(spec, rep_id.eta, y)
        if w == 0.0:
            act = lambda v: ph * _shift(v, spec, x)
            path = "shift"
        else:
            scale = np.exp(-w)
            act = lambda v: ph * _resample_axes(v, spec, scale, x)
            path = "dilation"
        return LinearOperator(act, spec.shape, spec.weight, f"Qt_rs({rep_id.r},{rep_id.s})",
                              meta={"path": path})
    if tag == "Qt_pq":
        d = spec.axis
        ph = ebar(np.exp(d) * beta(rep_id.p, x) + np.exp(-d) * beta(rep_id.q, y))
        k = w / spec.h
        if abs(k - round(k)) < 1e-9:
            act = lambda v: ph * shift_zero_fill(v, int(round(k)), axis=-1)
            path = "shift"
        else:
            act = lambda v: ph * fourier_resample(v, spec, d + w, axis=-1)
            path = "dilation"
        return LinearOperator(act, spec.shape, spec.weight, f"Qt_pq", meta={"path": path})
    raise ValueError(f"{tag} has no grid operator")


def Q_analytic(rep_id: RepId, g, xi: GaussianSum) -> GaussianSum:
    """Q_r or Qt_rs applied to a Gaussian vector (any real shift)."""
    x, y, w, theta = _coords(rep_id, g)
    n = rep_id.n
    if rep_id.tag not in ("Q_r", "Qt_rs"):
        raise ValueError(f"no analytic action for {rep_id.tag}")
    scale = np.exp(-w)
    out = xi.affine(scale * np.eye(n), scale * x)
    c = theta * np.exp(-n * w / 2)
    if rep_id.tag == "Qt_rs":
        c = c * ebar(rep_id.s * w)
    return out.multiply_exp(b=-2j * np.pi * rep_id.eta * y, c=c)


def apply_Q(rep_id: RepId, g, v=None):
    """Apply the representation at g to v.

    One-dimensional tags return the scalar (times v when v is a number).
    v may be a GridVector, a stacked array or a GaussianSum (analytic backend).
    """
    if rep_id.scalar:
        val = Q_scalar(rep_id, g)
        return val if v is None else val * v
    if isinstance(v, GaussianSum):
        return Q_analytic(rep_id, g, v)
    if isinstance(v, GridVector):
        return Q_operator(rep_id.with_grid(v.spec), g)(v)
    return Q_operator(rep_id, g).apply(v)


# ----------------------------------------------------------------------------
# integrated forms
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalyticOperator:
    """Operator acting on GaussianSum vectors."""

    action: Callable[[GaussianSum], GaussianSum]
    label: str = ""

    def __call__(self, xi: GaussianSum) -> GaussianSum:
        return self.action(xi)

    def __matmul__(self, other: "AnalyticOperator") -> "AnalyticOperator":
        return AnalyticOperator(lambda v: self.action(other.action(v)), f"({self.label})({other.label})")


def _bandwidth(F: GaussianSum, idx, eps: float = 1e-17) -> float:
    """Frequency radius carrying the partial transform of F in coordinates idx."""
    return F.fourier(idx).support_radius(eps, idx=idx)


def _y_grid(F: GaussianSum, n: int, kmax: float):
    ry = F.support_radius(idx=list(range(n, 2 * n)))
    band = _bandwidth(F, list(range(n, 2 * n)))
    hy = 1.0 / (1.25 * (kmax + band))
    M = int(np.ceil(2 * ry / hy)) + 1
    return -ry + hy * np.arange(M), hy


def _x_offsets(F: GaussianSum, spec: GridSpec) -> np.ndarray:
    rx = min(F.support_radius(idx=list(range(spec.n))), 2 * spec.L)
    jmax = min(int(np.ceil(rx / spec.h)), spec.N - 1)
    return np.arange(-jmax, jmax + 1)


def rep_kernel(F: GaussianSum, et: float, spec: GridSpec, offsets: np.ndarray, method: str = "fft",
               coeffs: np.ndarray | None = None) -> np.ndarray:
    """K[i, j] = int F(x_j, y) ebar(et u_i y) dy for x_j = offsets[j] * h (n = 1).

    With ``coeffs`` of shape (S, T) the kernels of the S reweighted sums
    sum_t coeffs[s, t] F_t are returned as an (S, N, Nx) stack.
    """
    u = spec.axis
    xj = offsets * spec.h
    if method == "closed":
        Fy = F.fourier([1])
        if coeffs is None:
            return Fy(xj[None, :], et * u[:, None])
        K = np.zeros((len(coeffs), len(u), len(xj)), dtype=complex)
        step = max(1, 4_000_000 // (len(xj) * len(u)))
        for t0 in range(0, len(F), step):
            part = GaussianSum(Fy.c[t0:t0 + step], Fy.A[t0:t0 + step], Fy.b[t0:t0 + step])
            K += np.tensordot(coeffs[:, t0:t0 + step], part.evaluate_terms(xj[None, :], et * u[:, None]),
                              axes=(1, 0))
        return K
    y, hy = _y_grid(F, 1, abs(et) * spec.L)
    if coeffs is None:
        fs = F(xj[:, None], y[None, :])[None]
    else:
        fs = np.zeros((len(coeffs), len(xj), len(y)), dtype=complex)
        step = max(1, 4_000_000 // (len(xj) * len(y)))
        for t0 in range(0, len(F), step):
            part = GaussianSum(F.c[t0:t0 + step], F.A[t0:t0 + step], F.b[t0:t0 + step])
            phi = part.evaluate_terms(xj[:, None], y[None, :])
            fs += np.tensordot(coeffs[:, t0:t0 + step], phi, axes=(1, 0))
    if method == "fft":
        k0, dk = et * u[0], et * spec.h
        A = np.exp(2j * np.pi * k0 * hy)
        W = np.exp(-2j * np.pi * dk * hy)
        K = czt(fs, m=spec.N, w=W, a=A, axis=-1)                 # (S, Nx, N)
        K = K * (hy * np.exp(-2j * np.pi * et * u * y[0]))
        K = np.swapaxes(K, -1, -2)
    elif method == "naive":
        K = np.stack([kernels.naive_rep_kernel(np.ascontiguousarray(v), np.ascontiguousarray(u),
                                               np.ascontiguousarray(y), float(et), float(hy), threads())
                      for v in fs])
    else:
        raise ValueError(f"unknown method {method!r}")
    return K[0] if coeffs is None else K


def assemble_shift_kernel(K: np.ndarray, offsets: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Matrix of  (A xi)_i = h sum_j K[i, j] xi[i + offsets[j]]  (zero outside the box)."""
    N = spec.N
    mat = np.zeros((N, N), dtype=complex)
    rows = np.broadcast_to(np.arange(N)[:, None], K.shape)
    cols = rows + np.asarray(offsets)[None, :]
    ok = (cols >= 0) & (cols < N)
    mat[rows[ok], cols[ok]] = spec.h * K[ok]
    return mat


def pi_r_matrix(F: GaussianSum, et: float, spec: GridSpec, method: str = "fft") -> np.ndarray:
    if spec.n != 1:
        raise NotImplementedError("grid integrated forms are implemented for n = 1; use backend='analytic'")
    if len(F) == 0:
        return np.zeros((spec.N, spec.N), dtype=complex)
    offs = _x_offsets(F, spec)
    return assemble_shift_kernel(rep_kernel(F, et, spec, offs, method), offs, spec)


def _pi_r_analytic(F: GaussianSum, et: float, n: int) -> AnalyticOperator:
    def act(xi: GaussianSum) -> GaussianSum:
        if len(F) == 0 or len(xi) == 0:
            return GaussianSum.zero(n)
        # joint variables (u, x, y)
        d = 3 * n
        Fj = F.affine(np.hstack([np.zeros((2 * n, n)), np.eye(2 * n)]))
        Mx = np.zeros((n, d))
        Mx[:, :n] = np.eye(n)
        Mx[:, n:2 * n] = np.eye(n)
        Xj = xi.affine(Mx)
        Q = np.zeros((d, d), dtype=complex)
        for k in range(n):
            Q[k, 2 * n + k] = Q[2 * n + k, k] = 1j * np.pi * et
        return (Fj * Xj).multiply_exp(A=Q).integrate(list(range(n, 3 * n)))
    return AnalyticOperator(act, "pi_r")


def _w_nodes(F: Fiber):
    lo, hi = F.w_support()
    step = F.w_sigma() / 1.5
    m = int(np.ceil((hi - lo) / step))
    return np.linspace(lo, hi, m + 1)


def _check_variant(rep_id: RepId, f):
    want = "Atilde" if rep_id.extended else "A"
    if f.variant != want:
        raise ValueError(f"{rep_id.tag} needs a {want} test function, got {f.variant}")
    if f.n != rep_id.n:
        raise ValueError("dimension mismatch between representation and test function")


def integrated_form(rep_id: RepId, f, backend: str = "fft"):
    """Integrated form of a representation at the test function f.

    ``backend`` is ``fft`` or ``naive`` (grid, n = 1) or ``analytic``
    (pi_r only, GaussianSum vectors).  One-dimensional tags return complex
    numbers.
    """
    tag = rep_id.tag
    if not tag.startswith("pi"):
        raise ValueError("integrated forms exist for the pi tags")
    _check_variant(rep_id, f)
    n = rep_id.n
    if tag == "pi_pq":
        F = f.fiber(0.0)
        if F.is_zero:
            return 0j
        return complex(F.xy.fourier(list(range(2 * n)))(*np.concatenate([rep_id.p, rep_id.q])))
    if tag == "pit_s":
        F = f.fiber(0.0)
        if F.is_zero:
            return 0j
        xy_tot = F.xy.integrate(list(range(2 * n))).c
        w_hat = F.w.fourier([0]).evaluate_terms(np.array([rep_id.s]))[:, 0]
        return complex(np.sum(xy_tot * w_hat))
    if tag == "pi_r":
        F = f.fiber(rep_id.r)
        if backend == "analytic":
            return _pi_r_analytic(F.xy, rep_id.eta, n)
        spec = rep_id.spec()
        mat = pi_r_matrix(F.xy, rep_id.eta, spec, backend)
        return LinearOperator.dense(mat, spec.shape, spec.weight, f"pi_r({rep_id.r})")
    if backend == "analytic":
        raise ValueError(f"no analytic backend for {tag}")
    spec = rep_id.spec()
    if spec.n != 1:
        raise NotImplementedError("grid integrated forms are implemented for n = 1")
    if tag == "pit_pq":
        F = f.fiber(0.0)
        mat = np.zeros((spec.N, spec.N), dtype=complex)
        if not F.is_zero:
            mat = _pit_pq_matrix(F, rep_id, spec)
        return LinearOperator.dense(mat, spec.shape, spec.weight, "pit_pq")
    if tag == "pit_rs":
        F = f.fiber(rep_id.r)
        mat = np.zeros((spec.N, spec.N), dtype=complex)
        if not F.is_zero:
            mat = _pit_rs_matrix(F, rep_id, spec, backend)
        return LinearOperator.dense(mat, spec.shape, spec.weight, f"pit_rs({rep_id.r},{rep_id.s})")
    raise ValueError(tag)


def _pit_pq_matrix(F: Fiber, rep_id: RepId, spec: GridSpec) -> np.ndarray:
    n = rep_id.n
    d = spec.axis
    lo, hi = F.w_support()
    offs = np.arange(int(np.floor(lo / spec.h)), int(np.ceil(hi / spec.h)) + 1)
    Fhat = F.xy.fourier(list(range(2 * n)))
    k = np.concatenate([np.exp(d)[:, None] * rep_id.p[None, :],
                        np.exp(-d)[:, None] * rep_id.q[None, :]], axis=1)   # (N, 2n)
    terms = Fhat.evaluate_terms(*k.T)                                      # (T, N)
    wv = F.w.evaluate_terms(offs * spec.h)                                 # (T, J)
    K = np.einsum("ti,tj->ij", terms, wv)
    return assemble_shift_kernel(K, offs, spec)


def _pit_rs_matrix(F: Fiber, rep_id: RepId, spec: GridSpec, method: str) -> np.ndarray:
    nodes = _w_nodes(F)
    hw = nodes[1] - nodes[0]
    weights = hw * ebar(rep_id.s * nodes) * np.exp(-rep_id.n * nodes / 2)
    coeffs = F.w.evaluate_terms(nodes).T * weights[:, None]        # (nodes, T)
    offs = _x_offsets(F.xy, spec)
    K = rep_kernel(F.xy, rep_id.eta, spec, offs, method, coeffs=coeffs)
    Finv = np.fft.fft(np.eye(spec.N), axis=0) / spec.N
    mat = np.zeros((spec.N, spec.N), dtype=complex)
    for wk, Kk in zip(nodes, K):
        D = fourier_matrix(spec, np.exp(-wk) * spec.axis) @ Finv
        mat += assemble_shift_kernel(Kk, offs, spec) @ D
    return mat


# ----------------------------------------------------------------------------
# representing pairs
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class RepresentingPair:
    """Evaluation point r of the base algebra together with a projective family."""

    r: float
    family: RepId


@dataclass(frozen=True)
class PairReport:
    max_residual: float
    samples: int


def _family_value(rep_id: RepId, xy: np.ndarray, battery: TestBattery | None):
    g = np.concatenate([xy, [0.0]])
    if rep_id.scalar:
        return Q_scalar(rep_id, g)
    return Q_operator(rep_id, g).apply(battery.values)


def validate_representing_pair(pair: RepresentingPair, samples=None, rng=None,
                               battery: TestBattery | None = None, count: int = 16,
                               scale: float = 1.0) -> PairReport:
    """max residual of Q(g)Q(g') = sigma^r(g, g') Q(gg') over sampled pairs in H/Z.

    ``samples`` is a sequence of (g, g') pairs of (x, y) arrays.  Shifts are
    snapped to the grid lattice for grid families.
    """
    fam = pair.family
    if fam.extended:
        raise ValueError("representing pairs are built from representations of E")
    n = fam.n
    spec = fam.spec() if not fam.scalar else None
    if samples is None:
        rng = rng if rng is not None else np.random.Generator(np.random.Philox(0))
        samples = [(rng.uniform(-scale, scale, 2 * n), rng.uniform(-scale, scale, 2 * n))
                   for _ in range(count)]
    if spec is not None and battery is None:
        from .kernel import gaussian_battery
        battery = gaussian_battery(spec, 4)
    et = float(eta(fam.lam, pair.r))
    worst = 0.0
    for g1, g2 in samples:
        g1 = np.asarray(g1, dtype=float).copy()
        g2 = np.asarray(g2, dtype=float).copy()
        if spec is not None:
            g1[:n] = spec.snap(g1[:n])[0]
            g2[:n] = spec.snap(g2[:n])[0]
        sig = ebar(et * beta(g1[:n], g2[n:]))
        if fam.scalar:
            lhs = _family_value(fam, g1, None) * _family_value(fam, g2, None)
            rhs = sig * _family_value(fam, g1 + g2, None)
            worst = max(worst, abs(lhs - rhs))
        else:
            A = Q_operator(fam, np.concatenate([g1, [0.0]]))
            B = Q_operator(fam, np.concatenate([g2, [0.0]]))
            C = Q_operator(fam, np.concatenate([g1 + g2, [0.0]]))
            lhs = A @ B
            rhs = LinearOperator(lambda v, C=C, sig=sig: sig * C.action(v), C.shape, C.weight)
            worst = max(worst, operator_residual(lhs, rhs, battery))
    return PairReport(float(worst), len(samples))


# ----------------------------------------------------------------------------
# restriction to A
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class DirectIntegral:
    """w-sampled direct integral of representations of A."""

    w: np.ndarray
    fibers: tuple

    def __len__(self):
        return len(self.fibers)


def restrict(rep_id: RepId, samples: int = 33, span: float = 4.0):
    """Restriction to A of a representation of the extended algebra."""
    if rep_id.tag == "pit_rs":
        return RepId("pi_r", (rep_id.r,), rep_id.lam, rep_id.n, rep_id.grid)
    if rep_id.tag == "pit_s":
        z = (0.0,) * rep_id.n
        return RepId("pi_pq", (z, z), rep_id.lam, rep_id.n)
    if rep_id.tag == "pit_pq":
        w = np.linspace(-span, span, samples)
        fibers = tuple(RepId("pi_pq", (np.exp(wk) * rep_id.p, np.exp(-wk) * rep_id.q), rep_id.lam, rep_id.n)
                       for wk in w)
        return DirectIntegral(w, fibers)
    raise ValueError(f"restriction is defined for the pit tags, got {rep_id.tag}")


def restricted_Q(rep_id: RepId, g) -> LinearOperator:
    """Qt restricted to E: the operator at (x, y, 0; theta)."""
    r = rep_id.r if rep_id.tag == "Qt_rs" else 0.0
    x, y, _, theta = _coords(RepId("Q_r", (r,), rep_id.lam, rep_id.n), g)
    t = np.angle(theta) / (2 * np.pi)
    ext = np.concatenate([x, y, [0.0, t]])
    if rep_id.tag == "Qt_s":
        return Q_scalar(rep_id, ext)
    return Q_operator(rep_id, ext)


def restriction_block_residual(rep_id: RepId, f, samples: int = 33, span: float = 4.0,
                               resolution: int = 400) -> float:
    """Compare the integrated restricted family with its direct-integral fibers.

    The restriction of Qt_pq to E acts on L^2(R) as multiplication by
    ebar(e^w p.x + e^-w q.y); its integrated form at f in A is therefore the
    multiplier w -> int f(x, y, 0) ebar(e^w p.x + e^-w q.y) dx dy, computed
    here by quadrature, while each fiber is pi_{e^w p, e^-w q}(f) in closed
    form.  Returns the max deviation over the w samples.
    """
    if rep_id.tag != "pit_pq" or f.variant != "A":
        raise ValueError("block test needs pit_pq and an A test function")
    di = restrict(rep_id, samples, span)
    F = f.fiber(0.0)
    R = F.support_radius(1e-20)
    n = rep_id.n
    worst = 0.0
    for wk, fib in zip(di.w, di.fibers):
        p, q = np.exp(wk) * rep_id.p, np.exp(-wk) * rep_id.q
        if n == 1:
            m = quadrature(lambda x, y: F(x, y) * ebar(p[0] * x + q[0] * y), [(-R, R), (-R, R)], resolution)
        else:
            m = quadrature(lambda x1, x2, y1, y2: F(np.stack([x1, x2], -1), np.stack([y1, y2], -1))
                           * ebar(p[0] * x1 + p[1] * x2 + q[0] * y1 + q[1] * y2),
                           [(-R, R)] * 4, resolution // 8)
        worst = max(worst, abs(m - integrated_form(fib, f)))
    return float(worst)


def homomorphism_residual(rep_id: RepId, f, g, battery: TestBattery, lam: float | None = None,
                          backend: str = "fft") -> float:
    """operator_residual(pi(f * g), pi(f) pi(g)) on the battery."""
    lam = rep_id.lam if lam is None else lam
    r = rep_id.r if rep_id.tag in ("pi_r", "pit_rs") else 0.0
    prod = twisted_convolve(f, g, r, lam)
    lhs = integrated_form(rep_id, prod, backend)
    rhs = integrated_form(rep_id, f, backend) @ integrated_form(rep_id, g, backend)
    return operator_residual(lhs, rhs, battery)
