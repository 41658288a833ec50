"""Scalar primitives, the periodic grid model of L^2(R^n), quadrature and
the operator-equality metric shared by every other module."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi


# ----------------------------------------------------------------------------
# scalar primitives
# ----------------------------------------------------------------------------

def ebar(t):
    """ebar(t) = exp(-2 pi i t); accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("ebar: non-finite argument")
    # reduce mod 1 first so large arguments keep full phase accuracy
    frac = t - np.round(t)
    out = np.exp(-1j * TWO_PI * frac)
    return out[()] if out.ndim == 0 else out


def eta(lam, r):
    """eta_lam(r) = (exp(2 lam r) - 1) / (2 lam), with eta_0(r) = r.

    Vectorized in both arguments.  Uses expm1, plus a short series when
    |2 lam r| < 1e-4 so the lam -> 0 limit is continuous.
    """
    lam_a = np.asarray(lam, dtype=float)
    r_a = np.asarray(r, dtype=float)
    lam_b, r_b = np.broadcast_arrays(lam_a, r_a)
    t = 2.0 * lam_b * r_b
    small = np.abs(t) < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.expm1(t) / (2.0 * lam_b)
    series = r_b * (1.0 + t / 2.0 + t * t / 6.0 + t ** 3 / 24.0)
    out = np.where(small, series, big)
    return out[()] if out.ndim == 0 else out


def beta(x, y):
    """Euclidean inner product over the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1:] != y.shape[-1:]:
        raise ValueError(f"beta: dimension mismatch {x.shape} vs {y.shape}")
    out = np.sum(x * y, axis=-1)
    return out[()] if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------------
# grid model
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic box [-L, L)^n sampled with N points per axis."""

    n: int = 1
    N: int = 256
    L: float = 8.0

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("GridSpec.n must be 1 or 2")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError("GridSpec.N must be a power of two >= 16")
        if not self.L > 0:
            raise ValueError("GridSpec.L must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def weight(self) -> float:
        return self.h ** self.n

    def mesh(self) -> np.ndarray:
        """Grid points as an array of shape (*shape, n)."""
        axes = np.meshgrid(*([self.axis] * self.n), indexing="ij")
        return np.stack(axes, axis=-1)

    def lattice_index(self, x, atol: float = 1e-9) -> np.ndarray:
        """Integer offsets k with x = k h; raises if x is off the lattice."""
        k = np.asarray(x, dtype=float) / self.h
        ki = np.round(k)
        if np.any(np.abs(k - ki) > atol):
            raise ValueError(f"shift {x} is not a multiple of h = {self.h}")
        return ki.astype(int)

    def snap(self, x):
        """Nearest lattice point and the snap error."""
        x = np.asarray(x, dtype=float)
        xs = np.round(x / self.h) * self.h
        return xs, float(np.max(np.abs(xs - x))) if x.size else 0.0


@dataclass(frozen=True)
class GridVector:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.spec.shape:
            raise ValueError(f"values of shape {v.shape} do not match {self.spec.shape}")
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        return float(np.sqrt(self.spec.weight * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "GridVector") -> complex:
        return complex(self.spec.weight * np.vdot(self.values, other.values))


def grid_norm(values: np.ndarray, weight: float, ndim: int) -> np.ndarray:
    """Quadrature L^2 norm over the trailing ``ndim`` axes."""
    axes = tuple(range(values.ndim - ndim, values.ndim))
    return np.sqrt(weight * np.sum(np.abs(values) ** 2, axis=axes))


# ----------------------------------------------------------------------------
# operators and batteries
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearOperator:
    """A linear map acting on stacked sample arrays.

    ``action`` receives an array of shape (batch, *shape) and returns an
    array of the same shape.  ``shape`` is the per-vector sample shape
    (``spec.shape`` for single grids, ``(N, N)`` for tensor grids) and
    ``weight`` the quadrature weight of one sample.
    """

    action: Callable[[np.ndarray], np.ndarray]
    shape: tuple
    weight: float
    label: str = ""
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, v):
        if isinstance(v, GridVector):
            return GridVector(v.spec, self.apply(v.values[None])[0])
        return self.apply(v)

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=complex)
        single = values.shape == self.shape
        batch = values[None] if single else values
        if batch.shape[1:] != self.shape:
            raise ValueError(f"operator '{self.label}' expects shape {self.shape}, got {values.shape[1:]}")
        out = np.asarray(self.action(batch), dtype=complex)
        return out[0] if single else out

    def _check(self, other: "LinearOperator"):
        if other.shape != self.shape:
            raise ValueError("operators act on different grids")

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        self._check(other)
        if self.matrix is not None and other.matrix is not None:
            return LinearOperator.dense(self.matrix @ other.matrix, self.shape, self.weight,
                                        f"({self.label})({other.label})")
        return LinearOperator(lambda v: self.action(other.action(v)), self.shape,
                              self.weight, f"({self.label})({other.label})")

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        self._check(other)
        return LinearOperator(lambda v: self.action(v) + other.action(v), self.shape,
                              self.weight, f"{self.label} + {other.label}")

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        self._check(other)
        return LinearOperator(lambda v: self.action(v) - other.action(v), self.shape,
                              self.weight, f"{self.label} - {other.label}")

    def __rmul__(self, c) -> "LinearOperator":
        c = complex(c)
        return LinearOperator(lambda v: c * self.action(v), self.shape, self.weight,
                              f"{c}*{self.label}")

    def to_dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        size = int(np.prod(self.shape))
        if size > 4096:
            raise ValueError("dense assembly limited to 4096 degrees of freedom")
        basis = np.eye(size, dtype=complex).reshape((size,) + self.shape)
        cols = self.action(basis).reshape(size, size)
        return cols.T

    def adjoint(self) -> "LinearOperator":
        """Adjoint for the weighted l^2 product; dense, so small grids only."""
        return LinearOperator.dense(self.to_dense().conj().T, self.shape, self.weight,
                                    f"adjoint({self.label})")

    @staticmethod
    def identity(shape, weight, label="I") -> "LinearOperator":
        return LinearOperator(lambda v: v.copy(), tuple(shape), weight, label)

    @staticmethod
    def dense(mat: np.ndarray, shape, weight, label="") -> "LinearOperator":
        shape = tuple(shape)
        mat = np.asarray(mat, dtype=complex)
        return LinearOperator(lambda v: (v.reshape(len(v), -1) @ mat.T).reshape((len(v),) + shape),
                              shape, weight, label, matrix=mat)


@dataclass(frozen=True)
class TestBattery:
    """Stack of test vectors sharing one grid."""

    __test__ = False  # keep pytest from collecting this class

    values: np.ndarray
    weight: float
    ndim: int
    labels: tuple = field(default=())

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != self.ndim + 1:
            raise ValueError("battery values must be stacked along axis 0")
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple:
        return self.values.shape[1:]

    def __len__(self):
        return self.values.shape[0]

    def norms(self) -> np.ndarray:
        return grid_norm(self.values, self.weight, self.ndim)


def _box_fraction(values: np.ndarray, axis_pts: np.ndarray, half: float, ndim: int) -> np.ndarray:
    inside = (axis_pts >= -half) & (axis_pts < half)
    mask = inside
    for _ in range(ndim - 1):
        mask = np.multiply.outer(mask, inside)
    tot = np.sum(np.abs(values) ** 2, axis=tuple(range(1, ndim + 1)))
    sub = np.sum(np.abs(values) ** 2 * mask, axis=tuple(range(1, ndim + 1)))
    return sub / tot


def gaussian_battery(spec: GridSpec, count: int = 8, rng: np.random.Generator | None = None,
                     width=(2.0, 4.0), center=1.5, chirp=2.0, slots: int = 1) -> TestBattery:
    """Battery of Gaussians c exp(-a|u-u0|^2 + i b.u) on ``slots`` copies of the grid.

    With ``slots=2`` the members live on the tensor grid spec x spec.
    Members are normalized to unit quadrature norm.
    """
    if count < 1:
        raise ValueError("battery must be nonempty")
    rng = rng if rng is not None else np.random.Generator(np.random.Philox(0))
    d = spec.n * slots
    axes = np.meshgrid(*([spec.axis] * d), indexing="ij")
    pts = np.stack(axes, axis=-1)
    vals = []
    for _ in range(count):
        a = rng.uniform(*width)
        u0 = rng.uniform(-center, center, size=d)
        b = rng.uniform(-chirp, chirp, size=d)
        v = np.exp(-a * np.sum((pts - u0) ** 2, axis=-1) + 1j * (pts @ b))
        vals.append(v)
    vals = np.array(vals)
    weight = spec.weight ** slots
    vals /= grid_norm(vals, weight, d).reshape((-1,) + (1,) * d)
    frac = _box_fraction(vals, spec.axis, spec.L / 2, d)
    if np.any(frac < 0.9999):
        raise ValueError("battery member not concentrated in the inner half box")
    return TestBattery(vals, weight, d)


def unit_gaussian_battery(spec: GridSpec, slots: int = 1) -> TestBattery:
    """Single member: the normalized unit Gaussian exp(-pi |u|^2)."""
    d = spec.n * slots
    axes = np.meshgrid(*([spec.axis] * d), indexing="ij")
    v = np.exp(-np.pi * sum(a ** 2 for a in axes)).astype(complex)[None]
    weight = spec.weight ** slots
    v /= grid_norm(v, weight, d).reshape((-1,) + (1,) * d)
    return TestBattery(v, weight, d, ("unit",))


def operator_residual(A: LinearOperator, B: LinearOperator, battery: TestBattery) -> float:
    """max over the battery of ||(A - B) xi|| / ||xi||."""
    if len(battery) == 0:
        raise ValueError("empty battery")
    if A.shape != B.shape or A.shape != battery.shape:
        raise ValueError("operators and battery live on different grids")
    diff = A.apply(battery.values) - B.apply(battery.values)
    num = grid_norm(diff, battery.weight, battery.ndim)
    return float(np.max(num / battery.norms()))


def unitarity_residual(A: LinearOperator, battery: TestBattery) -> float:
    """max over the battery of | ||A xi|| - ||xi|| | / ||xi||."""
    out = grid_norm(A.apply(battery.values), battery.weight, battery.ndim)
    nrm = battery.norms()
    return float(np.max(np.abs(out - nrm) / nrm))


# ----------------------------------------------------------------------------
# quadrature
# ----------------------------------------------------------------------------

def quadrature(f: Callable, box: Sequence[tuple], resolution) -> complex:
    """Tensor trapezoid rule for f over a box.

    ``f`` receives one array per axis (broadcast mesh) and returns values.
    ``resolution`` is the number of subintervals per axis (int or sequence).
    """
    box = [tuple(map(float, b)) for b in box]
    d = len(box)
    res = [int(resolution)] * d if np.isscalar(resolution) else [int(r) for r in resolution]
    nodes, weights = [], []
    for (lo, hi), m in zip(box, res):
        x = np.linspace(lo, hi, m + 1)
        w = np.full(m + 1, (hi - lo) / m)
        w[0] *= 0.5
        w[-1] *= 0.5
        nodes.append(x)
        weights.append(w)
    mesh = np.meshgrid(*nodes, indexing="ij")
    vals = np.asarray(f(*mesh), dtype=complex)
    vals = np.broadcast_to(vals, mesh[0].shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("quadrature: non-finite integrand samples")
    for w in weights:
        vals = np.tensordot(w, vals, axes=(0, 0))
    return complex(vals)


# ----------------------------------------------------------------------------
# lattice shifts and Fourier resampling
# ----------------------------------------------------------------------------

def shift_zero_fill(values: np.ndarray, k: int, axis: int) -> np.ndarray:
    """out[..., i, ...] = values[..., i + k, ...], zero outside the box."""
    out = np.zeros_like(values)
    N = values.shape[axis]
    if abs(k) >= N:
        return out
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if k >= 0:
        src[axis] = slice(k, N)
        dst[axis] = slice(0, N - k)
    else:
        src[axis] = slice(0, N + k)
        dst[axis] = slice(-k, N)
    out[tuple(dst)] = values[tuple(src)]
    return out


def _freqs(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, 1.0 / N)


def fourier_matrix(spec: GridSpec, points: np.ndarray) -> np.ndarray:
    """Matrix E with (E c)(t) the trigonometric interpolant of the grid
    samples whose DFT coefficients are c (c = fft(v)/N).  The Nyquist mode
    is dropped and points outside [-L, L) evaluate to zero."""
    k = _freqs(spec.N)
    t = np.asarray(points, dtype=float)
    E = np.exp(1j * np.pi * np.outer(t + spec.L, k) / spec.L)
    E[:, spec.N // 2] = 0.0
    E[(t < -spec.L) | (t >= spec.L)] = 0.0
    return E


def fourier_resample(values: np.ndarray, spec: GridSpec, points: np.ndarray, axis: int = -1) -> np.ndarray:
    """Evaluate the trigonometric interpolant along ``axis`` at ``points``."""
    coeff = np.fft.fft(values, axis=axis) / spec.N
    E = fourier_matrix(spec, points)
    coeff = np.moveaxis(coeff, axis, -1)
    out = coeff @ E.T
    return np.moveaxis(out, -1, axis)


def resample_matrix(spec: GridSpec, points: np.ndarray) -> np.ndarray:
    """Dense matrix mapping grid samples to interpolant values at points."""
    F = np.fft.fft(np.eye(spec.N), axis=0) / spec.N
    return fourier_matrix(spec, points) @ F


def dilate(values: np.ndarray, spec: GridSpec, scale: float, axis: int = -1) -> np.ndarray:
    """out(u) = values(scale * u) along one axis (no prefactor)."""
    if scale == 1.0:
        return values.copy()
    return fourier_resample(values, spec, scale * spec.axis, axis=axis)


def affine_resample_2d(values: np.ndarray, spec: GridSpec, M) -> np.ndarray:
    """out[..., i, j] = v(M @ (u_i, u_j)) on an n=1 tensor grid.

    With M = [[a, b], [c, d]] and a != 0 the map splits into two one-axis
    shears: w(t, s) = v(t, (c/a) t + (det/a) s), then out(z) = w(a z1 + b z2, z2).
    Rows are swapped first when |c| > |a| (partial pivoting).
    """
    M = np.asarray(M, dtype=float)
    if np.array_equal(M, np.eye(2)):
        return values.copy()
    a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    if abs(c) > abs(a):
        return affine_resample_2d(np.swapaxes(values, -1, -2), spec, M[::-1])
    det = a * d - b * c
    if abs(a) < 1e-14 or abs(det) < 1e-14:
        raise ValueError("affine_resample_2d: singular map")
    w = np.swapaxes(values, -1, -2)
    w = np.swapaxes(_shear_first(w, spec, det / a, c / a), -1, -2)
    return _shear_first(w, spec, a, b)


def _shear_first(values: np.ndarray, spec: GridSpec, alpha: float, s: float) -> np.ndarray:
    """out[..., i, j] = v(alpha u_i + s u_j, u_j), resampling along axis -2."""
    u = spec.axis
    if s == 0.0:
        if alpha == 1.0:
            return values.copy()
        return fourier_resample(values, spec, alpha * u, axis=-2)
    k = _freqs(spec.N)
    coeff = np.fft.fft(values, axis=-2) / spec.N                       # (..., k, j)
    coeff[..., spec.N // 2, :] = 0.0
    phase = np.exp(1j * np.pi * np.outer(k, s * u) / spec.L)           # (k, j)
    E = np.exp(1j * np.pi * np.outer(alpha * u + spec.L, k) / spec.L)  # (i, k)
    out = E @ (coeff * phase)
    pts = alpha * u[:, None] + s * u[None, :]
    return out * ((pts >= -spec.L) & (pts < spec.L))
