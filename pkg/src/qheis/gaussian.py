"""Closed-form complex Gaussian sums.

A ``GaussianSum`` on R^d is  sum_t c_t exp(-z^T A_t z + b_t^T z)  with complex
symmetric A_t whose real part is positive semidefinite.  Products, affine
substitutions, quadratic phase factors and partial integration keep the
class closed, so every operator in this package acting on Gaussian data
can be evaluated without quadrature.  This backend is the analytic oracle
for the grid computations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaussianSum:
    c: np.ndarray   # (T,)
    A: np.ndarray   # (T, d, d)
    b: np.ndarray   # (T, d)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex).reshape(-1)
        A = np.asarray(self.A, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        T = c.shape[0]
        if A.ndim == 2:
            A = np.broadcast_to(A, (T,) + A.shape).copy()
        if b.ndim == 1:
            b = np.broadcast_to(b, (T,) + b.shape).copy()
        A = 0.5 * (A + np.swapaxes(A, -1, -2))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A.reshape(T, *A.shape[-2:]))
        object.__setattr__(self, "b", b.reshape(T, A.shape[-1]))

    # -- construction -------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.A.shape[-1]

    def __len__(self):
        return self.c.shape[0]

    @staticmethod
    def zero(d: int) -> "GaussianSum":
        return GaussianSum(np.zeros(0), np.zeros((0, d, d)), np.zeros((0, d)))

    @staticmethod
    def single(c, A, b) -> "GaussianSum":
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        return GaussianSum(np.array([c]), A[None], np.asarray(b, dtype=complex).reshape(1, -1))

    @staticmethod
    def isotropic(c, a, b) -> "GaussianSum":
        """c exp(-a |z|^2 + b.z)."""
        b = np.atleast_1d(np.asarray(b, dtype=complex))
        return GaussianSum.single(c, a * np.eye(len(b)), b)

    def prune(self, tol: float = 0.0) -> "GaussianSum":
        keep = np.abs(self.c) > tol
        return GaussianSum(self.c[keep], self.A[keep], self.b[keep])

    # -- algebra ------------------------------------------------------------
    def __add__(self, other: "GaussianSum") -> "GaussianSum":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return GaussianSum(np.concatenate([self.c, other.c]), np.concatenate([self.A, other.A]),
                           np.concatenate([self.b, other.b]))

    def __neg__(self):
        return GaussianSum(-self.c, self.A, self.b)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "GaussianSum":
        return GaussianSum(s * self.c, self.A, self.b)

    def __mul__(self, other):
        if not isinstance(other, GaussianSum):
            return self.scale(other)
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        T1, T2 = len(self), len(other)
        c = np.multiply.outer(self.c, other.c).reshape(-1)
        A = (self.A[:, None] + other.A[None]).reshape(T1 * T2, self.dim, self.dim)
        b = (self.b[:, None] + other.b[None]).reshape(T1 * T2, self.dim)
        return GaussianSum(c, A, b)

    __rmul__ = scale

    def conj(self) -> "GaussianSum":
        """Complex conjugate as a function of real arguments."""
        return GaussianSum(self.c.conj(), self.A.conj(), self.b.conj())

    def multiply_exp(self, A=None, b=None, c=1.0) -> "GaussianSum":
        """Multiply by c exp(-z^T A z + b^T z) (A need not be definite)."""
        d = self.dim
        A = np.zeros((d, d)) if A is None else np.asarray(A, dtype=complex)
        b = np.zeros(d) if b is None else np.asarray(b, dtype=complex)
        return GaussianSum(c * self.c, self.A + A, self.b + b)

    def affine(self, M, t=None) -> "GaussianSum":
        """z' -> self(M z' + t), with M of shape (d, d_new)."""
        M = np.asarray(M, dtype=float).reshape(self.dim, -1)
        t = np.zeros(self.dim) if t is None else np.asarray(t, dtype=float)
        A2 = np.einsum("ia,tij,jb->tab", M, self.A, M)
        At = np.einsum("tij,j->ti", self.A, t)
        b2 = (self.b - 2.0 * At) @ M
        c2 = self.c * np.exp(-np.einsum("i,ti->t", t, At) + self.b @ t)
        return GaussianSum(c2, A2, b2)

    def integrate(self, idx) -> "GaussianSum":
        """Integrate out the coordinates listed in idx over R^m."""
        idx = sorted(set(int(i) for i in np.atleast_1d(idx)))
        keep = [i for i in range(self.dim) if i not in idx]
        m = len(idx)
        if m == 0:
            return self
        Aii = self.A[:, idx][:, :, idx]
        Aik = self.A[:, idx][:, :, keep]
        bi = self.b[:, idx]
        bk = self.b[:, keep]
        if np.any(np.linalg.eigvalsh(Aii.real) <= 0):
            raise ValueError("integral diverges: real part not positive definite")
        X = np.linalg.inv(Aii)
        Xb = np.einsum("tij,tj->ti", X, bi)
        A2 = self.A[:, keep][:, :, keep] - np.einsum("tji,tjk,tkl->til", Aik, X, Aik)
        b2 = bk - np.einsum("tji,tj->ti", Aik, Xb)
        ev = np.linalg.eigvals(Aii)
        det_inv_sqrt = np.prod(1.0 / np.sqrt(ev), axis=-1)
        c2 = self.c * np.pi ** (m / 2) * det_inv_sqrt * np.exp(0.25 * np.einsum("ti,ti->t", bi, Xb))
        return GaussianSum(c2, A2, b2)

    def total(self) -> complex:
        if len(self) == 0:
            return 0j
        return complex(np.sum(self.integrate(range(self.dim)).c))

    def inner(self, other: "GaussianSum") -> complex:
        """<self, other> = int conj(self) other."""
        if len(self) == 0 or len(other) == 0:
            return 0j
        return (self.conj() * other).total()

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def fourier(self, idx) -> "GaussianSum":
        """Partial transform  F(k) = int f(z) ebar(k . z_idx) dz_idx.

        The transformed coordinates keep their positions."""
        idx = list(np.atleast_1d(idx))
        d = self.dim
        # joint variables (z, k_idx); phase exp(-2 pi i k.z_idx)
        m = len(idx)
        emb = np.zeros((d, d + m))
        emb[:, :d] = np.eye(d)
        joint = self.affine(emb)
        Q = np.zeros((d + m, d + m), dtype=complex)
        for j, i in enumerate(idx):
            Q[i, d + j] = Q[d + j, i] = 1j * np.pi
        out = joint.multiply_exp(A=Q).integrate(idx)
        # reorder so k_j sits where z_idx[j] was
        keep = [i for i in range(d) if i not in idx]
        order = keep + idx
        P = np.eye(d)[order]
        return out.affine(P)

    # -- evaluation ---------------------------------------------------------
    def __call__(self, *coords) -> np.ndarray:
        """Evaluate at broadcastable coordinate arrays (one per dimension)."""
        if len(coords) == 1 and self.dim > 1:
            z = np.asarray(coords[0], dtype=float)
        else:
            z = np.stack(np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords]), axis=-1)
        shape = z.shape[:-1]
        zf = z.reshape(-1, self.dim)
        out = np.zeros(zf.shape[0], dtype=complex)
        chunk = max(1, 2_000_000 // max(len(self), 1))
        for s in range(0, zf.shape[0], chunk):
            zz = zf[s:s + chunk]
            quad = np.einsum("pi,tij,pj->tp", zz, self.A, zz)
            lin = self.b @ zz.T
            out[s:s + chunk] = np.einsum("t,tp->p", self.c, np.exp(-quad + lin))
        return out.reshape(shape)

    def evaluate_terms(self, *coords) -> np.ndarray:
        """Per-term values, shape (T, *broadcast shape)."""
        z = np.stack(np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords]), axis=-1)
        shape = z.shape[:-1]
        zf = z.reshape(-1, self.dim)
        quad = np.einsum("pi,tij,pj->tp", zf, self.A, zf)
        out = self.c[:, None] * np.exp(-quad + self.b @ zf.T)
        return out.reshape((len(self),) + shape)

    def peaks(self) -> np.ndarray:
        """Per-term maximum modulus over R^d (inf for non-decaying terms)."""
        out = np.empty(len(self))
        for t, (c, A, b) in enumerate(zip(self.c, self.A, self.b)):
            Ar = A.real
            if np.linalg.eigvalsh(Ar).min() <= 0:
                out[t] = np.inf
                continue
            br = b.real
            out[t] = abs(c) * np.exp(0.25 * br @ np.linalg.solve(Ar, br))
        return out

    def prune_relative(self, eps: float = 1e-18) -> "GaussianSum":
        """Drop terms whose peak is below eps times the largest peak."""
        if len(self) == 0:
            return self
        pk = self.peaks()
        keep = pk >= eps * pk.max()
        return GaussianSum(self.c[keep], self.A[keep], self.b[keep])

    def support_radius(self, eps: float = 1e-17, idx=None) -> float:
        """Radius outside which every term is below eps times the largest term peak.

        With ``idx`` the radius refers to those coordinates only, maximizing
        each term over the remaining ones."""
        if len(self) == 0:
            return 0.0
        pk = self.peaks()
        top = pk.max()
        if not np.isfinite(top):
            return np.inf
        sel = list(range(self.dim)) if idx is None else list(np.atleast_1d(idx))
        rest = [i for i in range(self.dim) if i not in sel]
        rad = 0.0
        for p, A, b in zip(pk, self.A, self.b):
            if p == 0.0:
                continue
            Ar = A.real
            center = np.linalg.solve(2 * Ar, b.real)[sel]
            S = Ar[np.ix_(sel, sel)]
            if rest:
                S = S - Ar[np.ix_(sel, rest)] @ np.linalg.solve(Ar[np.ix_(rest, rest)], Ar[np.ix_(rest, sel)])
            lo = np.linalg.eigvalsh(S).min()
            rad = max(rad, np.linalg.norm(center) + np.sqrt(max(np.log(p / (eps * top)), 0.0) / lo))
        return float(rad)
