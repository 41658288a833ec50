"""Pure-numpy versions of the compiled kernels (same signatures)."""
from __future__ import annotations

import numpy as np

_CHUNK = 1 << 21


def naive_rep_kernel(fs, u, y, eta, hy, threads=1):
    """K[i, j] = hy * sum_m fs[j, m] exp(-2 pi i eta u_i y_m), term by term."""
    fs = np.ascontiguousarray(fs, dtype=complex)
    u = np.ascontiguousarray(u, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    N, (Nx, M) = len(u), fs.shape
    K = np.empty((N, Nx), dtype=complex)
    rows = max(1, _CHUNK // max(M, 1))
    for j in range(Nx):
        for s in range(0, N, rows):
            ph = np.exp(-2j * np.pi * eta * np.multiply.outer(u[s:s + rows], y))
            K[s:s + rows, j] = hy * np.sum(ph * fs[j], axis=1)
    return K


def twisted_conv_direct(F, G, t, eta, h, threads=1):
    """out[A, B] = h^2 sum_{a,b} F[a, b] G[A-a+N/2, B-b+N/2] exp(-2 pi i eta t_a (t_B - t_b))."""
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    t = np.asarray(t, dtype=float)
    N = len(t)
    c = N // 2
    out = np.zeros((N, N), dtype=complex)
    idx = np.arange(N)
    for a in range(N):
        ia = idx - a + c
        okA = (ia >= 0) & (ia < N)
        for b in range(N):
            if F[a, b] == 0:
                continue
            ib = idx - b + c
            okB = (ib >= 0) & (ib < N)
            blk = np.zeros((N, N), dtype=complex)
            blk[np.ix_(okA, okB)] = G[np.ix_(ia[okA], ib[okB])]
            ph = np.exp(-2j * np.pi * eta * t[a] * (t - t[b]))
            out += F[a, b] * blk * ph[None, :]
    return h * h * out
