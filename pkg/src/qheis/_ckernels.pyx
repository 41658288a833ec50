# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: naive integrated-form assembly and direct twisted convolution."""
import numpy as np
cimport cython
from cython.parallel cimport prange
from libc.math cimport cos, sin, M_PI


def naive_rep_kernel(double complex[:, ::1] fs, double[::1] u, double[::1] y,
                     double eta, double hy, int threads=1):
    cdef Py_ssize_t N = u.shape[0], Nx = fs.shape[0], M = fs.shape[1]
    cdef Py_ssize_t i, j, m
    cdef double th, re, im
    cdef double complex v
    out = np.empty((N, Nx), dtype=np.complex128)
    cdef double complex[:, ::1] K = out
    for i in prange(N, nogil=True, num_threads=threads, schedule="static"):
        for j in range(Nx):
            re = 0.0
            im = 0.0
            for m in range(M):
                th = 2.0 * M_PI * eta * u[i] * y[m]
                v = fs[j, m]
                re = re + v.real * cos(th) + v.imag * sin(th)
                im = im + v.imag * cos(th) - v.real * sin(th)
            K[i, j] = hy * (re + 1j * im)
    return out


def twisted_conv_direct(double complex[:, ::1] F, double complex[:, ::1] G, double[::1] t,
                        double eta, double h, int threads=1):
    cdef Py_ssize_t N = t.shape[0], c = N // 2
    cdef Py_ssize_t A, B, a, b, ia, ib
    cdef double th, re, im
    cdef double complex f, g
    out = np.empty((N, N), dtype=np.complex128)
    cdef double complex[:, ::1] O = out
    for A in prange(N, nogil=True, num_threads=threads, schedule="dynamic"):
        for B in range(N):
            re = 0.0
            im = 0.0
            for a in range(N):
                ia = A - a + c
                if ia < 0 or ia >= N:
                    continue
                for b in range(N):
                    ib = B - b + c
                    if ib < 0 or ib >= N:
                        continue
                    f = F[a, b]
                    g = G[ia, ib]
                    f = f * g
                    th = 2.0 * M_PI * eta * t[a] * (t[B] - t[b])
                    re = re + f.real * cos(th) + f.imag * sin(th)
                    im = im + f.imag * cos(th) - f.real * sin(th)
            O[A, B] = h * h * (re + 1j * im)
    return out
