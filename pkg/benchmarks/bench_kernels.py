"""Compiled vs pure-numpy kernels, and FFT vs naive assembly of pi_r(f).

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from qheis import _backend, _pykernels
from qheis.algebra import TestFunction
from qheis.kernel import GridSpec, eta
from qheis.representations import pi_r_matrix


def best_of(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_naive_kernel(mod, repeat, N=256, M=256, Nx=8):
    rng = np.random.default_rng(0)
    fs = rng.standard_normal((Nx, M)) + 1j * rng.standard_normal((Nx, M))
    u = np.linspace(-8, 8, N, endpoint=False)
    y = np.linspace(-3, 3, M, endpoint=False)
    return best_of(lambda: mod.naive_rep_kernel(fs, u, y, 1.3, 6 / M, _backend.threads()), repeat)


def bench_conv(mod, repeat, N=48):
    rng = np.random.default_rng(1)
    F = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    t = np.linspace(-4, 4, N, endpoint=False)
    return best_of(lambda: mod.twisted_conv_direct(F, G, t, 0.7, 8 / N, _backend.threads()), repeat)


def bench_assembly(repeat, r=0.3):
    spec = GridSpec(1, 256, 8.0)
    f = TestFunction.random(np.random.default_rng(2))
    F = f.fiber(r).xy
    et = float(eta(1.0, r))
    t_fft, A = best_of(lambda: pi_r_matrix(F, et, spec, "fft"), repeat)
    t_naive, B = best_of(lambda: pi_r_matrix(F, et, spec, "naive"), max(1, repeat // 3))
    return t_fft, t_naive, float(np.linalg.norm(A - B) / np.linalg.norm(B))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)

    rows = {"backend": _backend.BACKEND, "threads": _backend.threads()}
    for name, bench in (("naive_rep_kernel", bench_naive_kernel), ("twisted_conv_direct", bench_conv)):
        t_py, out_py = bench(_pykernels, args.repeat)
        rows[name] = {"python_s": t_py}
        if _backend.compiled_kernels is not None:
            t_c, out_c = bench(_backend.compiled_kernels, args.repeat)
            rows[name].update(compiled_s=t_c, speedup=t_py / t_c,
                              max_rel_diff=float(np.abs(out_c - out_py).max() / np.abs(out_py).max()))
    t_fft, t_naive, diff = bench_assembly(args.repeat)
    rows["pi_r_assembly_N256"] = {"fft_s": t_fft, "naive_s": t_naive, "speedup": t_naive / t_fft,
                                  "rel_diff": diff}

    for k, v in rows.items():
        if isinstance(v, dict):
            print(f"{k:22s} " + "  ".join(f"{a}={b:.3g}" for a, b in v.items()))
        else:
            print(f"{k:22s} {v}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
