"""Command-line entry point: ``qheis verify | orbits | braid``.

Exit status is 0 when every check passes, 1 when any check fails and 2 for
an invalid configuration and 3 when output cannot be written.
"""
from __future__ import annotations

import argparse
import json
import sys

from .harness import SPACES, SUITES, ConfigError, RunConfig, _atomic_write, emit_orbits, emit_report, run_suite


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qheis", description="Quantum Heisenberg group algebra verification harness")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run property suites and emit a JSON report")
    v.add_argument("--suite", action="append", choices=SUITES + ("all",),
                   help="suite to run (repeatable, default all)")
    v.add_argument("--lambda", dest="lam", type=float, default=1.0)
    v.add_argument("--n", type=int, default=1)
    v.add_argument("--grid-n", type=int, default=256)
    v.add_argument("--grid-l", type=float, default=8.0)
    v.add_argument("--tol", type=float, default=1e-6, help="grid tolerance scale (criterion tolerances at 1e-6)")
    v.add_argument("--tol-analytic", type=float, default=1e-8,
                   help="analytic tolerance scale (criterion tolerances at 1e-8)")
    v.add_argument("--seed", type=_seed, default=42)
    v.add_argument("--out", default=None, help="report path (stdout when omitted)")
    v.add_argument("--timing", action="store_true", help="record wall time (makes reports nondeterministic)")

    o = sub.add_parser("orbits", help="emit dressed orbit points as CSV")
    o.add_argument("--space", required=True, choices=sorted(SPACES))
    o.add_argument("--count", type=int, default=100)
    o.add_argument("--lambda", dest="lam", type=float, default=1.0)
    o.add_argument("--seed", type=_seed, default=42)
    o.add_argument("--n", type=int, default=1)
    o.add_argument("--out", default=None)

    b = sub.add_parser("braid", help="compose the two braidings of pi_r and pi_r'")
    b.add_argument("--r", type=float, required=True)
    b.add_argument("--r-prime", type=float, required=True)
    b.add_argument("--lambda", dest="lam", type=float, default=1.0)
    b.add_argument("--intertwining", action="store_true",
                   help="also test the intertwining identity on one random function (slow)")
    b.add_argument("--out", default=None)
    return p


def _fail_config(err: ConfigError) -> int:
    print(f"qheis: invalid configuration: {err}", file=sys.stderr)
    return 2


def _verify(args) -> int:
    try:
        cfg = RunConfig(lam=args.lam, n=args.n, grid_n=args.grid_n, grid_l=args.grid_l, tol_grid=args.tol,
                        tol_analytic=args.tol_analytic, seed=args.seed, suites=tuple(args.suite or ("all",)),
                        out=args.out, timing=args.timing)
    except ConfigError as err:
        return _fail_config(err)
    report = run_suite(cfg)
    text = emit_report(report, args.out)
    if args.out is None:
        sys.stdout.write(text)
    s = report.summary
    print(f"qheis: {s['passed']} passed, {s['failed']} failed", file=sys.stderr)
    for c in report.checks:
        if not c.passed:
            print(f"  FAIL {c.name}: residual {c.residual:.3e} > tol {c.tol:.1e}", file=sys.stderr)
    return 0 if report.ok else 1


def _orbits(args) -> int:
    if args.count < 0:
        return _fail_config(ConfigError("count", "must be nonnegative"))
    if args.n not in (1, 2):
        return _fail_config(ConfigError("n", "must be 1 or 2"))
    text = emit_orbits(args.space, args.count, args.lam, args.seed, args.out, args.n)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def _braid(args) -> int:
    import numpy as np

    from . import braiding as br
    from .algebra import TestFunction

    funcs = ()
    if args.intertwining:
        rng = np.random.Generator(np.random.Philox(42))
        funcs = (TestFunction.random(rng, "A", 1, ax=(4.0, 6.0), ay=(1.5, 2.5)),)
    rep = br.braid_composition(args.r, args.r_prime, args.lam, functions=funcs,
                               thresholds={"intertwining": 1e-6, "composition": 1e-6})
    text = json.dumps(rep.as_dict(), indent=2) + "\n"
    if args.out is not None:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0 if rep.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"verify": _verify, "orbits": _orbits, "braid": _braid}[args.command](args)
    except ConfigError as err:
        return _fail_config(err)
    except OSError as err:
        print(f"qheis: cannot write output: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
