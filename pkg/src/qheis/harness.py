"""Verification harness: configuration, check suites, JSON reports and
orbit CSV data.

Every check draws its randomness from a Philox generator keyed by the run
seed and the check name, so a check's residual does not depend on which
other suites were selected.  Reports are byte-identical for a fixed
configuration; ``wall_ms`` is null unless timing is requested.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import braiding as br
from .algebra import TestFunction, involution, quotient_multiply, sigma
from .dressing import (ACTIONS, FAMILIES, SPACE_ACTION, OrbitDescriptor, classify_orbit, dress, dress_via_double,
                       orbit_seed, random_actor)
from .groups import (NAMES, DoubleLieVector, GroupElement, GroupId, bracket, bracket_gtilde,
                     bracket_htilde, coord_distance, inverse, multiply)
from .kernel import (GridSpec, eta, gaussian_battery, operator_residual, unitarity_residual)
from .representations import (RepId, RepresentingPair, Q_operator, homomorphism_residual,
                              integrated_form, pi_r_matrix, restricted_Q, restriction_block_residual,
                              validate_representing_pair)

SUITES = ("groups", "dressing", "algebra", "representations", "braiding")
SPACES = {"G": "G", "Gt": "Gtilde", "H": "H", "Ht": "Htilde"}


class ConfigError(ValueError):
    def __init__(self, fieldname: str, message: str):
        super().__init__(f"{fieldname}: {message}")
        self.field = fieldname


@dataclass(frozen=True)
class RunConfig:
    lam: float = 1.0
    n: int = 1
    grid_n: int = 256
    grid_l: float = 8.0
    tol_grid: float = 1e-6
    tol_analytic: float = 1e-8
    seed: int = 42
    suites: tuple = ("all",)
    out: str | None = None
    timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "suites", tuple(self.suites))
        self.validate()

    def validate(self):
        if not np.isfinite(self.lam):
            raise ConfigError("lambda", "must be finite")
        if self.n not in (1, 2):
            raise ConfigError("n", "must be 1 or 2")
        N = self.grid_n
        if N < 16 or N & (N - 1):
            raise ConfigError("grid_n", "must be a power of two >= 16")
        if not self.grid_l > 0:
            raise ConfigError("grid_l", "must be positive")
        if not (self.tol_grid > 0 and self.tol_analytic > 0):
            raise ConfigError("tol", "tolerances must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if not self.suites:
            raise ConfigError("suites", "select at least one suite")
        bad = [s for s in self.suites if s not in SUITES + ("all",)]
        if bad:
            raise ConfigError("suites", f"unknown suite {bad[0]!r}")
        if self.n == 2 and set(self.selected()) & {"representations", "braiding"}:
            raise ConfigError("n", "grid suites (representations, braiding) run with n = 1")

    def selected(self) -> tuple:
        if "all" in self.suites:
            return SUITES
        return tuple(s for s in SUITES if s in self.suites)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "n": self.n, "grid_n": self.grid_n, "grid_l": self.grid_l,
                "tol_grid": self.tol_grid, "tol_analytic": self.tol_analytic, "seed": int(self.seed),
                "suites": list(self.selected())}


@dataclass(frozen=True)
class CheckRecord:
    name: str
    anchor: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def as_dict(self) -> dict:
        return {"name": self.name, "anchor": self.anchor, "residual": self.residual,
                "tol": self.tol, "pass": self.passed}


@dataclass(frozen=True)
class Report:
    config: dict
    checks: tuple = ()
    wall_ms: float | None = None

    @property
    def summary(self) -> dict:
        passed = sum(c.passed for c in self.checks)
        return {"passed": passed, "failed": len(self.checks) - passed}

    @property
    def ok(self) -> bool:
        return self.summary["failed"] == 0

    def as_dict(self) -> dict:
        return {"config": self.config, "checks": [c.as_dict() for c in self.checks],
                "summary": self.summary, "wall_ms": self.wall_ms}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, ensure_ascii=False) + "\n"

    @staticmethod
    def from_json(text: str) -> "Report":
        d = json.loads(text)
        checks = tuple(CheckRecord(c["name"], c["anchor"], float(c["residual"]), float(c["tol"]))
                       for c in d["checks"])
        rep = Report(d["config"], checks, d["wall_ms"])
        if rep.summary != d["summary"]:
            raise ValueError("summary does not match the check records")
        return rep


# ----------------------------------------------------------------------------
# check context
# ----------------------------------------------------------------------------

@dataclass
class Context:
    cfg: RunConfig
    cache: dict = field(default_factory=dict)

    def rng(self, key: str) -> np.random.Generator:
        ss = np.random.SeedSequence([int(self.cfg.seed), zlib.crc32(key.encode())])
        return np.random.Generator(np.random.Philox(ss))

    @property
    def lam(self) -> float:
        return self.cfg.lam

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.cfg.n, self.cfg.grid_n, self.cfg.grid_l)

    @property
    def tensor_spec(self) -> GridSpec:
        return GridSpec(1, 2 * self.cfg.grid_n, 1.25 * self.cfg.grid_l)

    def battery(self, count: int = 4, key: str = "battery"):
        k = ("battery", count, key)
        if k not in self.cache:
            self.cache[k] = gaussian_battery(self.spec, count, self.rng(key))
        return self.cache[k]

    def tensor_battery(self):
        if "tensor" not in self.cache:
            self.cache["tensor"] = br.tensor_battery(self.tensor_spec, 2, self.rng("tensor-battery"))
        return self.cache["tensor"]


@dataclass(frozen=True)
class Check:
    suite: str
    key: str
    anchor: str
    tol: float
    kind: str          # "grid" or "analytic": which configured tolerance scales it
    fn: object

    @property
    def name(self) -> str:
        return f"{self.key} [{self.anchor}]"


_DEFAULT = RunConfig.__dataclass_fields__


def _scaled_tol(check: Check, cfg: RunConfig) -> float:
    if check.kind == "grid":
        return check.tol * cfg.tol_grid / _DEFAULT["tol_grid"].default
    if check.kind == "analytic":
        return check.tol * cfg.tol_analytic / _DEFAULT["tol_analytic"].default
    return check.tol


CHECKS: list = []


def check(suite, key, anchor, tol, kind="analytic"):
    def deco(fn):
        CHECKS.append(Check(suite, key, anchor, tol, kind, fn))
        return fn
    return deco


def _rel(a, b, scale=None):
    scale = np.maximum(1.0, np.abs(a)) if scale is None else scale
    return float(np.max(np.abs(a - b) / scale))


# ----------------------------------------------------------------------------
# groups
# ----------------------------------------------------------------------------

def _gid(ctx, name):
    return GroupId(name, ctx.cfg.n, ctx.lam, 0.3)


def _group_residual(ctx, name, law):
    gid = _gid(ctx, name)
    rng = ctx.rng(f"group-{name}-{law}")
    a, b, c = (gid.random(rng, 10_000, 0.7) for _ in range(3))
    scale = 1.0 + np.max(np.abs(np.stack([a.coords, b.coords, c.coords])), axis=(0, -1))
    if law == "assoc":
        d = coord_distance(multiply(multiply(a, b), c), multiply(a, multiply(b, c)))
    elif law == "identity":
        e = GroupElement(gid, np.zeros_like(a.coords))
        d = np.maximum(coord_distance(multiply(a, e), a), coord_distance(multiply(e, a), a))
    else:
        e = GroupElement(gid, np.zeros_like(a.coords))
        ai = inverse(a)
        d = np.maximum(coord_distance(multiply(a, ai), e), coord_distance(multiply(ai, a), e))
    return float(np.max(d / scale))


for _name in NAMES:
    for _law, _what in (("assoc", "associativity"), ("identity", "identity"), ("inverse", "inverse")):
        check("groups", f"groups.{_name}.{_law}", f"{_name} group law {_what}", 1e-9, "none")(
            lambda ctx, _n=_name, _l=_law: _group_residual(ctx, _n, _l))


def _lie_triples(ctx, key, m=1000):
    rng = ctx.rng(key)
    d = 4 * ctx.cfg.n + 4
    return [DoubleLieVector(ctx.cfg.n, rng.standard_normal((m, d))) for _ in range(3)]


def _norms(v):
    return np.linalg.norm(v.coords, axis=-1)


@check("groups", "lie.antisymmetry", "double Lie algebra bracket antisymmetry", 1e-9, "none")
def _lie_antisym(ctx):
    a, b, _ = _lie_triples(ctx, "lie-antisym")
    s = bracket(a, b, ctx.lam).coords + bracket(b, a, ctx.lam).coords
    return float(np.max(np.linalg.norm(s, axis=-1) / (_norms(a) * _norms(b))))


@check("groups", "lie.jacobi", "double Lie algebra Jacobi identity", 1e-9, "none")
def _lie_jacobi(ctx):
    a, b, c = _lie_triples(ctx, "lie-jacobi")
    lam = ctx.lam
    j = (bracket(a, bracket(b, c, lam), lam).coords + bracket(b, bracket(c, a, lam), lam).coords
         + bracket(c, bracket(a, b, lam), lam).coords)
    return float(np.max(np.linalg.norm(j, axis=-1) / (_norms(a) * _norms(b) * _norms(c))))


@check("groups", "lie.subalgebras", "bracket restricts to the gtilde and htilde brackets", 1e-9, "none")
def _lie_sub(ctx):
    n, lam = ctx.cfg.n, ctx.lam
    a, b, _ = _lie_triples(ctx, "lie-sub")
    k = 2 * n + 2
    ga, gb = a.coords.copy(), b.coords.copy()
    ga[:, k:] = gb[:, k:] = 0.0
    ha, hb = a.coords.copy(), b.coords.copy()
    ha[:, :k] = hb[:, :k] = 0.0
    g = bracket(DoubleLieVector(n, ga), DoubleLieVector(n, gb), lam).coords
    h = bracket(DoubleLieVector(n, ha), DoubleLieVector(n, hb), lam).coords
    res = max(np.max(np.abs(g[:, :k] - bracket_gtilde(ga[:, :k], gb[:, :k], n, lam))),
              np.max(np.abs(g[:, k:])),
              np.max(np.abs(h[:, k:] - bracket_htilde(ha[:, k:], hb[:, k:], n))),
              np.max(np.abs(h[:, :k])))
    return float(res / max(1.0, np.max(_norms(a) * _norms(b))))


# ----------------------------------------------------------------------------
# dressing
# ----------------------------------------------------------------------------

def _action_samples(ctx, action, key, m=1000):
    actor, point = ACTIONS[action]
    rng = ctx.rng(key)
    n = ctx.cfg.n
    ga, gp = GroupId(actor, n, ctx.lam), GroupId(point, n, ctx.lam)
    return ga.random(rng, m, 0.7), ga.random(rng, m, 0.7), gp.random(rng, m, 0.7)


def _right_action(ctx, action):
    a, b, g = _action_samples(ctx, action, f"dress-law-{action}")
    lhs = dress(action, multiply(a, b), g, ctx.lam)
    rhs = dress(action, b, dress(action, a, g, ctx.lam), ctx.lam)
    return float(np.max(coord_distance(lhs, rhs) / (1 + np.max(np.abs(lhs.coords), axis=-1))))


def _double_oracle(ctx, action):
    a, _, g = _action_samples(ctx, action, f"dress-double-{action}")
    lhs = dress(action, a, g, ctx.lam)
    rhs = dress_via_double(action, a, g, ctx.lam)
    return float(np.max(coord_distance(lhs, rhs) / (1 + np.max(np.abs(lhs.coords), axis=-1))))


for _action in ACTIONS:
    check("dressing", f"dressing.{_action}.right_action", f"{_action} is a right action", 1e-8, "analytic")(
        lambda ctx, _a=_action: _right_action(ctx, _a))
    check("dressing", f"dressing.{_action}.double_factorization",
          f"{_action} closed form agrees with the double-group factorization", 1e-8, "analytic")(
        lambda ctx, _a=_action: _double_oracle(ctx, _a))


def _descriptor_residual(d1, d2) -> float:
    if (d1.space, d1.family) != (d2.space, d2.family) or len(d1.params) != len(d2.params):
        return np.inf
    a, b = np.asarray(d1.params), np.asarray(d2.params)
    return _rel(a, b) if a.size else 0.0


def _orbit_invariance(ctx, space, m=1000):
    rng = ctx.rng(f"orbit-{space}")
    n, lam = ctx.cfg.n, ctx.lam
    fams = FAMILIES[space]
    worst = 0.0
    for i in range(m):
        seed = orbit_seed(space, fams[i % len(fams)], n, lam, rng)
        actor = random_actor(space, n, lam, rng)
        moved = dress(SPACE_ACTION[space], actor, seed, lam)
        worst = max(worst, _descriptor_residual(classify_orbit(space, seed, lam),
                                                classify_orbit(space, moved, lam)))
    return worst


for _space in FAMILIES:
    check("dressing", f"dressing.{_space}.orbit_invariance",
          f"orbit classification is constant along {_space} dressing orbits", 1e-8, "analytic")(
        lambda ctx, _s=_space: _orbit_invariance(ctx, _s))


@check("dressing", "dressing.H_on_G.lambda0", "H on G at lambda 0 is (p - r y, q + r x, r)", 1e-12, "none")
def _h_on_g_lambda0(ctx):
    n = ctx.cfg.n
    a, _, g = _action_samples(ctx, "H_on_G", "dress-lambda0")
    a = GroupElement(GroupId("H", n), a.coords)
    g = GroupElement(GroupId("G", n, 0.0), g.coords)
    out = dress("H_on_G", a, g, 0.0).coords
    x, y = a.coords[:, :n], a.coords[:, n:2 * n]
    p, q, r = g.coords[:, :n], g.coords[:, n:2 * n], g.coords[:, 2 * n:]
    want = np.concatenate([p - r * y, q + r * x, r], axis=-1)
    return float(np.max(np.abs(out - want)))


@check("dressing", "dressing.orbit_csv.self_classify", "emitted orbit rows classify as their seeds", 1e-8,
       "analytic")
def _orbit_csv(ctx):
    worst = 0.0
    for space in SPACES:
        text = orbit_csv(space, 40, ctx.lam, ctx.cfg.seed, ctx.cfg.n)
        worst = max(worst, verify_orbit_csv(text, space, ctx.lam, ctx.cfg.n))
    return worst


# ----------------------------------------------------------------------------
# algebra (cocycles)
# ----------------------------------------------------------------------------

def _cocycle_samples(ctx, variant, key, m=10_000):
    rng = ctx.rng(key)
    n = ctx.cfg.n
    d = 2 * n + (1 if variant == "Atilde" else 0)
    g = [rng.uniform(-2, 2, (m, d)) for _ in range(3)]
    if variant == "Atilde":
        for a in g:
            a[:, -1] = rng.uniform(-1, 1, m)
    return g


def _cocycle_identity(ctx, variant):
    g1, g2, g3 = _cocycle_samples(ctx, variant, f"cocycle-{variant}")
    r = ctx.rng(f"cocycle-r-{variant}").uniform(-1, 1)
    lam = ctx.lam
    lhs = sigma(variant, r, g1, g2, lam) * sigma(variant, r, quotient_multiply(variant, g1, g2), g3, lam)
    rhs = sigma(variant, r, g2, g3, lam) * sigma(variant, r, g1, quotient_multiply(variant, g2, g3), lam)
    return float(np.max(np.abs(lhs - rhs)))


def _cocycle_normalization(ctx, variant):
    g, _, _ = _cocycle_samples(ctx, variant, f"cocycle-norm-{variant}")
    e = np.zeros_like(g)
    r = ctx.rng(f"cocycle-norm-r-{variant}").uniform(-1, 1)
    return float(max(np.max(np.abs(sigma(variant, r, g, e, ctx.lam) - 1)),
                     np.max(np.abs(sigma(variant, r, e, g, ctx.lam) - 1))))


def _cocycle_trivial(ctx, variant):
    g1, g2, _ = _cocycle_samples(ctx, variant, f"cocycle-zero-{variant}")
    return float(np.max(np.abs(sigma(variant, 0.0, g1, g2, ctx.lam) - 1)))


for _v in ("A", "Atilde"):
    check("algebra", f"cocycle.{_v}.identity", f"cocycle identity of the {_v} cocycle", 1e-12, "none")(
        lambda ctx, _v=_v: _cocycle_identity(ctx, _v))
    check("algebra", f"cocycle.{_v}.normalization", f"{_v} cocycle is normalized", 1e-12, "none")(
        lambda ctx, _v=_v: _cocycle_normalization(ctx, _v))
    check("algebra", f"cocycle.{_v}.r0_trivial", f"{_v} cocycle at r = 0 is identically 1", 0.0, "none")(
        lambda ctx, _v=_v: _cocycle_trivial(ctx, _v))


# ----------------------------------------------------------------------------
# representations
# ----------------------------------------------------------------------------

R_SAMPLES = (-1.0, 0.3, 1.0)


def _Q_r_projective(ctx, r):
    fam = RepId("Q_r", (r,), ctx.lam, 1, ctx.spec)
    return validate_representing_pair(RepresentingPair(r, fam), rng=ctx.rng(f"Qr-{r}"),
                                      battery=ctx.battery(), count=12).max_residual


def _Qt_rs_projective(ctx, r):
    rng = ctx.rng(f"Qtrs-{r}")
    rep_id = RepId("Qt_rs", (r, 0.7), ctx.lam, 1, ctx.spec)
    gid = GroupId("Etilde", 1, ctx.lam, r)
    bat = ctx.battery()
    worst = 0.0
    for _ in range(8):
        ab = []
        for _ in range(2):
            c = gid.random(rng, scale=0.5).coords
            # dilated batteries must stay inside the box
            c[2] = rng.uniform(-0.5, 0.5)
            ab.append(GroupElement(gid, c))
        a, b = ab
        worst = max(worst, operator_residual(Q_operator(rep_id, a) @ Q_operator(rep_id, b),
                                             Q_operator(rep_id, multiply(a, b)), bat))
    return worst


def _test_functions(ctx, key, variant="A", count=2, **kw):
    rng = ctx.rng(key)
    return [TestFunction.random(rng, variant, 1, **kw) for _ in range(count)]


def _pi_r_hom(ctx, r):
    f, g = _test_functions(ctx, f"pi_r-hom-{r}")
    return homomorphism_residual(RepId("pi_r", (r,), ctx.lam, 1, ctx.spec), f, g, ctx.battery())


def _pit_rs_hom(ctx, r):
    f, g = _test_functions(ctx, f"pit_rs-hom-{r}", "Atilde")
    return homomorphism_residual(RepId("pit_rs", (r, 0.4), ctx.lam, 1, ctx.spec), f, g, ctx.battery(),
                                 backend="closed")


for _r in R_SAMPLES:
    check("representations", f"rep.Q_r.projective.r={_r:+.1f}",
          "Q_r is a projective representation with the r cocycle", 1e-8, "analytic")(
        lambda ctx, _r=_r: _Q_r_projective(ctx, _r))
    check("representations", f"rep.Qt_rs.projective.r={_r:+.1f}",
          "Qt_rs is a representation of Etilde", 1e-6, "grid")(
        lambda ctx, _r=_r: _Qt_rs_projective(ctx, _r))
    check("representations", f"rep.pi_r.homomorphism.r={_r:+.1f}", "pi_r(f * g) = pi_r(f) pi_r(g)",
          1e-6, "grid")(lambda ctx, _r=_r: _pi_r_hom(ctx, _r))
    check("representations", f"rep.pit_rs.homomorphism.r={_r:+.1f}",
          "pit_rs(f * g) = pit_rs(f) pit_rs(g)", 1e-5, "grid")(lambda ctx, _r=_r: _pit_rs_hom(ctx, _r))


@check("representations", "rep.pi_r.star", "pi_r(f*) = pi_r(f) adjoint", 1e-6, "grid")
def _star(ctx):
    worst = 0.0
    for r in R_SAMPLES:
        (f,) = _test_functions(ctx, f"star-{r}", count=1)
        rep_id = RepId("pi_r", (r,), ctx.lam, 1, ctx.spec)
        worst = max(worst, operator_residual(integrated_form(rep_id, involution(f, ctx.lam)),
                                             integrated_form(rep_id, f).adjoint(), ctx.battery()))
    return worst


@check("representations", "rep.Qt_rs.restriction", "Qt_rs restricted to E equals Q_r", 1e-12, "none")
def _restrict_Q(ctx):
    rng = ctx.rng("restrict-Q")
    worst = 0.0
    for r in R_SAMPLES:
        gid = GroupId("E", 1, ctx.lam, r)
        for _ in range(4):
            c = gid.random(rng, scale=0.7).coords
            c[:2] = ctx.spec.snap(c[:2])[0]
            g = GroupElement(gid, c)
            a = restricted_Q(RepId("Qt_rs", (r, 0.3), ctx.lam, 1, ctx.spec), g)
            b = Q_operator(RepId("Q_r", (r,), ctx.lam, 1, ctx.spec), g)
            worst = max(worst, operator_residual(a, b, ctx.battery()))
    return worst


@check("representations", "rep.pit_pq.direct_integral",
       "pit_pq restricted to A is the direct integral of pi_(e^w p, e^-w q)", 1e-5, "grid")
def _direct_integral(ctx):
    (f,) = _test_functions(ctx, "direct-integral", count=1)
    return restriction_block_residual(RepId("pit_pq", (0.3, -0.2), ctx.lam, 1), f, 33)


def _perf_pair(ctx):
    if "perf" not in ctx.cache:
        (f,) = _test_functions(ctx, "perf", count=1)
        F = f.fiber(0.3).xy
        et = float(eta(ctx.lam, 0.3))
        spec = ctx.spec

        def best(method):
            out, t = None, np.inf
            for _ in range(3):
                t0 = time.perf_counter()
                out = pi_r_matrix(F, et, spec, method)
                t = min(t, time.perf_counter() - t0)
            return out, t
        (Mf, tf), (Mn, tn) = best("fft"), best("naive")
        ctx.cache["perf"] = (Mf, Mn, tn / tf)
    return ctx.cache["perf"]


@check("representations", "perf.fft_matches_naive", "FFT assembly of pi_r(f) equals naive quadrature",
       1e-6, "grid")
def _perf_match(ctx):
    Mf, Mn, _ = _perf_pair(ctx)
    return float(np.max(np.abs(Mf - Mn)) / np.max(np.abs(Mn)))


@check("representations", "perf.fft_speedup", "FFT assembly at least 10x faster than naive", 1.0, "none")
def _perf_speed(ctx):
    # indicator: 0 when the warm speedup reaches 10, else 10 / speedup
    _, _, speedup = _perf_pair(ctx)
    return 0.0 if speedup >= 10.0 else float(10.0 / speedup)


# ----------------------------------------------------------------------------
# braiding
# ----------------------------------------------------------------------------

BRAID_R = (0.5, 0.7)


def _braid_functions(ctx, key="braid-f", count=3):
    return _test_functions(ctx, key, count=count, ax=(4.0, 6.0), ay=(1.5, 2.5))


@check("braiding", "braid.coproduct.coassociativity", "coproduct is coassociative", 1e-10, "analytic")
def _coassoc(ctx):
    (f,) = _test_functions(ctx, "coassoc", count=1)
    rng = ctx.rng("coassoc-g")
    gid = GroupId("G", 1, ctx.lam)
    D = br.comultiply(f, ctx.lam)
    worst = 0.0
    for _ in range(50):
        g1, g2, g3 = (gid.random(rng, scale=0.4) for _ in range(3))
        left = D.pqr(multiply(g1, g2).coords, g3.coords)
        right = D.pqr(g1.coords, multiply(g2, g3).coords)
        direct = D.fhat(*multiply(multiply(g1, g2), g3).coords)
        worst = max(worst, abs(left - right), abs(left - direct))
    return float(worst)


@check("braiding", "braid.inner.pq_pq", "pi_pq boxtimes pi_p'q' = pi_(p+p', q+q')", 1e-8, "analytic")
def _inner_pq(ctx):
    (f,) = _test_functions(ctx, "inner-pq", count=1)
    a = RepId("pi_pq", (0.3, -0.2), ctx.lam, 1)
    b = RepId("pi_pq", (-0.1, 0.5), ctx.lam, 1)
    s = RepId("pi_pq", (0.2, 0.3), ctx.lam, 1)
    return abs(br.inner_tensor(a, b, f, ctx.lam) - integrated_form(s, f))


@check("braiding", "braid.inner.pq_r", "pi_pq boxtimes pi_r = pi_r boxtimes pi_(e^(lam r) p, e^(lam r) q)",
       1e-6, "grid")
def _inner_pq_r(ctx):
    r, lam = BRAID_R[0], ctx.lam
    p, q = 0.3, -0.2
    a = np.exp(lam * r)
    Rr = RepId("pi_r", (r,), lam, 1, ctx.spec)
    worst = 0.0
    for f in _braid_functions(ctx):
        # independent assemblies: naive quadrature on one side, FFT on the other
        lhs = br.inner_tensor(RepId("pi_pq", (p, q), lam, 1), Rr, f, lam, ctx.spec, backend="naive")
        rhs = br.inner_tensor(Rr, RepId("pi_pq", (a * p, a * q), lam, 1), f, lam, ctx.spec)
        worst = max(worst, operator_residual(lhs, rhs, ctx.battery()))
    return worst


@check("braiding", "braid.inner.multiplicative", "(pi_r boxtimes pi_r')(f * g) is multiplicative",
       1e-5, "grid")
def _inner_mult(ctx):
    f, g = _braid_functions(ctx, "braid-mult", 2)
    spec = ctx.tensor_spec
    r1 = RepId("pi_r", (BRAID_R[0],), ctx.lam, 1, spec)
    r2 = RepId("pi_r", (-BRAID_R[1],), ctx.lam, 1, spec)
    return br.tensor_homomorphism_residual(r1, r2, f, g, ctx.tensor_battery(), ctx.lam, spec)


def _pq_intertwiners(ctx):
    r, lam = BRAID_R[0], ctx.lam
    p, q = 0.4, 0.3
    spec = ctx.spec
    Rr = RepId("pi_r", (r,), lam, 1, spec)
    Rpq = RepId("pi_pq", (p, q), lam, 1)
    return r, lam, p, q, spec, Rr, Rpq


@check("braiding", "braid.S.intertwines", "S (pi_r boxtimes pi_pq)(f) = pi_r(f) S", 1e-6, "grid")
def _S_inter(ctx):
    r, lam, p, q, spec, Rr, Rpq = _pq_intertwiners(ctx)
    S = br.S_operator(p, q, r, lam, spec)
    Si = br.S_operator(p, q, r, lam, spec, inverse=True)
    worst = 0.0
    for f in _braid_functions(ctx):
        A = br.inner_tensor(Rr, Rpq, f, lam, spec)
        B = integrated_form(Rr, f)
        worst = max(worst, operator_residual(S @ A, B @ S, ctx.battery()),
                    operator_residual(A @ Si, Si @ B, ctx.battery()))
    return worst


@check("braiding", "braid.T_pq.intertwines", "T_pq (pi_r boxtimes pi_pq)(f) = (pi_pq boxtimes pi_r)(f) T_pq",
       1e-6, "grid")
def _Tpq_inter(ctx):
    r, lam, p, q, spec, Rr, Rpq = _pq_intertwiners(ctx)
    T = br.T_pq_operator(p, q, r, lam, spec)
    worst = 0.0
    for f in _braid_functions(ctx):
        worst = max(worst, br.intertwining_residual(T, br.inner_tensor(Rr, Rpq, f, lam, spec),
                                                    br.inner_tensor(Rpq, Rr, f, lam, spec), ctx.battery()))
    return worst


@check("braiding", "braid.T_pq.closed_form", "T_pq as a product of S maps equals its closed form", 1e-6, "grid")
def _Tpq_closed(ctx):
    r, lam, p, q, spec, _, _ = _pq_intertwiners(ctx)
    return operator_residual(br.T_pq_operator(p, q, r, lam, spec), br.T_pq_closed(p, q, r, lam, spec),
                             ctx.battery())


@check("braiding", "braid.pq.unitary", "S, S^-1 and T_pq are unitary", 1e-6, "grid")
def _pq_unitary(ctx):
    r, lam, p, q, spec, _, _ = _pq_intertwiners(ctx)
    ops = (br.S_operator(p, q, r, lam, spec), br.S_operator(p, q, r, lam, spec, inverse=True),
           br.T_pq_operator(p, q, r, lam, spec))
    return max(unitarity_residual(T, ctx.battery()) for T in ops)


def _rr_intertwining(ctx):
    if "rr" not in ctx.cache:
        r1, r2 = BRAID_R
        lam, spec = ctx.lam, ctx.tensor_spec
        bat = ctx.tensor_battery()
        T = br.T_rr_operator(r1, r2, lam, spec)
        FR = br.fromR_operator(r1, r2, lam, spec)
        a = RepId("pi_r", (r1,), lam, 1, spec)
        b = RepId("pi_r", (r2,), lam, 1, spec)
        wT = wR = 0.0
        for f in _braid_functions(ctx):
            A = br.inner_tensor(a, b, f, lam, spec)
            B = br.inner_tensor(b, a, f, lam, spec)
            Av = A.apply(bat.values)
            wT = max(wT, _battery_residual(T.apply(Av), B.apply(T.apply(bat.values)), bat))
            wR = max(wR, _battery_residual(FR.apply(Av), B.apply(FR.apply(bat.values)), bat))
        ctx.cache["rr"] = (wT, wR)
    return ctx.cache["rr"]


def _battery_residual(x, y, bat):
    d = np.sqrt(bat.weight * np.sum(np.abs(x - y) ** 2, axis=tuple(range(1, x.ndim))))
    return float(np.max(d / bat.norms()))


@check("braiding", "braid.T_rr.intertwines",
       "T (pi_r boxtimes pi_r')(f) = (pi_r' boxtimes pi_r)(f) T", 1e-6, "grid")
def _Trr_inter(ctx):
    return _rr_intertwining(ctx)[0]


@check("braiding", "braid.fromR.intertwines", "flip R intertwines pi_r boxtimes pi_r'", 1e-6, "grid")
def _fromR_inter(ctx):
    return _rr_intertwining(ctx)[1]


@check("braiding", "braid.fromR.equals_T_rr", "flip R equals T_rr", 1e-6, "grid")
def _fromR_eq(ctx):
    r1, r2 = BRAID_R
    spec = ctx.tensor_spec
    return operator_residual(br.fromR_operator(r1, r2, ctx.lam, spec), br.T_rr_operator(r1, r2, ctx.lam, spec),
                             ctx.tensor_battery())


@check("braiding", "braid.rr.unitary", "T_rr and flip R are unitary", 1e-6, "grid")
def _rr_unitary(ctx):
    r1, r2 = BRAID_R
    spec = ctx.tensor_spec
    return max(unitarity_residual(br.T_rr_operator(r1, r2, ctx.lam, spec), ctx.tensor_battery()),
               unitarity_residual(br.fromR_operator(r1, r2, ctx.lam, spec), ctx.tensor_battery()))


@check("braiding", "braid.R.quadrature", "closed-form R action equals quadrature of the R function",
       1e-5, "grid")
def _R_quadrature(ctx):
    rng = ctx.rng("R-quadrature")
    A = rng.uniform(2.0, 3.5, 2)
    xi = br.GaussianSum.single(1.0, np.diag(A).astype(complex),
                               rng.uniform(-0.6, 0.6, 2) + 1j * rng.uniform(-1, 1, 2))
    pts = rng.uniform(-1.2, 1.2, (16, 2))
    r1, r2 = BRAID_R
    q = br.r_matrix_quadrature(xi, r1, r2, ctx.lam, pts)
    c = br.r_matrix_closed(xi, r1, r2, ctx.lam, pts)
    return float(np.max(np.abs(q - c)) / np.max(np.abs(c)))


@check("braiding", "braid.composition.closed_form",
       "T_r'r T_rr' equals the closed-form composition", 1e-6, "grid")
def _composition(ctx):
    rep = br.braid_composition(0.5, 0.5, ctx.lam, ctx.tensor_spec, ctx.tensor_battery())
    return rep.composition_vs_closed_form


@check("braiding", "braid.composition.nonidentity",
       "double braid differs from the identity (ratio 0.01 / distance)", 1.0, "none")
def _nonidentity(ctx):
    return float(0.01 / br.braid_distance_analytic(0.5, 0.5, 1.0))


@check("braiding", "braid.composition.regression", "double braid distance equals the frozen value",
       1e-12, "none")
def _regression(ctx):
    return abs(br.braid_distance_analytic(0.5, 0.5, 1.0) - br.FROZEN_BRAID_DISTANCE)


@check("braiding", "braid.composition.lambda0", "at lambda 0 the double braid is the identity", 1e-8,
       "analytic")
def _lambda0(ctx):
    return br.braid_composition(0.5, 0.7, 0.0, ctx.tensor_spec, ctx.tensor_battery()).grid_distance_to_identity


@check("braiding", "braid.composition.r0", "at r = r' = 0 the double braid is the identity", 1e-8,
       "analytic")
def _r0(ctx):
    return br.braid_composition(0.0, 0.0, ctx.lam, ctx.tensor_spec, ctx.tensor_battery()).grid_distance_to_identity


# ----------------------------------------------------------------------------
# running and output
# ----------------------------------------------------------------------------

def run_suite(config: RunConfig) -> Report:
    config.validate()
    ctx = Context(config)
    selected = config.selected()
    t0 = time.perf_counter()
    records = []
    for chk in CHECKS:
        if chk.suite not in selected:
            continue
        try:
            res = float(chk.fn(ctx))
        except Exception:          # a crashing check is a failing check
            res = float("inf")
        if not res >= 0:
            res = float("inf")
        records.append(CheckRecord(chk.name, chk.anchor, res, _scaled_tol(chk, config)))
    wall = (time.perf_counter() - t0) * 1e3 if config.timing else None
    return Report(config.as_dict(), tuple(records), wall)


def _atomic_write(path: str, text: str):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".qheis-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(report: Report, out) -> str:
    text = report.to_json()
    if out is not None:
        _atomic_write(out, text)
    return text


def load_report(path) -> Report:
    with open(path, encoding="utf-8") as fh:
        return Report.from_json(fh.read())


# ----------------------------------------------------------------------------
# orbit CSV
# ----------------------------------------------------------------------------

def _param_width(space: str, n: int) -> int:
    return {"Gtilde": 2 * n, "G": 2 * n, "Htilde": 2 * n + 1, "H": 2 * n}[space]


def orbit_csv(space: str, count: int, lam: float = 1.0, seed: int = 42, n: int = 1) -> str:
    """CSV text of dressed random points with the invariants of their seed orbit."""
    if space not in SPACES:
        raise ValueError(f"space must be one of {sorted(SPACES)}")
    if count < 0:
        raise ValueError("count must be nonnegative")
    full = SPACES[space]
    gid = GroupId(full, n, lam)
    width = _param_width(full, n)
    ss = np.random.SeedSequence([int(seed), zlib.crc32(f"orbits-{space}".encode())])
    rng = np.random.Generator(np.random.Philox(ss))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family"] + [f"param_{i}" for i in range(width)] + [f"coord_{i}" for i in range(gid.dim)])
    fams = FAMILIES[full]
    for i in range(count):
        seed_pt = orbit_seed(full, fams[int(rng.integers(len(fams)))], n, lam, rng)
        desc = classify_orbit(full, seed_pt, lam)
        pt = dress(SPACE_ACTION[full], random_actor(full, n, lam, rng), seed_pt, lam)
        params = [repr(float(p)) for p in desc.params] + [""] * (width - len(desc.params))
        w.writerow([desc.family] + params + [repr(float(c)) for c in pt.coords])
    return buf.getvalue()


def emit_orbits(space: str, count: int, lam: float = 1.0, seed: int = 42, out=None, n: int = 1) -> str:
    text = orbit_csv(space, count, lam, seed, n)
    if out is not None:
        _atomic_write(out, text)
    return text


def verify_orbit_csv(text: str, space: str, lam: float = 1.0, n: int = 1) -> float:
    """Largest relative mismatch between each row's stored invariants and
    the classification of its coordinates (inf on a family mismatch)."""
    full = SPACES[space]
    gid = GroupId(full, n, lam)
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    width = _param_width(full, n)
    worst = 0.0
    for row in body:
        fam = row[0]
        params = tuple(float(v) for v in row[1:1 + width] if v != "")
        coords = np.array([float(v) for v in row[1 + width:]])
        got = classify_orbit(full, GroupElement(gid, coords), lam)
        worst = max(worst, _descriptor_residual(OrbitDescriptor(full, fam, params), got))
        if full == "Gtilde" and fam == "O_rs":
            p, q, r, s = coords[:n], coords[n:2 * n], coords[2 * n], coords[2 * n + 1]
            worst = max(worst, abs(s + p @ q / eta(lam, r) - params[1]) / (1 + abs(params[1])))
    if header[0] != "family":
        raise ValueError("orbit CSV header must start with 'family'")
    return float(worst)
