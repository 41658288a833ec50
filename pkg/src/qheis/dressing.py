"""Dressing actions, the double-group factorization oracle and orbit
classification.

Orientation: for an actor gamma and a point g the dressing action is read
off the double group as follows (both checked symbolically against the
closed forms below).

    Ht_on_Gt:  rho_h(g)     = Gtilde-part of the GH split of (0; h^-1)(g; 0)
    Gt_on_Ht:  rho_gamma(h) = Htilde-part of the HG split of (gamma^-1; 0)(0; h)

H_on_G and G_on_H are the same constructions inside D.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import root

from .groups import GroupElement, GroupId, _cat, _dot, _s, _split, inverse, multiply
from .kernel import eta

ACTIONS = {
    # action: (actor group, point group)
    "Ht_on_Gt": ("Htilde", "Gtilde"),
    "Gt_on_Ht": ("Gtilde", "Htilde"),
    "H_on_G": ("H", "G"),
    "G_on_H": ("G", "H"),
}
SPACE_ACTION = {"Gtilde": "Ht_on_Gt", "Htilde": "Gt_on_Ht", "G": "H_on_G", "H": "G_on_H"}
ORBIT_TOL = 1e-12


def _check(action: str, actor: GroupElement, point: GroupElement):
    if action not in ACTIONS:
        raise ValueError(f"unknown action {action!r}")
    a, p = ACTIONS[action]
    if actor.group.name != a or point.group.name != p:
        raise ValueError(f"{action} needs actor {a} and point {p}, got {actor.group.name}, {point.group.name}")
    if actor.group.n != point.group.n:
        raise ValueError("dimension mismatch")


def dress(action: str, actor: GroupElement, point: GroupElement, lam: float | None = None) -> GroupElement:
    """Closed-form dressing action.

    ``lam`` defaults to the lam carried by whichever argument lives in G or
    Gtilde.
    """
    _check(action, actor, point)
    n = point.group.n
    if lam is None:
        lam = actor.group.lam if actor.group.name in ("G", "Gtilde") else point.group.lam
    a, g = actor.coords, point.coords
    if action in ("Ht_on_Gt", "H_on_G"):
        if action == "Ht_on_Gt":
            x, y, z, w = _split(a, n, "XYzw")
            p, q, r, s = _split(g, n, "PQrs")
        else:
            x, y, z = _split(a, n, "XYz")
            p, q, r = _split(g, n, "PQr")
            w = np.zeros_like(z)
        e = np.exp(-lam * r)
        et = eta(lam, r)
        ew = np.exp(w)
        P = _s(ew) * p - _s(e * ew * et) * y
        Q = q / _s(ew) + _s(e / ew * et) * x
        if action == "H_on_G":
            return GroupElement(point.group, _cat(P, Q, r + 0 * w))
        S = s - e * _dot(p, x) + e * _dot(q, y) + e * e * et * _dot(x, y)
        return GroupElement(point.group, _cat(P, Q, r + 0 * w, S))
    # G acting on H
    if action == "Gt_on_Ht":
        p, q, r, s = _split(a, n, "PQrs")
        x, y, z, w = _split(g, n, "XYzw")
    else:
        p, q, r = _split(a, n, "PQr")
        x, y, z = _split(g, n, "XYz")
    e = np.exp(-lam * r)
    et = eta(lam, r)
    Z = z + lam * e * _dot(p, x) + lam * e * _dot(q, y) - lam * e * e * et * _dot(x, y)
    X, Y = _s(e) * x, _s(e) * y
    if action == "G_on_H":
        return GroupElement(point.group, _cat(X, Y, Z))
    return GroupElement(point.group, _cat(X, Y, Z, w + 0 * r))


# ----------------------------------------------------------------------------
# factorization in the double group
# ----------------------------------------------------------------------------

def _gh_split(d: np.ndarray, n: int):
    return d[..., :2 * n + 2], d[..., 2 * n + 2:]


def _hg_closed(d: np.ndarray, n: int, lam: float):
    P, Q, R, S, X, Y, Z, W = _split(d, n, "PQrsXYzw")
    r, w = R, W
    er = np.exp(lam * r)
    emr = 1.0 / er
    ew = np.exp(w)
    et = eta(lam, r)
    etm = eta(lam, -r)
    x, y = _s(er) * X, _s(er) * Y
    p = _s(ew) * (P - _s(emr * et) * y)
    q = (Q + _s(emr * et) * x) / _s(ew)
    px, qy, xy = _dot(p, x), _dot(q, y), _dot(x, y)
    s = S - emr / ew * px + emr * ew * qy + etm * xy
    z = Z - lam * emr / ew * px - lam * emr * ew * qy - lam * etm * xy
    return _cat(x, y, z, w), _cat(p, q, r, s)


def _hg_product(h: np.ndarray, g: np.ndarray, n: int, lam: float) -> np.ndarray:
    gid = GroupId("Dtilde", n, lam)
    zh, zg = np.zeros_like(h), np.zeros_like(g)
    return multiply(GroupElement(gid, np.concatenate([zg, h], -1)),
                    GroupElement(gid, np.concatenate([g, zh], -1))).coords


def _hg_refine(d: np.ndarray, h0: np.ndarray, g0: np.ndarray, n: int, lam: float, tol: float = 1e-12):
    """Damped nonlinear solve of (0; h)(g; 0) = d for one element."""
    m = h0.shape[-1]

    def fun(v):
        return _hg_product(v[:m], v[m:], n, lam) - d

    sol = root(fun, np.concatenate([h0, g0]), method="hybr", tol=tol)
    if not sol.success or np.max(np.abs(fun(sol.x))) > 1e-9 * (1 + np.max(np.abs(d))):
        raise RuntimeError(f"HG factorization did not converge: {sol.message}")
    return sol.x[:m], sol.x[m:]


def factor(d: GroupElement, order: str = "GH"):
    """Split an element of Dtilde (or D) into its two factors.

    GH: d = (g; 0)(0; h), a plain coordinate split.
    HG: d = (0; h)(g; 0), solved in closed form; elements whose round trip
    misses by more than 1e-9 go through a nonlinear solve.
    """
    gid = d.group
    if gid.name not in ("D", "Dtilde"):
        raise ValueError("factor expects an element of D or Dtilde")
    n, lam = gid.n, gid.lam
    c = d.coords
    if gid.name == "D":
        p, q, r, x, y, z = _split(c, n, "PQrXYz")
        c = _cat(p, q, r, np.zeros_like(r), x, y, z, np.zeros_like(r))
    if order == "GH":
        g, h = _gh_split(c, n)
    elif order == "HG":
        h, g = _hg_closed(c, n, lam)
        err = np.max(np.abs(_hg_product(h, g, n, lam) - c), axis=-1)
        bad = np.atleast_1d(~(err <= 1e-9 * (1 + np.max(np.abs(c), axis=-1))))
        if np.any(bad):
            h2 = np.atleast_2d(h).copy()
            g2 = np.atleast_2d(g).copy()
            c2 = np.atleast_2d(c)
            for i in np.flatnonzero(bad):
                h0 = np.nan_to_num(h2[i])
                g0 = np.nan_to_num(g2[i])
                h2[i], g2[i] = _hg_refine(c2[i], h0, g0, n, lam)
            h, g = h2.reshape(h.shape), g2.reshape(g.shape)
    else:
        raise ValueError("order must be 'GH' or 'HG'")
    if gid.name == "D":
        return (GroupElement(GroupId("G", n, lam), np.delete(g, 2 * n + 1, axis=-1)),
                GroupElement(GroupId("H", n), h[..., :-1])) if order == "GH" else \
               (GroupElement(GroupId("H", n), h[..., :-1]),
                GroupElement(GroupId("G", n, lam), np.delete(g, 2 * n + 1, axis=-1)))
    G = GroupElement(GroupId("Gtilde", n, lam), g)
    H = GroupElement(GroupId("Htilde", n), h)
    return (G, H) if order == "GH" else (H, G)


def _lift_G(g: GroupElement, lam: float) -> np.ndarray:
    c = g.coords
    return c if g.group.name == "Gtilde" else np.concatenate([c, np.zeros(c.shape[:-1] + (1,))], -1)


def _lift_H(h: GroupElement) -> np.ndarray:
    c = h.coords
    return c if h.group.name == "Htilde" else np.concatenate([c, np.zeros(c.shape[:-1] + (1,))], -1)


def dress_via_double(action: str, actor: GroupElement, point: GroupElement,
                     lam: float | None = None) -> GroupElement:
    """Dressing action computed from factorizations in the double group."""
    _check(action, actor, point)
    n = point.group.n
    if lam is None:
        lam = actor.group.lam if actor.group.name in ("G", "Gtilde") else point.group.lam
    Dt = GroupId("Dtilde", n, lam)
    if action in ("Ht_on_Gt", "H_on_G"):
        hinv = _lift_H(inverse(actor))
        g = _lift_G(point, lam)
        hinv, g = np.broadcast_arrays(hinv, g) if hinv.shape[:-1] != g.shape[:-1] else (hinv, g)
        d = multiply(GroupElement(Dt, np.concatenate([np.zeros(hinv.shape[:-1] + (2 * n + 2,)), hinv], -1)),
                     GroupElement(Dt, np.concatenate([g, np.zeros(g.shape[:-1] + (2 * n + 2,))], -1)))
        gpart, _ = factor(d, "GH")
        out = gpart.coords
        if action == "H_on_G":
            out = out[..., :-1]
        return GroupElement(point.group, out)
    ginv = _lift_G(inverse(actor), lam)
    h = _lift_H(point)
    lead = np.broadcast_shapes(ginv.shape[:-1], h.shape[:-1])
    ginv = np.broadcast_to(ginv, lead + ginv.shape[-1:])
    h = np.broadcast_to(h, lead + h.shape[-1:])
    d = multiply(GroupElement(Dt, np.concatenate([ginv, np.zeros(lead + (2 * n + 2,))], -1)),
                 GroupElement(Dt, np.concatenate([np.zeros(lead + (2 * n + 2,)), h], -1)))
    hpart, _ = factor(d, "HG")
    out = hpart.coords
    if action == "G_on_H":
        out = out[..., :-1]
    return GroupElement(point.group, out)


# ----------------------------------------------------------------------------
# orbits
# ----------------------------------------------------------------------------

FAMILIES = {
    "Gtilde": ("O_s", "O_pq", "O_rs"),
    "G": ("O_pq", "O_r"),
    "Htilde": ("O_zw", "O_xyw"),
    "H": ("O_z", "O_xy"),
}


@dataclass(frozen=True)
class OrbitDescriptor:
    space: str
    family: str
    params: tuple

    def matches(self, other: "OrbitDescriptor", tol: float = 1e-8) -> bool:
        if (self.space, self.family) != (other.space, other.family):
            return False
        a, b = np.asarray(self.params), np.asarray(other.params)
        return a.shape == b.shape and bool(np.all(np.abs(a - b) <= tol * (1 + np.abs(a))))


def _unit(v):
    return v / np.linalg.norm(v)


def classify_orbit(space: str, point: GroupElement, lam: float | None = None,
                   tol: float = ORBIT_TOL) -> OrbitDescriptor:
    """Orbit family and invariant parameters of a single point.

    Invariants used:
      Gtilde, r != 0:   (r, s + p.q / eta(r))
      Gtilde, r == 0:   (p, q) rescaled to |p| = |q| = sqrt(|p||q|) by the
                        hyperbolic flow; a unit vector when one side vanishes
      G, r != 0:        r;  r == 0: the point (p, q)
      Htilde / H:       direction of (x, y) and w;  at (x, y) = 0: (z, w)
    """
    if space not in FAMILIES or point.group.name != space:
        raise ValueError(f"cannot classify a {point.group.name} point as {space}")
    n = point.group.n
    c = np.asarray(point.coords, dtype=float)
    if c.ndim != 1:
        raise ValueError("classify_orbit takes a single point")
    if lam is None:
        lam = point.group.lam
    if space in ("Gtilde", "G"):
        p, q, r = c[:n], c[n:2 * n], c[2 * n]
        if abs(r) > tol:
            if space == "G":
                return OrbitDescriptor(space, "O_r", (float(r),))
            s = c[2 * n + 1]
            return OrbitDescriptor(space, "O_rs", (float(r), float(s + p @ q / eta(lam, r))))
        if space == "G":
            return OrbitDescriptor(space, "O_pq", tuple(map(float, np.concatenate([p, q]))))
        npn, nqn = np.linalg.norm(p), np.linalg.norm(q)
        if npn <= tol and nqn <= tol:
            return OrbitDescriptor(space, "O_s", (float(c[2 * n + 1]),))
        if npn > tol and nqn > tol:
            m = np.sqrt(npn * nqn)
            rep = np.concatenate([_unit(p) * m, _unit(q) * m])
        elif npn > tol:
            rep = np.concatenate([_unit(p), np.zeros(n)])
        else:
            rep = np.concatenate([np.zeros(n), _unit(q)])
        return OrbitDescriptor(space, "O_pq", tuple(map(float, rep)))
    x, y = c[:n], c[n:2 * n]
    xy = np.concatenate([x, y])
    wpart = (float(c[2 * n + 1]),) if space == "Htilde" else ()
    if np.linalg.norm(xy) <= tol:
        return OrbitDescriptor(space, "O_zw" if space == "Htilde" else "O_z", (float(c[2 * n]),) + wpart)
    return OrbitDescriptor(space, "O_xyw" if space == "Htilde" else "O_xy",
                           tuple(map(float, _unit(xy))) + wpart)


def orbit_seed(space: str, family: str, n: int, lam: float, rng: np.random.Generator) -> GroupElement:
    """Random point of the requested family."""
    gid = GroupId(space, n, lam)
    c = rng.standard_normal(gid.dim)
    if space in ("Gtilde", "G"):
        if family in ("O_s", "O_pq"):
            c[2 * n] = 0.0
        if family == "O_s":
            c[:2 * n] = 0.0
        if family in ("O_rs", "O_r") and abs(c[2 * n]) < 0.1:
            c[2 * n] = 0.1 + abs(c[2 * n])
    else:
        if family in ("O_zw", "O_z"):
            c[:2 * n] = 0.0
    if family not in FAMILIES[space]:
        raise ValueError(f"{family} is not an orbit family of {space}")
    return GroupElement(gid, c)


def random_actor(space: str, n: int, lam: float, rng: np.random.Generator,
                 size=None, scale: float = 0.7) -> GroupElement:
    action = SPACE_ACTION[space]
    return GroupId(ACTIONS[action][0], n, lam).random(rng, size, scale)


def tangent_rank(space: str, point: GroupElement, lam: float | None = None,
                 step: float = 1e-6, rtol: float = 1e-5) -> int:
    """Numerical dimension of the orbit through a point (rank of the
    differential of the dressing map at the identity actor)."""
    action = SPACE_ACTION[space]
    n = point.group.n
    if lam is None and space in ("G", "Gtilde"):
        lam = point.group.lam
    agid = GroupId(ACTIONS[action][0], n, lam)
    eye = np.eye(agid.dim)
    base = dress(action, agid.identity(), point, lam).coords
    cols = []
    for e in eye:
        plus = dress(action, GroupElement(agid, step * e), point, lam).coords
        minus = dress(action, GroupElement(agid, -step * e), point, lam).coords
        cols.append((plus - minus) / (2 * step))
    J = np.array(cols).T
    sv = np.linalg.svd(J, compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(base))))
    return int(np.sum(sv > rtol * scale))
