"""The eight concrete groups and the double Lie algebra bracket.

Coordinates (each x, y, p, q is an n-vector; all other entries are scalars):

    H       (x, y, z)                      Htilde  (x, y, z, w)
    G       (p, q, r)                      Gtilde  (p, q, r, s)
    D       (p, q, r; x, y, z)             Dtilde  (p, q, r, s; x, y, z, w)
    E       (x, y; t)                      Etilde  (x, y, w; t)

The circle coordinate of E and Etilde is stored as an angle t in [0, 1)
with theta = exp(2 pi i t), so the central factor multiplies exactly.

Laws, with e = exp and eta = eta_lam:

    H:      (x+x', y+y', z+z'+x.y')
    Htilde: (x+e^w x', y+e^-w y', z+z'+e^-w x.y', w+w')
    G:      (e^{lam r'} p+p', e^{lam r'} q+q', r+r')         (Gtilde adds s+s')
    E:      (x+x', y+y'; t+t'-eta(r) x.y')
    Etilde: (x+e^w x', y+e^-w y', w+w'; t+t'-e^-w eta(r) x.y')

D is the (p,q,r;x,y,z) part of the Dtilde law at s = w = 0; the s-output
never feeds back into the other coordinates so this is a quotient group.

The subalgebra brackets recovered from the laws (second-order cross terms,
antisymmetrized):

    gtilde: [(p,q,r,s), (p',q',r',s')] = (lam(r'p - rp'), lam(r'q - rq'), 0, 0)
    htilde: [(x,y,z,w), (x',y',z',w')] = (wx' - w'x, w'y - wy', x.y' - x'.y, 0)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import eta

NAMES = ("H", "Htilde", "G", "Gtilde", "D", "Dtilde", "E", "Etilde")
_USES_LAM = {"G", "Gtilde", "D", "Dtilde", "E", "Etilde"}
_USES_R = {"E", "Etilde"}


@dataclass(frozen=True)
class GroupId:
    name: str
    n: int = 1
    lam: float = 1.0
    r: float = 0.0

    def __post_init__(self):
        if self.name not in NAMES:
            raise ValueError(f"unknown group {self.name!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        # parameters the law does not read are normalized away
        if self.name not in _USES_LAM:
            object.__setattr__(self, "lam", 0.0)
        if self.name not in _USES_R:
            object.__setattr__(self, "r", 0.0)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "r", float(self.r))

    @property
    def dim(self) -> int:
        n = self.n
        return {"H": 2 * n + 1, "Htilde": 2 * n + 2, "G": 2 * n + 1, "Gtilde": 2 * n + 2,
                "D": 4 * n + 2, "Dtilde": 4 * n + 4, "E": 2 * n + 1, "Etilde": 2 * n + 2}[self.name]

    @property
    def circle(self) -> bool:
        return self.name in ("E", "Etilde")

    def identity(self) -> "GroupElement":
        return GroupElement(self, np.zeros(self.dim))

    def random(self, rng: np.random.Generator, size=None, scale: float = 1.0) -> "GroupElement":
        shape = (self.dim,) if size is None else (size, self.dim)
        c = scale * rng.standard_normal(shape)
        if self.circle:
            c[..., -1] = rng.uniform(0.0, 1.0, shape[:-1])
        return GroupElement(self, c)


@dataclass(frozen=True)
class GroupElement:
    group: GroupId
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.shape[-1:] != (self.group.dim,):
            raise ValueError(f"{self.group.name} expects {self.group.dim} coordinates, got {c.shape[-1:]}")
        if self.group.circle:
            c[..., -1] = np.mod(c[..., -1], 1.0)
        object.__setattr__(self, "coords", c)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def __getitem__(self, i) -> "GroupElement":
        return GroupElement(self.group, self.coords[i])


# ----------------------------------------------------------------------------
# coordinate helpers
# ----------------------------------------------------------------------------

def _split(c: np.ndarray, n: int, layout: str):
    """Split the trailing axis according to a layout string; capital letters
    are n-vectors, lowercase letters scalars."""
    out, i = [], 0
    for ch in layout:
        if ch.isupper():
            out.append(c[..., i:i + n])
            i += n
        else:
            out.append(c[..., i])
            i += 1
    return out


def _cat(*parts) -> np.ndarray:
    """Concatenate n-vectors and scalars along the last axis.

    Vector parts carry one more axis than scalar parts; leading shapes broadcast.
    """
    arrs = [np.asarray(p, dtype=float) for p in parts]
    k = max(a.ndim for a in arrs) - 1
    lead = np.broadcast_shapes(*[a.shape[:-1] if a.ndim == k + 1 else a.shape for a in arrs])
    fixed = [np.broadcast_to(a, lead + a.shape[-1:]) if a.ndim == k + 1
             else np.broadcast_to(a, lead)[..., None] for a in arrs]
    return np.concatenate(fixed, axis=-1)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _s(v):
    """Scalar broadcast against n-vectors."""
    return np.asarray(v)[..., None]


# ----------------------------------------------------------------------------
# laws
# ----------------------------------------------------------------------------

def _mul_H(a, b, n):
    x, y, z = _split(a, n, "XYz")
    x2, y2, z2 = _split(b, n, "XYz")
    return _cat(x + x2, y + y2, z + z2 + _dot(x, y2))


def _mul_Ht(a, b, n):
    x, y, z, w = _split(a, n, "XYzw")
    x2, y2, z2, w2 = _split(b, n, "XYzw")
    ew = np.exp(w)
    return _cat(x + _s(ew) * x2, y + y2 / _s(ew), z + z2 + _dot(x, y2) / ew, w + w2)


def _mul_Gt(a, b, n, lam):
    p, q, r, s = _split(a, n, "PQrs")
    p2, q2, r2, s2 = _split(b, n, "PQrs")
    e = _s(np.exp(lam * r2))
    return _cat(e * p + p2, e * q + q2, r + r2, s + s2)


def _mul_Dt(a, b, n, lam):
    p, q, r, s, x, y, z, w = _split(a, n, "PQrsXYzw")
    P, Q, R, S, X, Y, Z, W = _split(b, n, "PQrsXYzw")
    eR = np.exp(lam * R)
    emR = np.exp(-lam * R)
    ew = np.exp(w)
    etR = eta(lam, R)
    etmR = eta(lam, -R)
    px, qy, xy, xY = _dot(P, x), _dot(Q, y), _dot(x, y), _dot(x, Y)
    return _cat(
        _s(eR) * p + P / _s(ew) + _s(emR * etR) * y,
        _s(eR) * q + _s(ew) * Q - _s(emR * etR) * x,
        r + R,
        s + S + emR / ew * px - emR * ew * qy - etmR * xy,
        _s(emR) * x + _s(ew) * X,
        _s(emR) * y + Y / _s(ew),
        z + Z + emR / ew * xY + lam * emR / ew * px + lam * emR * ew * qy + lam * etmR * xy,
        w + W,
    )


def _D_to_Dt(c, n):
    p, q, r, x, y, z = _split(c, n, "PQrXYz")
    zero = np.zeros_like(r)
    return _cat(p, q, r, zero, x, y, z, zero)


def _Dt_to_D(c, n):
    p, q, r, s, x, y, z, w = _split(c, n, "PQrsXYzw")
    return _cat(p, q, r, x, y, z)


def _mul_E(a, b, n, lam, r):
    x, y, t = _split(a, n, "XYt")
    x2, y2, t2 = _split(b, n, "XYt")
    return _cat(x + x2, y + y2, np.mod(t + t2 - eta(lam, r) * _dot(x, y2), 1.0))


def _mul_Et(a, b, n, lam, r):
    x, y, w, t = _split(a, n, "XYwt")
    x2, y2, w2, t2 = _split(b, n, "XYwt")
    ew = np.exp(w)
    return _cat(x + _s(ew) * x2, y + y2 / _s(ew), w + w2,
                np.mod(t + t2 - eta(lam, r) * _dot(x, y2) / ew, 1.0))


def _raw_multiply(gid: GroupId, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, lam = gid.n, gid.lam
    name = gid.name
    if name == "H":
        return _mul_H(a, b, n)
    if name == "Htilde":
        return _mul_Ht(a, b, n)
    if name == "G":
        ga = np.concatenate([a, np.zeros(a.shape[:-1] + (1,))], axis=-1)
        gb = np.concatenate([b, np.zeros(b.shape[:-1] + (1,))], axis=-1)
        return _mul_Gt(ga, gb, n, lam)[..., :-1]
    if name == "Gtilde":
        return _mul_Gt(a, b, n, lam)
    if name == "Dtilde":
        return _mul_Dt(a, b, n, lam)
    if name == "D":
        return _Dt_to_D(_mul_Dt(_D_to_Dt(a, n), _D_to_Dt(b, n), n, lam), n)
    if name == "E":
        return _mul_E(a, b, n, lam, gid.r)
    return _mul_Et(a, b, n, lam, gid.r)


def _check_same(a: GroupElement, b: GroupElement):
    if a.group != b.group:
        raise ValueError(f"cannot multiply {a.group} by {b.group}")


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    _check_same(a, b)
    return GroupElement(a.group, _raw_multiply(a.group, a.coords, b.coords))


def _raw_inverse(gid: GroupId, a: np.ndarray) -> np.ndarray:
    n, lam = gid.n, gid.lam
    name = gid.name
    if name == "H":
        x, y, z = _split(a, n, "XYz")
        return _cat(-x, -y, -z + _dot(x, y))
    if name == "Htilde":
        x, y, z, w = _split(a, n, "XYzw")
        ew = _s(np.exp(w))
        return _cat(-x / ew, -ew * y, _dot(x, y) - z, -w)
    if name in ("G", "Gtilde"):
        p, q, r = _split(a, n, "PQr")
        e = _s(np.exp(-lam * r))
        head = _cat(-e * p, -e * q, -r)
        return head if name == "G" else np.concatenate([head, -a[..., -1:]], axis=-1)
    if name in ("D", "Dtilde"):
        full = a if name == "Dtilde" else _D_to_Dt(a, n)
        g, h = full[..., :2 * n + 2], full[..., 2 * n + 2:]
        gi = _raw_inverse(GroupId("Gtilde", n, lam), g)
        hi = _raw_inverse(GroupId("Htilde", n), h)
        zg = np.zeros_like(g)
        zh = np.zeros_like(h)
        out = _mul_Dt(np.concatenate([zg, hi], -1), np.concatenate([gi, zh], -1), n, lam)
        return out if name == "Dtilde" else _Dt_to_D(out, n)
    if name == "E":
        x, y, t = _split(a, n, "XYt")
        return _cat(-x, -y, np.mod(-t - eta(lam, gid.r) * _dot(x, y), 1.0))
    x, y, w, t = _split(a, n, "XYwt")
    ew = _s(np.exp(w))
    return _cat(-x / ew, -ew * y, -w, np.mod(-t - eta(lam, gid.r) * _dot(x, y), 1.0))


def inverse(a: GroupElement) -> GroupElement:
    return GroupElement(a.group, _raw_inverse(a.group, a.coords))


def coord_distance(a: GroupElement, b: GroupElement) -> np.ndarray:
    """Componentwise max distance; circle coordinates compared mod 1."""
    d = np.abs(a.coords - b.coords)
    if a.group.circle:
        d[..., -1] = np.minimum(d[..., -1], 1.0 - d[..., -1])
    return np.max(d, axis=-1)


# ----------------------------------------------------------------------------
# embeddings of the factors into Dtilde
# ----------------------------------------------------------------------------

def embed_G(g: GroupElement) -> GroupElement:
    n, lam = g.group.n, g.group.lam
    c = g.coords
    if g.group.name == "G":
        c = np.concatenate([c, np.zeros(c.shape[:-1] + (1,))], axis=-1)
    z = np.zeros(c.shape[:-1] + (2 * n + 2,))
    return GroupElement(GroupId("Dtilde", n, lam), np.concatenate([c, z], axis=-1))


def embed_H(h: GroupElement, lam: float) -> GroupElement:
    n = h.group.n
    c = h.coords
    if h.group.name == "H":
        c = np.concatenate([c, np.zeros(c.shape[:-1] + (1,))], axis=-1)
    z = np.zeros(c.shape[:-1] + (2 * n + 2,))
    return GroupElement(GroupId("Dtilde", n, lam), np.concatenate([z, c], axis=-1))


# ----------------------------------------------------------------------------
# double Lie algebra
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class DoubleLieVector:
    """(p, q, r, s; x, y, z, w) stacked along the last axis (4n+4 entries)."""

    n: int
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape[-1] != 4 * self.n + 4:
            raise ValueError("DoubleLieVector needs 4n+4 components")
        object.__setattr__(self, "coords", c)

    def parts(self):
        return _split(self.coords, self.n, "PQrsXYzw")


def bracket(v: DoubleLieVector, u: DoubleLieVector, lam: float = 1.0) -> DoubleLieVector:
    """Bracket on gtilde (+) htilde defining the double."""
    if v.n != u.n:
        raise ValueError("dimension mismatch")
    p, q, r, s, x, y, z, w = v.parts()
    P, Q, R, S, X, Y, Z, W = u.parts()
    sr, sR, sw, sW = _s(r), _s(R), _s(w), _s(W)
    out = _cat(
        lam * (sR * p - sr * P) + (sW * p - sw * P) + (sR * y - sr * Y),
        lam * (sR * q - sr * Q) + (sw * Q - sW * q) + (sr * X - sR * x),
        np.zeros_like(r),
        (_dot(P, x) - _dot(p, X)) + (_dot(q, Y) - _dot(Q, y)),
        (sw * X - sW * x) + lam * (sr * X - sR * x),
        (sW * y - sw * Y) + lam * (sr * Y - sR * y),
        _dot(x, Y) - _dot(X, y) + lam * (_dot(P, x) - _dot(p, X)) + lam * (_dot(Q, y) - _dot(q, Y)),
        np.zeros_like(r),
    )
    return DoubleLieVector(v.n, out)


def bracket_gtilde(a: np.ndarray, b: np.ndarray, n: int, lam: float) -> np.ndarray:
    p, q, r, s = _split(a, n, "PQrs")
    P, Q, R, S = _split(b, n, "PQrs")
    return _cat(lam * (_s(R) * p - _s(r) * P), lam * (_s(R) * q - _s(r) * Q),
                np.zeros_like(r), np.zeros_like(r))


def bracket_htilde(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    x, y, z, w = _split(a, n, "XYzw")
    X, Y, Z, W = _split(b, n, "XYzw")
    return _cat(_s(w) * X - _s(W) * x, _s(W) * y - _s(w) * Y, _dot(x, Y) - _dot(X, y), np.zeros_like(w))


def bracket_from_law(gid: GroupId, a: np.ndarray, b: np.ndarray, eps: float = 1e-3) -> np.ndarray:
    """Lie bracket B(a,b) - B(b,a) read off the second-order cross term of
    the group law by symmetric finite differences (error O(eps^2))."""
    def cross(u, v, e):
        z = np.zeros_like(u)
        return (_raw_multiply(gid, e * u, e * v) - _raw_multiply(gid, e * u, z)
                - _raw_multiply(gid, z, e * v))

    def B(u, v):
        return (cross(u, v, eps) + cross(u, v, -eps)) / (2 * eps ** 2)

    return B(a, b) - B(b, a)
