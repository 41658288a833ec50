import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qheis.groups import (NAMES, DoubleLieVector, GroupElement, GroupId, bracket, bracket_from_law,
                          bracket_gtilde, bracket_htilde, coord_distance, embed_G, embed_H, inverse, multiply)

group_ids = st.builds(GroupId, st.sampled_from(NAMES), st.sampled_from([1, 2]),
                      st.floats(-1.5, 1.5), st.floats(-1.0, 1.0))
seeds = st.integers(0, 2 ** 32 - 1)


def el(gid, *c):
    return GroupElement(gid, np.array(c, dtype=float))


def test_H_examples():
    H = GroupId("H")
    a = el(H, 1, 2, 3)
    np.testing.assert_array_equal(multiply(el(H, 0, 0, 0), a).coords, [1, 2, 3])
    np.testing.assert_array_equal(multiply(a, el(H, 4, 5, 6)).coords, [5, 7, 14])
    np.testing.assert_array_equal(inverse(a).coords, [-1, -2, -1])
    np.testing.assert_array_equal(multiply(a, inverse(a)).coords, [0, 0, 0])


def test_G_examples():
    G0 = GroupId("G", 1, 0.0)
    np.testing.assert_allclose(multiply(el(G0, 1, 2, 3), el(G0, 4, 5, 6)).coords, [5, 7, 9])
    G = GroupId("G", 1, 0.7)
    p, q, r = 0.3, -1.1, 0.9
    np.testing.assert_allclose(inverse(el(G, p, q, r)).coords,
                               [-np.exp(-0.7 * r) * p, -np.exp(-0.7 * r) * q, -r], rtol=1e-15)
    # e^{lam r'} scales the left factor
    np.testing.assert_allclose(multiply(el(G, 1, 1, 0), el(G, 0, 0, 2)).coords,
                               [np.exp(1.4), np.exp(1.4), 2])


def test_Etilde_circle_coordinate():
    E = GroupId("Etilde", 1, 1.0, 0.5)
    g = el(E, 0, 0, 0, 1.25)
    assert g.coords[-1] == 0.25
    a, b = el(E, 0, 0, 0, 0.9), el(E, 0, 0, 0, 0.2)
    assert coord_distance(multiply(a, b), el(E, 0, 0, 0, 0.1)) < 1e-15


def test_groupid_normalizes_unused_parameters():
    assert GroupId("H", 1, 3.0, 2.0) == GroupId("H", 1, 0.0, 0.0)
    with pytest.raises(ValueError):
        GroupId("K")
    with pytest.raises(ValueError):
        GroupElement(GroupId("H"), np.zeros(4))
    with pytest.raises(ValueError):
        multiply(GroupId("H").identity(), GroupId("G").identity())


@given(group_ids, seeds)
def test_associativity(gid, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (gid.random(rng) for _ in range(3))
    lhs = multiply(multiply(a, b), c)
    rhs = multiply(a, multiply(b, c))
    scale = 1 + np.max(np.abs(lhs.coords))
    assert coord_distance(lhs, rhs) <= 1e-11 * scale


@given(group_ids, seeds)
def test_identity_and_inverse(gid, seed):
    rng = np.random.default_rng(seed)
    a = gid.random(rng)
    e = gid.identity()
    assert coord_distance(multiply(a, e), a) == 0
    assert coord_distance(multiply(e, a), a) == 0
    scale = 1 + np.max(np.abs(a.coords))
    assert coord_distance(multiply(a, inverse(a)), e) <= 1e-12 * scale
    assert coord_distance(multiply(inverse(a), a), e) <= 1e-12 * scale


def test_batched_multiply_matches_loop(rng):
    gid = GroupId("Dtilde", 2, 0.8)
    A, B = gid.random(rng, size=7), gid.random(rng, size=7)
    out = multiply(A, B)
    for i in range(7):
        np.testing.assert_allclose(out.coords[i], multiply(A[i], B[i]).coords)


def test_D_is_quotient_of_Dtilde(rng):
    n, lam = 1, 0.6
    D, Dt = GroupId("D", n, lam), GroupId("Dtilde", n, lam)
    a, b = D.random(rng), D.random(rng)
    lift = lambda g: np.concatenate([g.coords[:3], [0.0], g.coords[3:], [0.0]])
    prod = multiply(GroupElement(Dt, lift(a)), GroupElement(Dt, lift(b))).coords
    np.testing.assert_allclose(np.delete(prod, [3, 7]), multiply(a, b).coords, atol=1e-13)


def test_embeddings_are_homomorphisms(rng):
    lam = 0.9
    G, H = GroupId("Gtilde", 1, lam), GroupId("Htilde", 1)
    g1, g2 = G.random(rng), G.random(rng)
    h1, h2 = H.random(rng), H.random(rng)
    np.testing.assert_allclose(multiply(embed_G(g1), embed_G(g2)).coords, embed_G(multiply(g1, g2)).coords)
    np.testing.assert_allclose(multiply(embed_H(h1, lam), embed_H(h2, lam)).coords,
                               embed_H(multiply(h1, h2), lam).coords, atol=1e-13)


# ----------------------------------------------------------------------------
# double Lie algebra
# ----------------------------------------------------------------------------

def test_bracket_tabulated_example():
    lam = 1.7
    v = DoubleLieVector(1, [1, 0, 0, 0, 0, 0, 0, 0])
    u = DoubleLieVector(1, [0, 0, 0, 0, 1, 0, 0, 0])
    np.testing.assert_allclose(bracket(v, u, lam).coords, [0, 0, 0, -1, 0, 0, -lam, 0])


vec = st.lists(st.floats(-3, 3), min_size=8, max_size=8)


@given(vec, vec, st.floats(-2, 2))
def test_bracket_antisymmetric(a, b, lam):
    v, u = DoubleLieVector(1, a), DoubleLieVector(1, b)
    np.testing.assert_allclose(bracket(v, u, lam).coords, -bracket(u, v, lam).coords, atol=1e-12)
    assert np.all(bracket(v, v, lam).coords == 0)


@given(vec, vec, vec, st.floats(-2, 2))
def test_jacobi(a, b, c, lam):
    x, y, z = (DoubleLieVector(1, t) for t in (a, b, c))
    J = (bracket(x, bracket(y, z, lam), lam).coords + bracket(y, bracket(z, x, lam), lam).coords
         + bracket(z, bracket(x, y, lam), lam).coords)
    assert np.max(np.abs(J)) <= 1e-11 * (1 + 27 * 27)


@given(vec, vec, st.floats(-2, 2))
def test_subalgebra_restrictions(a, b, lam):
    a, b = np.array(a), np.array(b)
    ga, gb = a.copy(), b.copy()
    ga[4:] = gb[4:] = 0
    out = bracket(DoubleLieVector(1, ga), DoubleLieVector(1, gb), lam).coords
    np.testing.assert_allclose(out[:4], bracket_gtilde(ga[:4], gb[:4], 1, lam), atol=1e-12)
    assert np.all(out[4:] == 0)
    ha, hb = a.copy(), b.copy()
    ha[:4] = hb[:4] = 0
    out = bracket(DoubleLieVector(1, ha), DoubleLieVector(1, hb), lam).coords
    np.testing.assert_allclose(out[4:], bracket_htilde(ha[4:], hb[4:], 1), atol=1e-12)
    assert np.all(out[:4] == 0)
    x, y, z, w = ha[4:]
    X, Y, Z, W = hb[4:]
    np.testing.assert_allclose(out[4:], [w * X - W * x, W * y - w * Y, x * Y - X * y, 0], atol=1e-12)


def test_brackets_match_group_laws(rng):
    lam = 0.8
    for name, br in (("Gtilde", lambda a, b: bracket_gtilde(a, b, 1, lam)),
                     ("Htilde", lambda a, b: bracket_htilde(a, b, 1))):
        gid = GroupId(name, 1, lam)
        for _ in range(5):
            a, b = rng.standard_normal(4), rng.standard_normal(4)
            np.testing.assert_allclose(bracket_from_law(gid, a, b), br(a, b), atol=1e-5)
