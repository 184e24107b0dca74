import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anticode.codes import BallSpec, Code, Shape, ball, dictator, is_s_avoiding
from anticode.configurations import (BudgetExceeded, Configuration, Realisation, centre,
                                     cross_matching, crosscut, density, dumps, find_cross,
                                     find_realisation, flatten, is_flat, is_H_free, kernel, loads,
                                     matching, oplus, pair_config, projection, shadow, shadow_set,
                                     shadow_lower_check, shadow_uncap_transfer, shearer_check,
                                     verify_realisation)


def mod_sum(m, n):
    return Code.from_predicate(Shape(m, n), lambda P: P.sum(axis=1) % m == 0)


def brute_contains(families, H):
    """Try every tuple of points and every injection of parts."""
    n = families[0].n
    pools = [[tuple(int(a) for a in p) for p in F.points()] for F in families]
    for pts in itertools.product(*pools):
        if len(set(pts)) < len(pts):
            continue
        for phi in itertools.permutations(range(n), H.ell):
            if verify_realisation(families, H, Realisation(phi, pts)):
                return True
    return False


@st.composite
def configs(draw, max_parts=2, max_edges=3):
    ell = draw(st.integers(0, max_parts))
    parts = tuple(draw(st.integers(1, 3)) for _ in range(ell))
    h = draw(st.integers(1, max_edges))
    edges = tuple(tuple(draw(st.integers(0, s - 1)) for s in parts) for _ in range(h))
    return Configuration(parts, edges)


@st.composite
def codes(draw, shapes=((3, 2), (2, 3))):
    m, n = draw(st.sampled_from(shapes))
    s = Shape(m, n)
    rng = np.random.default_rng(draw(st.integers(0, 2 ** 32 - 1)))
    return Code(s, rng.random(s.size) < draw(st.sampled_from([0.2, 0.5])))


# structure


def test_structure_examples():
    H = pair_config(3)
    assert kernel(H) == centre(H) == {(0, 0), (1, 0), (2, 0)} and is_flat(H)
    D = Configuration((2,), ((0,), (1,)))
    assert kernel(D) == set() == centre(D) and is_flat(D)
    N = Configuration((2,), ((0,), (0,), (1,), (1,)))
    assert not is_flat(N)
    assert len(kernel(oplus(D, 1))) == 1
    assert density(matching(3)) == 1


def test_flatten_is_flat():
    H = Configuration((2, 2), ((0, 0), (0, 1), (1, 1)))
    F = flatten(H)
    assert is_flat(F) and F.h == H.h


@settings(max_examples=50)
@given(configs())
def test_flatten_properties(H):
    F = flatten(H)
    assert is_flat(F)
    # edge j and j2 share a vertex of F exactly where they did in H
    for j, j2 in itertools.combinations(range(H.h), 2):
        a = sum(x == y for x, y in zip(H.edges[j], H.edges[j2]))
        b = sum(x == y for x, y in zip(F.edges[j], F.edges[j2]))
        assert b == a


def test_invalid_edges():
    with pytest.raises(ValueError):
        Configuration((2,), ((2,),))
    with pytest.raises(ValueError):
        Configuration((2, 2), ((0,),))


# realisations


def test_find_examples():
    R = find_realisation(Code.full(Shape(3, 2)), pair_config(0))
    assert R is not None and all(a != b for a, b in zip(*R.points))
    assert find_realisation(ball(Shape(3, 3), BallSpec(1, 0)), pair_config(0)) is None
    s = Shape(3, 2)
    R = find_cross([dictator(s, 0, 0), dictator(s, 0, 1)], matching(2))
    assert R is not None and verify_realisation([dictator(s, 0, 0), dictator(s, 0, 1)], matching(2), R)


def test_free_examples():
    assert is_H_free(ball(Shape(3, 4), BallSpec(2, 0)), pair_config(1))
    assert not is_H_free(Code.full(Shape(3, 2)), pair_config(0))
    assert is_H_free(Code.empty(Shape(3, 3)), matching(2))


def test_budget_raises():
    with pytest.raises(BudgetExceeded):
        find_realisation(ball(Shape(3, 4), BallSpec(1, 0)), pair_config(0), budget=3)


@settings(max_examples=80, deadline=None)
@given(codes(), configs())
def test_find_matches_brute_force(F, H):
    R = find_realisation(F, H)
    if R is not None:
        assert verify_realisation([F] * H.h, H, R)
    assert (R is not None) == brute_contains([F] * H.h, H)


@settings(max_examples=60, deadline=None)
@given(codes(), st.integers(0, 2))
def test_avoiding_iff_pair_free(F, s):
    if s > F.n:
        return
    assert is_s_avoiding(F, s) == is_H_free(F, pair_config(s))


# shadows


def test_shadow_examples():
    F = Code.from_points(Shape(3, 2), [(0, 0), (1, 0)])
    assert shadow(F, 0) == Code.from_points(Shape(3, 1), [(0,)])
    P = projection(F, ())
    assert P.n == 0 and len(P) == 1
    assert projection(F, (0, 1)) == F


@settings(max_examples=60)
@given(codes(shapes=((3, 3), (2, 4))))
def test_shadow_order_independent(F):
    a = shadow(shadow(F, 1), 0)
    b = shadow(shadow(F, 0), 0)
    assert a == b == shadow_set(F, (0, 1))
    # a point survives exactly when some member projects onto it
    want = {tuple(int(v) for v in p[2:]) for p in F.points()}
    assert {tuple(int(v) for v in p) for p in a.points()} == want


def test_shadow_lower_examples():
    single = Code.from_points(Shape(3, 2), [(1, 2)])
    rep = shadow_lower_check(single, pair_config(0))
    assert rep["satisfied"] and rep["lhs"] == 1
    F = ball(Shape(3, 4), BallSpec(1, 0))
    rep = shadow_lower_check(F, pair_config(0))
    assert not rep["skipped"] and rep["lhs"] == 27 and rep["rhs"] == 2 * (27 + 3 * 9)
    assert shadow_lower_check(Code.full(Shape(3, 2)), pair_config(0))["skipped"]
    N = Configuration((2,), ((0,), (0,), (1,), (1,)))
    assert shadow_lower_check(F, N)["skipped"]


def test_shadow_uncap_transfer():
    D = dictator(Shape(3, 4), 0, 0)
    assert shadow_uncap_transfer(D, pair_config(0), 1, 0)["skipped"]
    rep = shadow_uncap_transfer(mod_sum(3, 4), pair_config(1), 4, 0)
    assert rep.get("violated") is not True


def test_shearer_examples():
    rep = shearer_check(Code.full(Shape(2, 3)), 2)
    assert rep["lhs"] == 64 == rep["rhs"] and rep["equality"]
    rep = shearer_check(Code.from_points(Shape(2, 3), [(0, 1, 1)]), 1)
    assert rep["lhs"] == 1 == rep["rhs"]
    with pytest.raises(ValueError):
        shearer_check(Code.full(Shape(2, 3)), 0)


def test_shearer_exhaustive_binary_cube():
    s = Shape(2, 3)
    for mask in range(256):
        F = Code(s, np.array([(mask >> b) & 1 for b in range(8)], dtype=bool))
        for k in (1, 2, 3):
            assert shearer_check(F, k)["satisfied"]


# crosscuts and matchings


def test_crosscut_examples():
    assert crosscut(pair_config(1))[0] == 1
    assert crosscut(Configuration((2,), ((0,), (1,))))[0] == 2
    for h in range(1, 5):
        assert crosscut(matching(h))[0] == h
    assert crosscut(Configuration((), ())) == (0, [])
    # three edges on one part of size 2: (0),(0),(1) is covered by both vertices
    assert crosscut(Configuration((2,), ((0,), (0,), (1,))))[0] == 2


def test_crosscut_is_exact_cover():
    # every edge must contain exactly one chosen vertex
    H = Configuration((2, 2), ((0, 0), (0, 1), (1, 0), (1, 1)))
    size, verts = crosscut(H)
    assert size == 2
    for e in H.edges:
        assert sum(e[k] == v for k, v in verts) == 1
    assert crosscut(Configuration((1,), ((0,),))) == (1, [(0, 0)])
    # an edge with no vertices can never be covered
    assert crosscut(Configuration((), ((),))) is None


def test_cross_matching_examples():
    s = Shape(3, 2)
    rep = cross_matching([Code.full(s), Code.full(s)])
    assert rep["method"] == "greedy" and rep["witness"] is not None
    D = dictator(s, 0, 0)
    rep = cross_matching([D, D])
    assert rep["witness"] is None and rep["hypothesis"] and not rep["triggered"]
    assert not rep["anomaly"]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 3))
def test_cross_matching_dense_families(seed, h):
    rng = np.random.default_rng(seed)
    s = Shape(9, 3)
    fams = [Code(s, rng.random(s.size) < 0.6) for _ in range(h)]
    rep = cross_matching(fams)
    assert not rep["anomaly"]
    if rep["witness"] is not None:
        pts = rep["witness"]
        assert all(tuple(p) in F for p, F in zip(pts, fams))
        for x, y in itertools.combinations(pts, 2):
            assert all(a != b for a, b in zip(x, y))


@settings(max_examples=40)
@given(configs())
def test_text_roundtrip(H):
    assert loads(dumps(H)) == H
