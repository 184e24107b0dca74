import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anticode.analysis import ProductMeasure, RealFn
from anticode.codes import BallSpec, Code, Restriction, Shape, ball, dictator, restrict
from anticode.pseudorandom import (bad_pattern_mass, capture_leftover, fairness_estimate,
                                   global_implies_uncapturable_check, is_global, is_pseudorandom,
                                   is_uncapturable, junta_approx_small_m, make_global,
                                   mean_square_energy, pattern_count, regularity_large_m,
                                   regularity_small_m, restriction_counts)


def mod_sum(m, n):
    return Code.from_predicate(Shape(m, n), lambda P: P.sum(axis=1) % m == 0)


def brute_pseudorandom(F, r, eps):
    mu = F.measure()
    for k in range(r + 1):
        for R in itertools.combinations(range(F.n), k):
            for a in itertools.product(range(F.m), repeat=k):
                if abs(restrict(F, Restriction(R, a)).measure() - mu) > eps:
                    return False
    return True


def brute_capturable(F, r, eps):
    dicts = [(i, a) for i in range(F.n) for a in range(F.m)]
    for k in range(r + 1):
        for D in itertools.combinations(dicts, k):
            if capture_leftover(F, D) <= eps:
                return True
    return False


@st.composite
def codes(draw, shapes=((3, 2), (3, 3), (2, 3), (4, 2))):
    m, n = draw(st.sampled_from(shapes))
    s = Shape(m, n)
    p = draw(st.sampled_from([0.2, 0.5, 0.8]))
    rng = np.random.default_rng(draw(st.integers(0, 2 ** 32 - 1)))
    return Code(s, rng.random(s.size) < p)


# pseudorandomness


def test_pseudorandom_examples():
    assert is_pseudorandom(Code.full(Shape(3, 3)), 2, 0).holds
    rep = is_pseudorandom(dictator(Shape(3, 3), 0, 0), 1, Fraction(1, 2))
    assert rep.verdict == "fails"
    assert rep.witness["restriction"] == Restriction((0,), (0,))
    assert rep.witness["deviation"] == Fraction(2, 3)
    assert is_pseudorandom(mod_sum(3, 4), 2, 0).holds
    assert is_pseudorandom(mod_sum(3, 4), 3, 0).holds


def test_pseudorandom_budget_gives_unknown():
    rep = is_pseudorandom(mod_sum(3, 4), 2, 0, budget=5)
    assert rep.verdict == "unknown"
    assert pattern_count(4, 3, 2) == 1 + 12 + 54


@settings(max_examples=60, deadline=None)
@given(codes(), st.data())
def test_pseudorandom_matches_brute(F, data):
    r = data.draw(st.integers(0, F.n))
    eps = Fraction(data.draw(st.integers(0, 6)), 6)
    assert is_pseudorandom(F, r, eps).holds == brute_pseudorandom(F, r, eps)


def test_restriction_counts():
    F = dictator(Shape(3, 3), 0, 0)
    c = restriction_counts(F, (0,))
    assert c.tolist() == [9, 0, 0]
    assert int(restriction_counts(F, ())) == 9


# globalness


def test_global_examples():
    assert is_global(Code.empty(Shape(3, 3)), 2, 0).holds
    rep = is_global(dictator(Shape(3, 3), 0, 0), 1, Fraction(9, 10))
    assert rep.verdict == "fails" and rep.witness["norm_sq"] == 1
    assert is_global(mod_sum(3, 4), 1, Fraction(1, 3)).holds
    assert not is_global(mod_sum(3, 4), 1, Fraction(1, 4)).holds


def test_global_realfn_matches_code():
    F = ball(Shape(3, 3), BallSpec(1, 1))
    f = RealFn.indicator(F)
    for eps in (Fraction(1, 3), Fraction(2, 3), Fraction(7, 9)):
        assert is_global(F, 2, eps).verdict == is_global(f, 2, float(eps)).verdict


def test_global_under_measure():
    F = dictator(Shape(2, 3), 0, 0)
    nu = ProductMeasure([[0.25, 0.75]] * 3)
    assert is_global(F, 0, 0.25, nu=nu).holds
    assert not is_global(F, 0, 0.2, nu=nu).holds


# uncapturability


def test_uncapturable_examples():
    rep = is_uncapturable(dictator(Shape(3, 3), 0, 0), 1, 0)
    assert rep.verdict == "fails" and rep.witness["dictators"] == [(0, 0)]
    assert is_uncapturable(Code.full(Shape(3, 3)), 1, Fraction(1, 2)).holds
    assert not is_uncapturable(Code.full(Shape(2, 3)), 1, Fraction(1, 2)).holds


def test_mod3_capture_boundary():
    # two dictators on one coordinate leave exactly 1/9, and "capturable" allows equality
    F = mod_sum(3, 4)
    rep = is_uncapturable(F, 2, Fraction(1, 9))
    assert rep.verdict == "fails" and rep.witness["leftover"] == Fraction(1, 9)
    assert is_uncapturable(F, 2, Fraction(1, 10)).holds


@settings(max_examples=50, deadline=None)
@given(codes(), st.integers(0, 3), st.integers(0, 6))
def test_uncapturable_matches_brute(F, r, e):
    eps = Fraction(e, 6)
    rep = is_uncapturable(F, r, eps)
    assert rep.verdict != "unknown"
    assert (rep.verdict == "fails") == brute_capturable(F, r, eps)
    if rep.verdict == "fails":
        assert capture_leftover(F, rep.witness["dictators"]) <= eps
        assert len(rep.witness["dictators"]) <= r


def test_global_implies_uncapturable():
    rep = global_implies_uncapturable_check(mod_sum(8, 3), Fraction(1, 2))
    assert not rep["skipped"] and rep["r"] == 1 and rep["confirmed"] is True
    assert global_implies_uncapturable_check(Code.empty(Shape(3, 2)), Fraction(1, 2))["skipped"]


# restricting to globalness


def test_make_global_examples():
    F = mod_sum(3, 4)
    rho, G, rep = make_global(F, 1, Fraction(1, 2))
    assert len(rho) == 0 and G == F
    D = dictator(Shape(3, 3), 0, 0)
    # at gamma = 1/3 the threshold mu/gamma is already 1, so nothing is restricted
    rho, G, _ = make_global(D, 1, Fraction(1, 3))
    assert len(rho) == 0
    rho, G, rep = make_global(D, 1, Fraction(1, 2))
    assert rho == Restriction((0,), (0,)) and G == Code.full(Shape(3, 2))
    assert rep["size_ok"] and rep["measure_ok"] and rep["global_ok"]
    with pytest.raises(ValueError):
        make_global(Code.empty(Shape(3, 2)), 1, Fraction(1, 2))


@settings(max_examples=40, deadline=None)
@given(codes(shapes=((3, 3), (4, 2), (3, 2))), st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(3, 4)]))
def test_make_global_postconditions(F, gamma):
    if len(F) == 0:
        return
    rho, G, rep = make_global(F, 1, gamma)
    assert G == restrict(F, rho)
    assert rep["measure_ok"] and rep["global_ok"] and rep["size_ok"]


# small-alphabet regularity


def test_mean_square_energy_examples():
    F = dictator(Shape(3, 3), 0, 0)
    assert mean_square_energy(F, ()) == Fraction(1, 9)
    assert mean_square_energy(F, (0,)) == Fraction(1, 3)
    B = ball(Shape(3, 3), BallSpec(1, 1))
    assert mean_square_energy(B, (0, 1, 2)) == B.measure()


@settings(max_examples=40, deadline=None)
@given(codes(), st.data())
def test_mean_square_energy_monotone(F, data):
    T2 = data.draw(st.sets(st.integers(0, F.n - 1)))
    T1 = data.draw(st.sets(st.sampled_from(sorted(T2)))) if T2 else set()
    assert mean_square_energy(F, tuple(T1)) <= mean_square_energy(F, tuple(T2)) <= 1


def test_regularity_small_examples():
    dec = regularity_small_m(mod_sum(3, 4), 1, Fraction(1, 10), Fraction(1, 10))
    assert dec.T == () and dec.checks["iterations"] == 0
    dec = regularity_small_m(dictator(Shape(3, 3), 0, 0), 1, Fraction(1, 10), Fraction(1, 4))
    assert dec.T == (0,)
    for a in range(3):
        sub = restrict(dictator(Shape(3, 3), 0, 0), Restriction((0,), (a,)))
        assert len(sub) in (0, sub.shape.size)


@settings(max_examples=40, deadline=None)
@given(codes(shapes=((3, 3), (2, 4), (3, 2))), st.sampled_from([1, 2]),
       st.sampled_from([Fraction(1, 5), Fraction(1, 3)]), st.sampled_from([Fraction(1, 10), Fraction(1, 3)]))
def test_regularity_small_postconditions(F, r, eps, delta):
    dec = regularity_small_m(F, r, eps, delta)
    c = dec.checks
    assert c["increments_ok"] and c["strictly_increasing"] and c["iterations_ok"] and c["bad_mass_ok"]
    assert bad_pattern_mass(F, dec.T, r, eps) == dec.bad_mass <= delta


def test_junta_approx_examples():
    F = ball(Shape(3, 4), BallSpec(1, 0))
    J, rep = junta_approx_small_m(F, 1, Fraction(1, 10), 1, Fraction(1, 10))
    assert F.issubset(J) and rep["missed_measure"] == 0
    E = Code.empty(Shape(3, 3))
    J, rep = junta_approx_small_m(E, 1, Fraction(1, 10), 1, Fraction(1, 10))
    assert len(J) == 0
    B = ball(Shape(3, 5), BallSpec(2, 1))
    J, rep = junta_approx_small_m(B, 2, Fraction(1, 5), 1, Fraction(1, 5))
    assert rep["missed_ok"]
    with pytest.raises(ValueError):
        junta_approx_small_m(Code.full(Shape(3, 2)), 1, Fraction(1, 10), 1, Fraction(1, 10))


# large-alphabet regularity


def test_regularity_large_examples():
    dec = regularity_large_m(mod_sum(3, 4), 1, 1, Fraction(1, 3))
    assert dec.cubes == [Restriction()]
    D = dictator(Shape(3, 4), 1, 2)
    dec = regularity_large_m(D, 1, 1, Fraction(1, 3))
    assert dec.cubes == [Restriction((1,), (2,))] and dec.leftover == 0
    with pytest.raises(ValueError):
        regularity_large_m(D, 1, 1, Fraction(1, 4))


@settings(max_examples=30, deadline=None)
@given(codes(shapes=((3, 3), (4, 2), (4, 3))), st.integers(1, 2), st.integers(1, 2))
def test_regularity_large_postconditions(F, r, k):
    dec = regularity_large_m(F, r, k, Fraction(1, F.m))
    c = dec.checks
    assert c["leftover_ok"] and c["codim_ok"] and c["count_ok"]
    covered = np.zeros(F.shape.dims, dtype=bool)
    for rho in dec.cubes:
        covered[rho.index(F.n)] = True
    assert dec.leftover == Fraction(int((F.table & ~covered).sum()), F.shape.size)


# fairness


def test_fairness_examples():
    rep = fairness_estimate(Code.full(Shape(3, 3)), 1, 2000, Fraction(1, 10), seed=1)
    assert rep["estimate"] == 1.0 and rep["exact"] == 1
    D = dictator(Shape(3, 4), 0, 0)
    rep = fairness_estimate(D, 1, 20000, Fraction(1, 10), seed=1)
    assert rep["exact"] == 1 - Fraction(1, 4) * Fraction(2, 3)
    assert abs(rep["estimate"] - float(rep["exact"])) <= 5 * rep["stderr"] + 1e-3


def test_fairness_deterministic_across_jobs():
    F = ball(Shape(3, 4), BallSpec(1, 1))
    a = fairness_estimate(F, 2, 30000, Fraction(1, 10), seed=9, jobs=1)
    b = fairness_estimate(F, 2, 30000, Fraction(1, 10), seed=9, jobs=4)
    assert a == b
