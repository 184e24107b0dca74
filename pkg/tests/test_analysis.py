import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anticode.analysis import (MarkovChain, ProductMeasure, RealFn, chain_correlation,
                               chain_correlation_mc, changenoise_check, conditional_expectation,
                               contraction_check, efron_stein, es_component, gap_lemma_report,
                               global_laplacian_bound_check, global_stab_check, hoffman_bound,
                               hoffman_check, hypercontract_check, laplacian,
                               laplacian_combinatorial, laplacian_signed_sum, noise_apply,
                               noise_apply_es, noise_stability, noise_stability_es,
                               op_to_stab_check, product_measure, recompose,
                               restriction_commutes_check)
from anticode.analysis.realfn import dumps, loads
from anticode.codes import Code, Shape, dictator

TOL = 1e-10


def dictator_fn(m=3, n=2):
    return RealFn.indicator(dictator(Shape(m, n), 0, 0))


def random_measure(rng, radices):
    return ProductMeasure([rng.dirichlet(np.ones(k)) + 0 for k in radices])


@st.composite
def functions(draw, shapes=((2, 4), (3, 3), (2, 2), (4, 2))):
    m, n = draw(st.sampled_from(shapes))
    rng = np.random.default_rng(draw(st.integers(0, 2 ** 32 - 1)))
    nu = random_measure(rng, (m,) * n) if draw(st.booleans()) else ProductMeasure.uniform(m, n)
    return RealFn.random(rng, nu, boolean=draw(st.booleans()))


def subsets(n):
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)


# Efron-Stein


def test_dictator_components():
    f = dictator_fn()
    dec = efron_stein(f, max_degree=None)
    assert np.allclose(dec[()].values, 1 / 3)
    assert dec[(0,)].norm_sq() == pytest.approx(2 / 9, abs=1e-12)
    assert dec[(1,)].norm_sq() == pytest.approx(0, abs=1e-12)
    assert dec[(0, 1)].norm_sq() == pytest.approx(0, abs=1e-12)
    assert sum(dec.norms_sq().values()) == pytest.approx(1 / 3, abs=1e-12)


def test_constant_has_only_empty_piece():
    f = RealFn(np.full((3, 3), 2.5), ProductMeasure.uniform(3, 2))
    dec = efron_stein(f, max_degree=None)
    for S, c in dec.norms_sq().items():
        assert c == pytest.approx(6.25 if S == () else 0.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(functions())
def test_parseval_orthogonality_recompose(f):
    dec = efron_stein(f, max_degree=None)
    assert recompose(dec).allclose(f, TOL)
    pieces = [dec[S] for S in subsets(f.n)]
    assert sum(p.norm_sq() for p in pieces) == pytest.approx(f.norm_sq(), abs=TOL)
    for a, b in itertools.combinations(pieces, 2):
        assert abs(a.inner(b)) <= TOL


@settings(max_examples=30, deadline=None)
@given(functions())
def test_piece_depends_only_on_its_coordinates(f):
    dec = efron_stein(f, max_degree=None)
    for S in subsets(f.n):
        piece = dec[S]
        for i in range(f.n):
            if i in S:
                continue
            # E_i leaves the piece unchanged, and E_j with j in S kills it
            assert conditional_expectation(piece, [j for j in range(f.n) if j != i]).allclose(piece, TOL)
        for j in S:
            keep = [k for k in range(f.n) if k != j]
            assert conditional_expectation(piece, keep).allclose(piece.scale(0.0), TOL)


def test_degree_cap_keeps_tail():
    rng = np.random.default_rng(3)
    f = RealFn.random(rng, ProductMeasure.uniform(3, 3))
    dec = efron_stein(f, max_degree=1)
    assert not dec.complete
    total = sum((dec[S] for S in subsets(3) if len(S) <= 1), dec.tail_fn())
    assert total.allclose(f, TOL)
    with pytest.raises(KeyError):
        dec[(0, 1)]


def test_es_component_matches_decomposition():
    rng = np.random.default_rng(5)
    f = RealFn.random(rng, random_measure(rng, (3, 2, 3)))
    dec = efron_stein(f, max_degree=None)
    for S in subsets(3):
        assert es_component(f, S).allclose(dec[S], TOL)


# restriction and Laplacians


def test_restriction_commutes_examples():
    f = dictator_fn(3, 3)
    assert restriction_commutes_check(f, (), (0,), ())
    assert restriction_commutes_check(f, (0,), (0,), (0,))
    lhs = efron_stein(f, max_degree=None)[(0,)].restrict((0,), (0,))
    assert np.allclose(lhs.values, 2 / 3)


def test_literal_restriction_identity_is_not_general():
    # with f constant the literal right side is the full restriction, the left side vanishes
    f = RealFn(np.ones((3, 3)), ProductMeasure.uniform(3, 2))
    assert restriction_commutes_check(f, (0,), (0,), (0,))
    assert not restriction_commutes_check(f, (0,), (0,), (0,), literal=True)


@settings(max_examples=60, deadline=None)
@given(functions(), st.data())
def test_restriction_commutes_random(f, data):
    T = data.draw(st.sampled_from(list(subsets(f.n))))
    S = data.draw(st.sampled_from([s for s in subsets(f.n) if set(s) <= set(T)]))
    x = tuple(data.draw(st.integers(0, f.measure.radices[i] - 1)) for i in S)
    assert restriction_commutes_check(f, S, T, x)


def test_laplacian_examples():
    f = dictator_fn(3, 3)
    assert laplacian(f, (0,)).allclose(RealFn(f.values - 1 / 3, f.measure), TOL)
    assert laplacian(f, (1,)).allclose(f.scale(0.0), TOL)
    assert laplacian(f, ()).allclose(f, TOL)


@settings(max_examples=60, deadline=None)
@given(functions(), st.data())
def test_three_laplacians_agree(f, data):
    T = data.draw(st.sampled_from(list(subsets(f.n))))
    a = laplacian(f, T)
    assert laplacian_combinatorial(f, T).allclose(a, TOL)
    assert laplacian_signed_sum(f, T).allclose(a, TOL)


# noise


def test_noise_examples():
    f = dictator_fn(3, 3)
    assert noise_apply(f, 1.0).allclose(f, 1e-12)
    assert np.allclose(noise_apply(f, 0.0).values, f.mean())
    assert noise_stability(f, 0.5) == pytest.approx(2 / 9, abs=1e-12)
    assert noise_stability_es(f, 0.5) == pytest.approx(2 / 9, abs=1e-12)


def test_noise_rejects_bad_rho():
    with pytest.raises(ValueError):
        noise_apply(dictator_fn(), 1.5)


@settings(max_examples=50, deadline=None)
@given(functions(), st.floats(0, 1))
def test_noise_matrix_equals_formula(f, rho):
    assert noise_apply(f, rho).allclose(noise_apply_es(f, rho), TOL)
    assert noise_stability(f, rho) == pytest.approx(noise_stability_es(f, rho), abs=TOL)


@settings(max_examples=30, deadline=None)
@given(functions(), st.floats(0, 1), st.floats(0, 1))
def test_stability_monotone_in_rho(f, a, b):
    lo, hi = min(a, b), max(a, b)
    assert noise_stability(f, lo) <= noise_stability(f, hi) + TOL


def test_changenoise_examples():
    f = dictator_fn(3, 3)
    assert changenoise_check(f, 0.5, 1)
    assert noise_stability(f, 0.5) <= math.sqrt(1 / 3) * math.sqrt(noise_stability(f, 0.25))
    c = RealFn(np.full((2, 2), 0.7), ProductMeasure.uniform(2, 2))
    assert changenoise_check(c, 0.3, 2)


@settings(max_examples=50, deadline=None)
@given(functions(), st.floats(0, 1), st.sampled_from([1, 2]))
def test_changenoise_random(f, rho, d):
    assert changenoise_check(f, rho, d)


# chains


def test_spectral_gaps():
    assert MarkovChain.fully_mixing([0.2, 0.3, 0.5]).abs_spectral_gap() == pytest.approx(1.0, abs=TOL)
    for m in range(3, 9):
        assert MarkovChain.disagreement(m).abs_spectral_gap() == pytest.approx(1 - 1 / (m - 1), abs=TOL)
    assert MarkovChain.disagreement(2).abs_spectral_gap() == pytest.approx(0.0, abs=TOL)


def test_gap_lemma_examples():
    rep = gap_lemma_report(MarkovChain.fully_mixing([0.5, 0.5]), 1.0)
    assert rep["hypothesis"] and rep["satisfied"]
    rep = gap_lemma_report(MarkovChain.disagreement(3), 0.0)
    assert rep["satisfied"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 6), st.floats(0.05, 0.9), st.booleans())
def test_gap_lemma_random(seed, k, alpha, reversible):
    T = MarkovChain.random_floored(np.random.default_rng(seed), k, alpha, reversible)
    assert T.gap_floor_holds(alpha)
    assert T.abs_spectral_gap() >= alpha - 1e-9
    if reversible:
        assert T.is_reversible(1e-9)


def test_chain_rejects_bad_matrices():
    with pytest.raises(ValueError):
        MarkovChain([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        MarkovChain([[0.5, 0.6], [0.5, 0.5]])


def test_chain_correlation_examples():
    s = Shape(3, 1)
    chains = [MarkovChain.disagreement(3)]
    full = Code.full(s)
    assert chain_correlation(full, full, chains) == pytest.approx(1.0)
    d1, d2 = dictator(s, 0, 0), dictator(s, 0, 1)
    assert chain_correlation(d1, d1, chains) == pytest.approx(0.0, abs=1e-12)
    assert chain_correlation(d1, d2, chains) == pytest.approx(1 / 6, abs=1e-12)


def test_chain_correlation_mc_deterministic_across_jobs():
    s = Shape(3, 2)
    chains = [MarkovChain.noise([1 / 3] * 3, 0.5)] * 2
    F, G = dictator(s, 0, 0), dictator(s, 1, 1)
    exact = chain_correlation(F, G, chains)
    a = chain_correlation_mc(F, G, chains, 20000, seed=7, jobs=1)
    b = chain_correlation_mc(F, G, chains, 20000, seed=7, jobs=3)
    assert a == b
    assert abs(a[0] - exact) <= 5 * a[1] + 1e-3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(2, 3), (3, 2), (3, 3)]))
def test_contraction_and_op_to_stab(seed, shape):
    rng = np.random.default_rng(seed)
    k, n = shape
    chains = [MarkovChain.random_floored(rng, k, float(rng.uniform(0.1, 0.9))) for _ in range(n)]
    f = RealFn.random(rng, product_measure(chains))
    for S in subsets(n):
        assert contraction_check(f, S, chains)
    lam = min(c.abs_spectral_gap() for c in chains)
    rep = op_to_stab_check(f, chains, lam)
    assert rep["hypothesis"] and rep["satisfied"]


def test_op_to_stab_fully_mixing_equality():
    nu = [0.2, 0.8]
    chains = [MarkovChain.fully_mixing(nu)] * 3
    f = RealFn.random(np.random.default_rng(1), product_measure(chains))
    rep = op_to_stab_check(f, chains, 1.0)
    assert rep["lhs"] == pytest.approx(f.mean() ** 2, abs=TOL)
    assert rep["rhs"] == pytest.approx(f.mean() ** 2, abs=TOL)


def test_op_to_stab_skips_without_gap():
    chains = [MarkovChain.disagreement(2)] * 2
    f = RealFn.random(np.random.default_rng(2), product_measure(chains))
    rep = op_to_stab_check(f, chains, 0.5)
    assert rep["skipped"] and not rep["hypothesis"]


# Hoffman


def test_hoffman_dictator_equality():
    s = Shape(3, 2)
    D = dictator(s, 0, 0)
    rep = hoffman_check(D, D, ProductMeasure.uniform(3, 2), Fraction(1, 3))
    assert rep["cross_intersecting"] and rep["equality"]
    assert rep["alpha1"] * rep["alpha2"] == Fraction(1, 9) == rep["bound"]


def test_hoffman_empty_and_hypothesis():
    s = Shape(3, 2)
    nu = ProductMeasure.uniform(3, 2)
    rep = hoffman_check(Code.empty(s), dictator(s, 0, 0), nu, Fraction(1, 3))
    assert rep["satisfied"] and rep["alpha1"] == 0
    with pytest.raises(ValueError):
        hoffman_check(Code.empty(s), Code.empty(s), nu, Fraction(1, 4))
    assert hoffman_bound(Fraction(2, 3), Fraction(2, 3), Fraction(1, 2)) == Fraction(1, 9)


# hypercontractivity and globalness


def test_hypercontract_examples():
    c = RealFn(np.full((3, 3), 0.5), ProductMeasure.uniform(3, 2))
    rep = hypercontract_check(c, 1 / 160)
    assert rep["lhs"] == pytest.approx(0.5 ** 4) and rep["satisfied"]
    assert hypercontract_check(dictator_fn(3, 2), 1 / 160)["satisfied"]


@settings(max_examples=30, deadline=None)
@given(functions(shapes=((2, 4), (3, 3))))
def test_hypercontract_random(f):
    assert hypercontract_check(f, 1 / 160)["satisfied"]


def test_global_laplacian_examples():
    f = dictator_fn(3, 2)
    rep = global_laplacian_bound_check(f, (0,), (0,), 1, 1.0)
    assert rep["satisfied"]
    rep = global_laplacian_bound_check(f, (), (), 1, 1.0)
    assert rep["lhs"] <= 1.0 + TOL
    assert global_laplacian_bound_check(f, (0,), (0,), 1, 0.5)["skipped"]


def test_global_stab_reporter():
    s = Shape(3, 4)
    assert global_stab_check(Code.empty(s), 1 / 160, 0.1)["hypothesis"] == "vacuous"
    assert global_stab_check(dictator(s, 0, 0), 1 / 160, 0.1)["hypothesis"] == "fails"


# text format


def test_realfn_roundtrip():
    rng = np.random.default_rng(0)
    f = RealFn.random(rng, ProductMeasure([[Fraction(1, 3), Fraction(2, 3)], [Fraction(1, 2)] * 2]))
    g = loads(dumps(f))
    assert g.allclose(f, 0.0)
    # weights are written as 17-digit decimals, so they come back as floats
    for i in range(f.n):
        assert np.allclose(g.measure.array(i), f.measure.array(i), atol=1e-16)


def test_measure_exactness():
    nu = ProductMeasure([[Fraction(1, 3), Fraction(2, 3)]] * 2)
    table = np.array([[True, False], [False, True]])
    assert nu.measure_of(table) == Fraction(5, 9)
    with pytest.raises(ValueError):
        ProductMeasure([[Fraction(1, 2), Fraction(1, 3)]])
