"""Canned experiment bundles: the acceptance criteria, a smoke subset, exploration.

Every criterion returns a dict with ``id``, ``name``, ``passed``, ``seconds``
and a ``details`` payload of counts, so a failure says what broke.
"""
from __future__ import annotations

import itertools
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

from . import configurations as cf
from .analysis import (MarkovChain, ProductMeasure, RealFn, changenoise_check, contraction_check,
                       efron_stein, hoffman_check, hypercontract_check, laplacian,
                       laplacian_combinatorial, laplacian_signed_sum, noise_apply, noise_apply_es,
                       noise_stability, op_to_stab_check, product_measure,
                       restriction_commutes_check)
from .codes import (BallSpec, Code, Restriction, Shape, all_points, ball, best_ball, dictator,
                    is_cross_t_intersecting, is_isomorphic_small, is_s_avoiding, is_t_intersecting,
                    restrict, agreement_matrix)
from .compression import compress_family, compress_full, is_compressed, mu_p, reduce
from .extremal import max_avoiding, max_intersecting, naive_max
from .gluing import Gluing, glue_code, glue_measure, sample_gluing, t_intersection_preserved
from .pseudorandom import (bad_pattern_mass, is_uncapturable, regularity_large_m,
                           regularity_small_m)
from .rng import rng_for

TOL = 1e-10


def random_code(rng: np.random.Generator, shape: Shape, p: float | None = None) -> Code:
    p = rng.uniform(0.1, 0.9) if p is None else p
    return Code(shape, rng.random(shape.dims) < p)


def allowed_partners(F: Code, t: int) -> np.ndarray:
    """Table of y agreeing with every member of F in at least t coordinates."""
    P = all_points(F.shape)
    if len(F) == 0:
        return np.ones(F.shape.dims, dtype=bool)
    A = agreement_matrix(P, F.points())
    return (A >= t).all(axis=1).reshape(F.shape.dims)


def random_cross_pair(rng, shape: Shape, t: int, p: float = 0.15):
    """A random cross t-intersecting pair: sparse F, then G inside F's partners."""
    F = random_code(rng, shape, p)
    ok = allowed_partners(F, t)
    G = Code(shape, ok & (rng.random(shape.dims) < rng.uniform(0.3, 1.0)))
    return F, G


def random_measure(rng, radices, exact: bool = True, cap: Fraction | None = None):
    ws = []
    for k in radices:
        while True:
            w = rng.integers(1, 11, size=k)
            q = [Fraction(int(a), int(w.sum())) for a in w]
            if cap is None or max(q) <= cap:
                break
        ws.append(q if exact else [float(a) for a in q])
    return ProductMeasure(ws)


def _result(cid, name, passed, t0, **details):
    return {"id": cid, "name": name, "passed": bool(passed),
            "seconds": round(time.perf_counter() - t0, 3), "details": details}


# 1


def crit_balls(scale=1.0):
    t0 = time.perf_counter()
    got = {
        "S_1,0[3]^3": len(ball(Shape(3, 3), BallSpec(1, 0))),
        "S_1,1[3]^3": len(ball(Shape(3, 3), BallSpec(1, 1))),
        "S_2,0[3]^4": len(ball(Shape(3, 4), BallSpec(2, 0))),
        "S_2,1[3]^4": len(ball(Shape(3, 4), BallSpec(2, 1))),
    }
    want = [9, 7, 9, 9]
    return _result(1, "balls", list(got.values()) == want, t0, counts=got)


# 2


def crit_extremal(scale=1.0):
    t0 = time.perf_counter()
    out = {}
    ok = True
    for n, want in ((2, 3), (3, 9)):
        res = max_avoiding(3, n, 1)
        shape = Shape(3, n)
        r, size, B = best_ball(shape, 1)
        iso = is_isomorphic_small(res.witness, B)
        out[f"(3,{n},1)"] = {"size": res.size, "ball": size, "isomorphic": iso, "optimality": res.optimality}
        ok &= res.size == want == size and iso is True and res.optimal
    mismatches = []
    shapes = 0
    for m in range(2, 65):
        for n in range(1, 7):
            if m ** n > 64:
                break
            for t in range(1, n + 1):
                for kind, fn in (("avoid", max_avoiding), ("intersect", max_intersecting)):
                    shapes += 1
                    a = fn(m, n, t)
                    if not a.optimal or a.size != naive_max(m, n, t, kind):
                        mismatches.append([m, n, t, kind])
    ok &= not mismatches
    secs = time.perf_counter() - t0
    ok &= secs < 60
    return _result(2, "extremal", ok, t0, values=out, instances=shapes, mismatches=mismatches)


# 3 and 4 share their random families


def _compression_families(rng, shape, count):
    return [random_code(rng, shape) for _ in range(count)]


def crit_compression(scale=1.0):
    t0 = time.perf_counter()
    count = max(1, int(1000 * scale))
    pairs = max(1, int(200 * scale))
    bad = {"size": 0, "idempotent": 0, "compressed": 0, "cross": 0}
    checked_pairs = 0
    for si, shape in enumerate((Shape(3, 3), Shape(3, 4), Shape(4, 3))):
        rng = rng_for(3, si)
        for F in _compression_families(rng, shape, count):
            for i in range(shape.n):
                for j in range(1, shape.m):
                    bad["size"] += len(compress_family(F, i, j)) != len(F)
            C = compress_full(F)
            bad["size"] += len(C) != len(F)
            bad["idempotent"] += compress_full(C) != C
            bad["compressed"] += not is_compressed(C)
        for _ in range(pairs):
            t = int(rng.integers(1, 3))
            F, G = random_cross_pair(rng, shape, t)
            if not is_cross_t_intersecting(F, G, t):
                continue
            checked_pairs += 1
            for i in range(shape.n):
                for j in range(1, shape.m):
                    bad["cross"] += not is_cross_t_intersecting(compress_family(F, i, j),
                                                               compress_family(G, i, j), t)
            bad["cross"] += not is_cross_t_intersecting(compress_full(F), compress_full(G), t)
    return _result(3, "compression", not any(bad.values()), t0, families_per_shape=count,
                   cross_pairs=checked_pairs, violations=bad)


def crit_reduction(scale=1.0):
    t0 = time.perf_counter()
    count = max(1, int(1000 * scale))
    bad = {"monotone": 0, "measure": 0}
    total = 0
    for si, shape in enumerate((Shape(3, 3), Shape(3, 4), Shape(4, 3))):
        rng = rng_for(3, si)
        for F in _compression_families(rng, shape, count):
            C = compress_full(F)
            B = reduce(C)
            total += 1
            bad["monotone"] += not B.is_monotone()
            bad["measure"] += mu_p(B, Fraction(1, shape.m)) < C.measure()
    return _result(4, "reduction", not any(bad.values()), t0, families=total, violations=bad)


# 5


def _instances(scale, per=500):
    count = max(1, int(per * scale))
    for si, (m, n) in enumerate(((2, 4), (3, 3))):
        rng = rng_for(5, si)
        for k in range(count):
            nu = ProductMeasure.uniform(m, n) if k % 2 == 0 else random_measure(rng, [m] * n, exact=False)
            yield rng, RealFn.random(rng, nu)


def crit_efron_stein(scale=1.0):
    t0 = time.perf_counter()
    worst = {"parseval": 0.0, "orthogonality": 0.0, "restriction": 0, "laplacian": 0.0}
    count = 0
    for rng, f in _instances(scale):
        count += 1
        n = f.n
        dec = efron_stein(f, max_degree=None)
        pieces = [dec[S] for k in range(n + 1) for S in itertools.combinations(range(n), k)]
        worst["parseval"] = max(worst["parseval"], abs(sum(p.norm_sq() for p in pieces) - f.norm_sq()))
        for a, b in itertools.combinations(pieces, 2):
            worst["orthogonality"] = max(worst["orthogonality"], abs(a.inner(b)))
        T = tuple(int(i) for i in np.flatnonzero(rng.random(n) < 0.6))
        S = tuple(i for i in T if rng.random() < 0.5)
        x = tuple(int(rng.integers(0, f.measure.radices[i])) for i in S)
        worst["restriction"] += not restriction_commutes_check(f, S, T, x, TOL)
        L1 = laplacian(f, T, dec).values
        L2 = laplacian_combinatorial(f, T).values
        L3 = laplacian_signed_sum(f, T).values
        worst["laplacian"] = max(worst["laplacian"], float(np.max(np.abs(L1 - L2))),
                                 float(np.max(np.abs(L1 - L3))))
    ok = (worst["parseval"] <= TOL and worst["orthogonality"] <= TOL
          and worst["restriction"] == 0 and worst["laplacian"] <= TOL)
    return _result(5, "efron_stein", ok, t0, functions=count, worst=worst)


# 6


def crit_noise(scale=1.0):
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for rng, f in _instances(scale):
        rho = float(rng.random())
        worst = max(worst, float(np.max(np.abs(noise_apply(f, rho).values - noise_apply_es(f, rho).values))))
        count += 1
    stab = {}
    for n in range(1, 5):
        f = RealFn.indicator(dictator(Shape(3, n), 0, 0))
        stab[n] = noise_stability(f, 0.5)
    stab_ok = all(abs(v - 2 / 9) <= 1e-12 for v in stab.values())
    viol = 0
    trials = max(1, int(1000 * scale))
    rng = rng_for(6)
    for k in range(trials):
        m, n = ((2, 4), (3, 3))[k % 2]
        nu = ProductMeasure.uniform(m, n) if k % 4 < 2 else random_measure(rng, [m] * n, exact=False)
        f = RealFn.random(rng, nu)
        rho = float(rng.random())
        for d in (1, 2):
            viol += not changenoise_check(f, rho, d, 1e-12)
    ok = worst <= TOL and stab_ok and viol == 0
    return _result(6, "noise", ok, t0, functions=count, worst_matrix_vs_es=worst,
                   stab_half=stab, changenoise_trials=trials, changenoise_violations=viol)


# 7


def crit_spectral(scale=1.0):
    t0 = time.perf_counter()
    gaps = {m: MarkovChain.disagreement(m).abs_spectral_gap() for m in range(2, 9)}
    gap_ok = abs(gaps[2]) <= TOL and all(abs(gaps[m] - (1 - 1 / (m - 1))) <= TOL for m in range(3, 9))
    rng = rng_for(7)
    floored = max(1, int(500 * scale))
    gap_viol = 0
    for _ in range(floored):
        k = int(rng.integers(2, 7))
        alpha = float(rng.uniform(0.01, 0.99))
        T = MarkovChain.random_floored(rng, k, alpha, reversible=bool(rng.integers(0, 2)))
        gap_viol += not (T.gap_floor_holds(alpha) and T.abs_spectral_gap() >= alpha - TOL)
    inst = max(1, int(300 * scale))
    contr_viol = stab_viol = skipped = 0
    for _ in range(inst):
        n = int(rng.integers(2, 4))
        chains = [MarkovChain.random_floored(rng, int(rng.integers(2, 4)), float(rng.uniform(0.05, 0.9)),
                                             reversible=bool(rng.integers(0, 2))) for _ in range(n)]
        f = RealFn.random(rng, product_measure(chains))
        for k in range(n + 1):
            for S in itertools.combinations(range(n), k):
                contr_viol += not contraction_check(f, S, chains)
        lam = min(c.abs_spectral_gap() for c in chains)
        rep = op_to_stab_check(f, chains, lam)
        if rep["skipped"]:
            skipped += 1
        else:
            stab_viol += not rep["satisfied"]
    ok = gap_ok and gap_viol == 0 and contr_viol == 0 and stab_viol == 0
    return _result(7, "spectral", ok, t0, disagreement_gaps=gaps, floored_chains=floored,
                   gap_violations=gap_viol, product_instances=inst,
                   contraction_violations=contr_viol, op_to_stab_violations=stab_viol,
                   op_to_stab_skipped=skipped)


# 8


def crit_hoffman(scale=1.0):
    t0 = time.perf_counter()
    shape = Shape(3, 2)
    P = all_points(shape)
    A = agreement_matrix(P, P)
    agree_bits = [sum(1 << j for j in range(9) if A[i, j] >= 1) for i in range(9)]
    masks = np.arange(512)
    allowed = np.empty(512, dtype=np.int64)
    for a in range(512):
        bits = (1 << 9) - 1
        for i in range(9):
            if a >> i & 1:
                bits &= agree_bits[i]
        allowed[a] = bits
    pop = np.array([bin(v).count("1") for v in range(512)])
    cross = (masks[None, :] & ~allowed[:, None]) == 0
    c1, c2 = pop[:, None], pop[None, :]
    # alpha1 alpha2 <= (1/4)(1 - alpha1)(1 - alpha2) with lambda = 1/3, in integers
    viol = int(np.sum(cross & (4 * c1 * c2 > (9 - c1) * (9 - c2))))
    pairs = int(cross.sum())
    # spot-check the bitmask filter against the direct checker
    rng = rng_for(8)
    mismatch = 0
    for a, b in rng.integers(0, 512, size=(200, 2)):
        F = Code.from_indices(shape, [i for i in range(9) if a >> i & 1])
        G = Code.from_indices(shape, [i for i in range(9) if b >> i & 1])
        mismatch += is_cross_t_intersecting(F, G, 1) != bool(cross[a, b])
    D = dictator(shape, 0, 0)
    eq = hoffman_check(D, D, ProductMeasure.uniform(3, 2), Fraction(1, 3))
    eq_ok = eq["alpha1"] * eq["alpha2"] == Fraction(1, 9) == eq["bound"]
    inst = max(1, int(200 * scale))
    gen_viol = 0
    for _ in range(inst):
        m, n = int(rng.integers(3, 5)), int(rng.integers(2, 4))
        lam = Fraction(1, 2) if rng.random() < 0.5 else None
        nu = random_measure(rng, [m] * n, exact=True, cap=Fraction(1, 2))
        lam = nu.max_weight() if lam is None else lam
        G1, G2 = random_cross_pair(rng, Shape(m, n), 1, p=float(rng.uniform(0.02, 0.3)))
        rep = hoffman_check(G1, G2, nu, lam)
        gen_viol += not (rep["cross_intersecting"] and rep["satisfied"])
    ok = viol == 0 and mismatch == 0 and eq_ok and gen_viol == 0 and time.perf_counter() - t0 < 300
    return _result(8, "hoffman", ok, t0, cross_pairs=pairs, violations=viol, filter_mismatches=mismatch,
                   dictator_equality=eq_ok, general_instances=inst, general_violations=gen_viol)


# 9


def crit_hypercontract(scale=1.0):
    t0 = time.perf_counter()
    viol = 0
    count = 0
    worst = 0.0
    for _, f in _instances(scale):
        rep = hypercontract_check(f, 1 / 160)
        count += 1
        viol += not rep["satisfied"]
        worst = max(worst, rep["lhs"] / rep["rhs"] if rep["rhs"] > 0 else 0.0)
    return _result(9, "hypercontract", viol == 0, t0, functions=count, violations=viol,
                   worst_ratio=worst)


# 10


def crit_regularity_small(scale=1.0):
    t0 = time.perf_counter()
    rng = rng_for(10)
    runs = max(1, int(100 * scale))
    bad = []
    iters = 0
    for k in range(runs):
        m, n = ((2, 4), (2, 5), (3, 3), (3, 4))[k % 4]
        shape = Shape(m, n)
        if k % 3 == 0:
            F = ball(shape, BallSpec(1, int(rng.integers(0, (n - 1) // 2 + 1))))
        else:
            F = random_code(rng, shape)
        r = int(rng.integers(1, 3))
        eps = Fraction(1, int(rng.integers(2, 5)))
        delta = Fraction(1, int(rng.integers(2, 5)))
        dec = regularity_small_m(F, r, eps, delta)
        c = dec.checks
        recount = bad_pattern_mass(F, dec.T, r, eps)
        iters += c["iterations"]
        ok = (c["increments_ok"] and c["strictly_increasing"] and c["iterations_ok"]
              and c["bad_mass_ok"] and recount <= delta and recount == dec.bad_mass)
        if not ok:
            bad.append({"run": k, "m": m, "n": n, "r": r, "eps": eps, "delta": delta,
                        "checks": c, "recount": recount})
    return _result(10, "regularity_small_m", not bad, t0, runs=runs, total_iterations=iters, failures=bad)


# 11


def _captures(F: Code, dictators, eps) -> bool:
    left = 0
    for x in F.points():
        if not any(x[i] == a for i, a in dictators):
            left += 1
    return Fraction(left, F.shape.size) <= eps


def _brute_capturable(F: Code, r: int, eps) -> bool:
    dicts = [(i, a) for i in range(F.n) for a in range(F.m)]
    for k in range(min(r, len(dicts)) + 1):
        for D in itertools.combinations(dicts, k):
            if _captures(F, D, eps):
                return True
    return False


def _union_of_subcubes(rng, shape, count):
    t = np.zeros(shape.dims, dtype=bool)
    for _ in range(count):
        k = int(rng.integers(1, 3))
        R = tuple(sorted(rng.choice(shape.n, size=k, replace=False).tolist()))
        rho = Restriction(R, tuple(int(v) for v in rng.integers(0, shape.m, size=k)))
        t[rho.index(shape.n)] = True
    return Code(shape, t)


def crit_regularity_large(scale=1.0):
    t0 = time.perf_counter()
    rng = rng_for(11)
    runs = max(1, int(80 * scale))
    bad = []
    verdicts = {"holds": 0, "fails": 0, "unknown": 0}
    for k in range(runs):
        m, n = ((4, 3), (5, 3), (6, 2))[k % 3]
        shape = Shape(m, n)
        if k % 2:
            F = _union_of_subcubes(rng, shape, int(rng.integers(1, 4)))
        else:
            F = random_code(rng, shape, float(rng.uniform(0.05, 0.5)))
        r = int(rng.integers(1, 4))
        kk = int(rng.integers(1, 3))
        eps = Fraction(int(rng.integers(1, 3)), m)
        dec = regularity_large_m(F, r, kk, eps)
        covered = np.zeros(shape.dims, dtype=bool)
        for rho in dec.cubes:
            covered[rho.index(n)] = True
        leftover = Fraction(int((F.table & ~covered).sum()), shape.size)
        bound = 3 * Fraction(r) ** (kk + 1) * eps / Fraction(m) ** kk
        problems = []
        if leftover != dec.leftover or leftover > bound:
            problems.append("leftover")
        if not (dec.checks["count_ok"] and dec.checks["codim_ok"]):
            problems.append("structure")
        for rec in dec.ledger:
            sub = restrict(F, rec["cube"])
            e = rec.get("eps", eps * Fraction(m) ** (-kk))
            verdicts[rec["verdict"]] += 1
            if rec["verdict"] == "fails":
                rep = is_uncapturable(sub, r, e)
                if not (rep.verdict == "fails" and _captures(sub, rep.witness["dictators"], e)):
                    problems.append("capturable witness")
            elif rec["verdict"] == "holds" and r <= 3 and _brute_capturable(sub, r, e):
                problems.append("false uncapturable")
        if problems:
            bad.append({"run": k, "m": m, "n": n, "r": r, "k": kk, "eps": eps, "problems": problems})
    return _result(11, "regularity_large_m", not bad, t0, runs=runs, verdicts=verdicts, failures=bad)


# 12


def _all_equal_fiber_maps(m, k):
    out = []
    for labels in itertools.product(range(k), repeat=m):
        if all(labels.count(c) == m // k for c in range(k)):
            out.append(labels)
    return out


def _t_intersecting_suite(shape, t, rng, extra=6):
    fams = []
    for r in range(0, (shape.n - t) // 2 + 1):
        fams.append(ball(shape, BallSpec(t, r)))
    # a codimension-t subcube with non-default symbols
    fams.append(Code.from_predicate(shape, lambda P: np.all(P[:, :t] == 1, axis=1)))
    for _ in range(extra):
        # random maximal t-intersecting family by greedy insertion
        P = all_points(shape)
        A = agreement_matrix(P, P)
        chosen = []
        for v in rng.permutation(len(P)):
            if all(A[v, u] >= t for u in chosen):
                chosen.append(int(v))
        fams.append(Code.from_indices(shape, chosen))
    return [F for F in fams if is_t_intersecting(F, t)]


def _example_n6():
    shape = Shape(3, 6)
    F = Code.from_predicate(shape, lambda P: (P <= 1).sum(axis=1) >= 4)
    pi = Gluing(tuple((0, 0, 1) for _ in range(6)), 2)
    G = glue_code(F, pi)
    nu = ProductMeasure.uniform(3, 6)
    return F.measure(), glue_measure(nu, pi).measure_of(G.table), G.measure()


def crit_gluing(scale=1.0):
    t0 = time.perf_counter()
    rng = rng_for(12)
    trials = max(1, int(1000 * scale))
    viol = 0
    for k in range(trials):
        m, n, kk = ((4, 3, 2), (6, 2, 3), (6, 2, 2), (8, 2, 4), (4, 2, 2))[k % 5]
        shape = Shape(m, n)
        F = random_code(rng, shape, float(rng.uniform(0.01, 0.6)))
        nu = ProductMeasure.uniform(m, n) if k % 2 else random_measure(rng, [m] * n, exact=True)
        pi = sample_gluing(m, kk, 1, rng, n=n)
        viol += glue_measure(nu, pi).measure_of(glue_code(F, pi).table) < nu.measure_of(F.table)
    ex = _example_n6()
    ex_ok = ex == (Fraction(496, 729), Fraction(496, 729), Fraction(22, 64))
    shape = Shape(4, 3)
    maps = _all_equal_fiber_maps(4, 2)
    gluings = [Gluing(ms, 2) for ms in itertools.product(maps, repeat=3)]
    fams = [(t, F) for t in (1, 2) for F in _t_intersecting_suite(shape, t, rng)]
    t_viol = sum(not t_intersection_preserved(F, pi, t) for t, F in fams for pi in gluings)
    ok = viol == 0 and ex_ok and t_viol == 0 and len(gluings) == 216
    return _result(12, "gluing", ok, t0, sampled=trials, monotonicity_violations=viol,
                   example_n6=list(ex), exhaustive_gluings=len(gluings), families=len(fams),
                   t_intersection_violations=t_viol)


# 13


def _greedy_free_family(rng, shape, H, stop):
    """Random H-free family: insert points in random order, rejecting those that create H."""
    chosen = []
    P = all_points(shape)
    for v in rng.permutation(len(P)):
        if len(chosen) >= stop:
            break
        trial = Code.from_indices(shape, chosen + [int(v)])
        if cf.is_H_free(trial, H):
            chosen.append(int(v))
    return Code.from_indices(shape, chosen)


def crit_configurations(scale=1.0):
    t0 = time.perf_counter()
    mism = 0
    shape = Shape(3, 2)
    for mask in range(512):
        F = Code.from_indices(shape, [i for i in range(9) if mask >> i & 1])
        for s in range(3):
            mism += is_s_avoiding(F, s) != cf.is_H_free(F, cf.pair_config(s))
    rng = rng_for(13)
    count = max(1, int(1000 * scale))
    for _ in range(count):
        F = random_code(rng, Shape(3, 3), float(rng.uniform(0.02, 0.5)))
        s = int(rng.integers(0, 4))
        mism += is_s_avoiding(F, s) != cf.is_H_free(F, cf.pair_config(s))
    sh_viol = 0
    shape = Shape(2, 3)
    for mask in range(256):
        F = Code.from_indices(shape, [i for i in range(8) if mask >> i & 1])
        for k in (1, 2):
            sh_viol += not cf.shearer_check(F, k)["satisfied"]
    configs = [cf.pair_config(0), cf.pair_config(1), cf.matching(2), cf.oplus(cf.matching(2), 1)]
    lower_viol = lower_checked = 0
    shapes = (Shape(3, 3), Shape(3, 4), Shape(2, 4))
    for k in range(count):
        H = configs[k % len(configs)]
        sh = shapes[k % len(shapes)]
        F = _greedy_free_family(rng, sh, H, int(rng.integers(1, sh.size + 1)))
        rep = cf.shadow_lower_check(F, H)
        if rep["skipped"]:
            continue
        lower_checked += 1
        lower_viol += not rep["satisfied"]
    sigma = {h: cf.crosscut(cf.matching(h))[0] for h in range(1, 5)}
    ok = (mism == 0 and sh_viol == 0 and lower_viol == 0 and lower_checked > 0
          and all(sigma[h] == h for h in sigma))
    return _result(13, "configurations", ok, t0, avoid_free_mismatches=mism, shearer_violations=sh_viol,
                   shadow_lower_checked=lower_checked, shadow_lower_violations=lower_viol,
                   crosscut_matching=sigma)


# 14


DETERMINISM_COMMANDS = [
    ["glue", "sample", "--m", "6", "--k", "3", "--n", "4"],
    ["glue", "sample", "--m", "8", "--k", "3", "--b", "2", "--n", "3"],
    ["chain", "gap", "--kind", "random", "--k", "5", "--alpha", "0.3"],
    ["chain", "correlate", "--in", "{F}", "--in2", "{G}", "--rho", "0.5", "--trials", "20000"],
    ["fairness", "--in", "{F}", "--s", "1", "--trials", "20000", "--delta", "1/10"],
    ["glue", "boost", "--in", "{B}", "--eps", "1/2", "--b", "4"],
]


def _run_cli(argv, env=None):
    cmd = [sys.executable, "-m", "anticode", *argv]
    return subprocess.run(cmd, capture_output=True, env=env, timeout=600)


def crit_determinism(scale=1.0, workdir=None):
    import tempfile

    from .codes import dumps as code_dumps

    t0 = time.perf_counter()
    tmp = workdir or tempfile.mkdtemp(prefix="anticode-det-")
    rng = rng_for(14)
    files = {
        "F": code_dumps(random_code(rng, Shape(3, 4), 0.4)),
        "G": code_dumps(random_code(rng, Shape(3, 4), 0.4)),
        "B": code_dumps(Code.from_predicate(Shape(9, 3), lambda P: (P[:, 0] == 0) & (P[:, 1] == 0))),
    }
    paths = {}
    for key, text in files.items():
        paths[key] = os.path.join(tmp, f"{key}.code")
        with open(paths[key], "w") as fh:
            fh.write(text)
    env = dict(os.environ)
    env.pop("ANTICODE_SEED", None)
    diffs = []
    results = []
    for argv in DETERMINISM_COMMANDS:
        argv = [a.format(**paths) for a in argv]
        outs = []
        for jobs in ("1", "4"):
            p = _run_cli([*argv, "--seed", "12345", "--jobs", jobs, "--format", "json"], env)
            outs.append((p.returncode, p.stdout))
        same = outs[0] == outs[1] and outs[0][0] in (0, 2, 3) and outs[0][1]
        results.append({"argv": argv[:2], "exit": outs[0][0], "identical": bool(same)})
        if not same:
            diffs.append(" ".join(argv))
    return _result(14, "determinism", not diffs, t0, commands=results, differing=diffs)


CRITERIA = [crit_balls, crit_extremal, crit_compression, crit_reduction, crit_efron_stein, crit_noise,
            crit_spectral, crit_hoffman, crit_hypercontract, crit_regularity_small,
            crit_regularity_large, crit_gluing, crit_configurations, crit_determinism]


def select(filter_: str | None = None):
    if not filter_:
        return list(CRITERIA)
    keys = [k.strip() for k in filter_.split(",") if k.strip()]
    out = []
    for fn in CRITERIA:
        name = fn.__name__[len("crit_"):]
        cid = str(CRITERIA.index(fn) + 1)
        if any(k == cid or k in name for k in keys):
            out.append(fn)
    return out


def run_acceptance(filter_: str | None = None, scale: float = 1.0):
    for fn in select(filter_):
        yield fn(scale)


SMOKE = [crit_balls, crit_compression, crit_efron_stein, crit_noise, crit_hoffman, crit_gluing,
         crit_configurations]


def run_smoke():
    for fn in SMOKE:
        yield fn(0.01)


def run_explore(m: int, nmax: int, t: int, budget: int):
    from .extremal import explore

    yield from explore(m, nmax, t, budget)
