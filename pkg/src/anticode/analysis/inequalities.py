"""Numeric checks of the spectral, noise and hypercontractive inequalities."""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .chains import MarkovChain, product_chain_apply
from .efron_stein import (efron_stein, laplacian_combinatorial, noise_apply,
                          noise_stability)
from .measure import ProductMeasure, marginalize
from .realfn import RealFn

SLACK = 1e-10


def gap_lower_bound_check(T: MarkovChain, alpha: float) -> bool:
    """Whether the floor hypothesis T_ab >= alpha nu(b) holds."""
    return T.gap_floor_holds(alpha)


def gap_lemma_report(T: MarkovChain, alpha: float) -> dict:
    hyp = T.gap_floor_holds(alpha)
    gap = T.abs_spectral_gap()
    return {"hypothesis": hyp, "gap": gap, "alpha": alpha,
            "satisfied": (not hyp) or gap >= alpha - SLACK}


def restriction_commutes_check(f: RealFn, S: Sequence[int], T: Sequence[int], x: Sequence[int],
                               tol: float = SLACK, literal: bool = False) -> bool:
    """(f^{=T})_{S -> x} == ((L_S f)_{S -> x})^{=T minus S} for S inside T.

    Restricting a piece f^{=U} with U containing S leaves a pure piece of
    degree U minus S, which is what makes the identity hold.  With
    ``literal=True`` the right side uses f_{S -> x} itself; that version
    only holds in special cases (S empty, for one) and is kept for
    comparison.
    """
    S, T = tuple(sorted(S)), tuple(sorted(T))
    if not set(S) <= set(T):
        raise ValueError("S must be a subset of T")
    lhs = efron_stein(f, max_degree=None)[T].restrict(S, x)
    rest = [i for i in range(f.n) if i not in S]
    pos = {c: k for k, c in enumerate(rest)}
    base = f if literal else laplacian_combinatorial(f, S)
    g = base.restrict(S, x)
    rhs = efron_stein(g, max_degree=None)[tuple(pos[i] for i in T if i not in S)]
    return lhs.allclose(rhs, tol)


def changenoise_check(f: RealFn, rho: float, d: int, slack: float = 1e-12) -> bool:
    t = 2 ** d
    lhs = noise_stability(f, rho)
    low = max(noise_stability(f, rho ** t), 0.0)
    rhs = f.norm_sq() ** (1 - 1 / t) * low ** (1 / t)
    return lhs <= rhs + slack


def _check_measure(f: RealFn, chains: Sequence[MarkovChain], tol=1e-9):
    if tuple(c.size for c in chains) != f.measure.radices:
        raise ValueError("chains do not match the function's space")
    for i, c in enumerate(chains):
        if np.max(np.abs(c.stationary() - f.measure.array(i))) > tol:
            raise ValueError(f"chain {i} is not stationary for the function's measure")


def contraction_check(f: RealFn, S: Sequence[int], chains: Sequence[MarkovChain]) -> bool:
    """||U f^{=S}|| <= ||f^{=S}|| prod_{i in S} (1 - gap_i)."""
    _check_measure(f, chains)
    piece = efron_stein(f, max_degree=None)[tuple(S)]
    lhs = product_chain_apply(piece, chains).norm()
    factor = math.prod(1.0 - chains[i].abs_spectral_gap() for i in S)
    return lhs <= piece.norm() * factor + SLACK


def op_to_stab_check(f: RealFn, chains: Sequence[MarkovChain], lam: float) -> dict:
    _check_measure(f, chains)
    gaps = [c.abs_spectral_gap() for c in chains]
    if min(gaps, default=1.0) < lam - SLACK:
        return {"hypothesis": False, "gaps": gaps, "skipped": True, "satisfied": None}
    lhs = f.inner(product_chain_apply(f, chains))
    rhs = noise_stability(f, 1.0 - lam)
    return {"hypothesis": True, "gaps": gaps, "skipped": False, "lhs": lhs, "rhs": rhs,
            "satisfied": lhs <= rhs + SLACK}


def hoffman_bound(alpha1, alpha2, lam):
    return (lam / (1 - lam)) ** 2 * (1 - alpha1) * (1 - alpha2)


def hoffman_check(G1, G2, nu: ProductMeasure, lam) -> dict:
    """Spectral bound on the product of measures of cross-intersecting codes.

    Exact when nu has rational weights and lam is rational.
    """
    from ..codes import is_cross_t_intersecting

    if nu.exact and not isinstance(lam, (int, Fraction)):
        lam = Fraction(lam).limit_denominator(10 ** 12)
    if lam > Fraction(1, 2) or nu.max_weight() > lam:
        raise ValueError("need nu_i(x) <= lam <= 1/2")
    a1, a2 = nu.measure_of(G1.table), nu.measure_of(G2.table)
    cross = len(G1) == 0 or len(G2) == 0 or is_cross_t_intersecting(G1, G2, 1)
    bound = hoffman_bound(a1, a2, lam)
    ok = a1 * a2 <= bound if nu.exact else a1 * a2 <= bound + SLACK
    return {"alpha1": a1, "alpha2": a2, "bound": bound, "lambda": lam,
            "cross_intersecting": bool(cross), "satisfied": bool(ok),
            "equality": bool(a1 * a2 == bound)}


def laplacian_restricted_moments(f: RealFn, S: Sequence[int]) -> np.ndarray:
    """Table over y in Omega_S of ||(L_S f)_{S -> y}||_2^2."""
    L = laplacian_combinatorial(f, S).values
    return marginalize(L * L, f.measure, S)


def hypercontract_check(f: RealFn, rho: float) -> dict:
    """||T_rho f||_4^4 against sum_S E_y ||(L_S f)_{S -> y}||_2^4."""
    lhs = f.expect(noise_apply(f, rho).values ** 4)
    rhs = 0.0
    for k in range(f.n + 1):
        for S in combinations(range(f.n), k):
            sq = laplacian_restricted_moments(f, S)
            sub = f.measure.keep(S)
            rhs += float(marginalize(sq ** 2, sub, ()))
    return {"lhs": lhs, "rhs": rhs, "rho": rho, "guaranteed": rho <= 1 / 160,
            "satisfied": lhs <= rhs + SLACK}


def global_laplacian_bound_check(f: RealFn, T: Sequence[int], y: Sequence[int], r: int,
                                 eps: float) -> dict:
    from ..pseudorandom import is_global

    T = tuple(sorted(T))
    if len(T) > r:
        return {"skipped": True, "reason": "|T| > r", "satisfied": None}
    rep = is_global(f, r, eps)
    if rep.verdict != "holds":
        return {"skipped": True, "reason": f"globalness {rep.verdict}", "satisfied": None}
    L = laplacian_combinatorial(f, T).restrict(T, y)
    lhs = L.norm()
    rhs = 2 ** len(T) * math.sqrt(eps)
    return {"skipped": False, "lhs": lhs, "rhs": rhs, "satisfied": lhs <= rhs + SLACK}


def global_stab_check(F, rho: float, c: float, mu=None) -> dict:
    """Reporter comparing Stab_rho(1_F) against mu^{1+c} for global F."""
    from ..pseudorandom import is_global

    muF = F.measure()
    mu = muF if mu is None else mu
    out = {"rho": rho, "c": c, "mu": float(mu), "measure": float(muF)}
    if len(F) == 0:
        out.update(hypothesis="vacuous", stab=0.0, target=float(mu) ** (1 + c), within=True)
        return out
    if not 0 < mu < 1 / 16:
        out.update(hypothesis="fails", reason="mu outside (0, 1/16)")
        return out
    r = min(F.n, math.ceil(math.log2(1 / float(mu))))
    rep = is_global(F, r, float(mu) ** (1 - c))
    if rep.verdict != "holds":
        out.update(hypothesis="fails" if rep.verdict == "fails" else "unknown",
                   reason=f"not ({r}, mu^(1-c))-global", r=r)
        return out
    stab = noise_stability(RealFn.indicator(F), rho)
    target = float(mu) ** (1 + c)
    out.update(hypothesis="holds", r=r, stab=stab, target=target, within=stab <= target)
    return out
