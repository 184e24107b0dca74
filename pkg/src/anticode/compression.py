"""Compression towards symbol 1 and the reduction to the biased hypercube.

Symbol 1 is index 0 internally.  T_{i,j} moves members with x_i = j to
x_i = 1 whenever the image is not already present.
"""
from __future__ import annotations

import warnings
from fractions import Fraction
from typing import Sequence

import numpy as np

from .analysis.measure import ProductMeasure
from .codes import Code, Shape, cross_agreements, is_cross_t_intersecting


def compress_point(x: Sequence[int], i: int, j: int) -> tuple[int, ...]:
    x = tuple(x)
    if j == 0 or x[i] != j:
        return x
    return x[:i] + (0,) + x[i + 1:]


def _check_ij(F: Code, i: int, j: int):
    if not (0 <= i < F.n and 0 <= j < F.m):
        raise ValueError(f"invalid compression indices i={i} j={j}")


def _compress_table(t: np.ndarray, i: int, j: int) -> np.ndarray:
    t = t.copy()
    lo = [slice(None)] * t.ndim
    hi = [slice(None)] * t.ndim
    lo[i], hi[i] = 0, j
    lo, hi = tuple(lo), tuple(hi)
    s0, sj = t[lo].copy(), t[hi].copy()
    t[lo] = s0 | sj
    t[hi] = s0 & sj
    return t


def compress_family(F: Code, i: int, j: int) -> Code:
    """T_{i,j}(F) = {x in F : T(x) in F} u {T(x) : x in F}."""
    _check_ij(F, i, j)
    if j == 0:
        return F
    return Code(F.shape, _compress_table(F.table, i, j))


def compress_coord(F: Code, i: int) -> Code:
    """T_i = T_{i,2} o ... o T_{i,m}, so T_{i,m} acts first."""
    t = F.table
    for j in range(F.m - 1, 0, -1):
        t = _compress_table(t, i, j)
    return Code(F.shape, t)


def compress_full(F: Code) -> Code:
    """T = T_1 o ... o T_n, so T_n acts first."""
    t = F.table
    for i in range(F.n - 1, -1, -1):
        for j in range(F.m - 1, 0, -1):
            t = _compress_table(t, i, j)
    return Code(F.shape, t)


def is_compressed(F: Code) -> bool:
    """Fixed by every T_{i,j}, i.e. F_{i->j} is contained in F_{i->1} for all i, j."""
    for i in range(F.n):
        base = np.take(F.table, 0, axis=i)
        for j in range(1, F.m):
            if np.any(np.take(F.table, j, axis=i) & ~base):
                return False
    return True


def cross_t_intersecting(F: Code, G: Code, t: int) -> bool:
    return is_cross_t_intersecting(F, G, t)


def preserved_under_compression_check(F: Code, G: Code, t: int, i: int, j: int) -> bool:
    """False only if F, G are cross t-intersecting but their compressions are not."""
    if not cross_t_intersecting(F, G, t):
        return True
    return cross_t_intersecting(compress_family(F, i, j), compress_family(G, i, j), t)


# binary families


class BinaryFamily:
    """A family in {0,1}^n; table index 1 is the bit 1 (the image of symbol 1)."""

    def __init__(self, code: Code):
        if code.m != 2:
            raise ValueError("binary families need m = 2")
        self.code = code

    @classmethod
    def from_predicate(cls, n: int, pred) -> "BinaryFamily":
        return cls(Code.from_predicate(Shape(2, n), pred))

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def table(self) -> np.ndarray:
        return self.code.table

    def __len__(self):
        return len(self.code)

    def __eq__(self, other):
        return isinstance(other, BinaryFamily) and self.code == other.code

    def __repr__(self):
        return f"BinaryFamily(n={self.n}, size={len(self)})"

    def is_monotone(self) -> bool:
        t = self.table
        for i in range(self.n):
            if np.any(np.take(t, 0, axis=i) & ~np.take(t, 1, axis=i)):
                return False
        return True

    def uniform(self) -> Fraction:
        return self.code.measure()


def reduce(F: Code) -> BinaryFamily:
    """Image of F under h^{(x)n} with h(1) = 1 and h(a) = 0 otherwise."""
    if not is_compressed(F):
        warnings.warn("reducing a code that is not compressed", stacklevel=2)
    t = F.table
    for i in range(F.n):
        one = np.take(t, [0], axis=i)
        rest = np.take(t, list(range(1, F.m)), axis=i).any(axis=i, keepdims=True)
        t = np.concatenate([rest, one], axis=i)
    return BinaryFamily(Code(Shape(2, F.n), t))


def mu_p(A: BinaryFamily, p) -> Fraction | float:
    """sum over members of p^{#ones} (1-p)^{#zeros}; exact for rational p."""
    if isinstance(p, (int, Fraction)):
        p = Fraction(p)
        if not 0 <= p <= 1:
            raise ValueError("p outside [0, 1]")
        nu = ProductMeasure([[1 - p, p]] * A.n)
    else:
        if not 0.0 <= p <= 1.0:
            raise ValueError("p outside [0, 1]")
        nu = ProductMeasure([[1.0 - p, float(p)]] * A.n)
    return nu.measure_of(A.table)


def _flip(t: np.ndarray) -> np.ndarray:
    return t[(slice(None, None, -1),) * t.ndim]


def cross_agreeing_binary(A: BinaryFamily, B: BinaryFamily) -> bool:
    """Every x in A, y in B agree somewhere, i.e. B holds no complement of a member of A."""
    return not bool(np.any(A.table & _flip(B.table)))


def cross_intersecting_binary(A: BinaryFamily, B: BinaryFamily) -> bool:
    """Every x in A, y in B share a coordinate equal to 1."""
    pa, pb = A.code.points(), B.code.points()
    if len(pa) == 0 or len(pb) == 0:
        return True
    return bool(np.all((pa @ pb.T) >= 1))


def measure_sum_check(A: BinaryFamily, B: BinaryFamily) -> bool:
    """Cross-agreeing families have uniform measures summing to at most 1."""
    if not cross_agreeing_binary(A, B):
        return True
    return A.uniform() + B.uniform() <= 1


def isoperimetric_bump_check(A: BinaryFamily, p, q, alpha) -> dict:
    """mu_p(A) >= p^alpha should give mu_q(A) >= q^alpha for monotone A and p <= q."""
    if not A.is_monotone():
        return {"skipped": True, "reason": "not monotone", "satisfied": None}
    if p > q:
        return {"skipped": True, "reason": "p > q", "satisfied": None}
    mp, mq = mu_p(A, p), mu_p(A, q)
    exact = all(isinstance(v, (int, Fraction)) for v in (p, q, alpha))
    if exact and Fraction(alpha).denominator == 1:
        a = int(alpha)
        lo_p, lo_q = Fraction(p) ** a, Fraction(q) ** a
        if mp < lo_p:
            return {"skipped": True, "reason": "mu_p below p^alpha", "satisfied": None}
        return {"skipped": False, "mu_p": mp, "mu_q": mq, "q_alpha": lo_q, "satisfied": mq >= lo_q}
    lo_p, lo_q = float(p) ** float(alpha), float(q) ** float(alpha)
    if float(mp) < lo_p * (1 - 1e-12):
        return {"skipped": True, "reason": "mu_p below p^alpha", "satisfied": None}
    return {"skipped": False, "mu_p": mp, "mu_q": mq, "q_alpha": lo_q,
            "satisfied": float(mq) >= lo_q * (1 - 1e-12)}


def find_disagreeing_pair(G: Code, H: Code):
    """Some x in G, y in H with agr(x, y) = 0, or None."""
    if len(G) == 0 or len(H) == 0:
        return None
    A = cross_agreements(G, H)
    hit = np.argwhere(A == 0)
    if len(hit) == 0:
        return None
    a, b = hit[0]
    return tuple(int(v) for v in G.points()[a]), tuple(int(v) for v in H.points()[b])


def boot_pipeline(G: Code, H: Code) -> dict:
    """Compress, reduce and compare biased and uniform measures of two codes."""
    G._check(H)
    m = G.m
    Gc, Hc = compress_full(G), compress_full(H)
    Gr, Hr = reduce(Gc), reduce(Hc)
    p = Fraction(1, m)
    half = Fraction(1, 2)
    report = {
        "mu_G": G.measure(), "mu_H": H.measure(),
        "mu_p_G": mu_p(Gr, p), "mu_p_H": mu_p(Hr, p),
        "mu_half_G": mu_p(Gr, half), "mu_half_H": mu_p(Hr, half),
    }
    report["half_sum"] = report["mu_half_G"] + report["mu_half_H"]
    report["contradiction"] = report["half_sum"] > 1
    report["reduced_cross_agreeing"] = cross_agreeing_binary(Gr, Hr)
    report["witness"] = find_disagreeing_pair(G, H)
    report["consistent"] = (not report["contradiction"]) or report["witness"] is not None
    return report
