"""Partite configurations and their realisations inside codes.

A configuration has parts U_1..U_l of given sizes and a multiset of edges,
each edge choosing one vertex (0-based index) in every part.  Points
x^1..x^h realise it when there is an injection phi from parts to
coordinates such that x^j and x^j' agree exactly on the coordinates phi(k)
where edges j and j' share their part-k vertex.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .codes import Code, Shape

NODE_BUDGET = 10 ** 8


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Configuration:
    parts: tuple[int, ...]
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for e in self.edges:
            if len(e) != len(self.parts):
                raise ValueError("every edge needs one vertex per part")
            if any(not 0 <= v < s for v, s in zip(e, self.parts)):
                raise ValueError(f"edge {e} leaves its parts")

    @property
    def ell(self) -> int:
        return len(self.parts)

    @property
    def h(self) -> int:
        return len(self.edges)

    def __len__(self):
        return len(self.edges)

    def multiplicity(self) -> Counter:
        return Counter(self.edges)

    def to_json(self):
        return {"parts": list(self.parts), "edges": [[v + 1 for v in e] for e in self.edges]}


# constructors


def pair_config(s: int) -> Configuration:
    """Two identical edges on s singleton parts: realised by pairs agreeing in exactly s places."""
    return Configuration((1,) * s, ((0,) * s, (0,) * s))


def matching(h: int) -> Configuration:
    """h pairwise disjoint edges (one part of size h)."""
    return Configuration((h,), tuple((j,) for j in range(h)))


def oplus(H: Configuration, t: int) -> Configuration:
    """Add t singleton parts contained in every edge."""
    return Configuration(H.parts + (1,) * t, tuple(e + (0,) * t for e in H.edges))


def flatten(H: Configuration) -> Configuration:
    """Give every vertex its own part and pad each edge with fresh vertices."""
    verts = [(k, v) for k, s in enumerate(H.parts) for v in range(s)]
    sizes = [1] * len(verts)
    edges = []
    for e in H.edges:
        row = []
        for p, (k, v) in enumerate(verts):
            if e[k] == v:
                row.append(0)
            else:
                row.append(sizes[p])
                sizes[p] += 1
        edges.append(tuple(row))
    return Configuration(tuple(sizes), tuple(edges))


# structure


def kernel(H: Configuration) -> set[tuple[int, int]]:
    if not H.edges:
        return set()
    return {(k, v) for k, v in enumerate(H.edges[0]) if all(e[k] == v for e in H.edges)}


def centre(H: Configuration) -> set[tuple[int, int]]:
    c = Counter((k, v) for e in H.edges for k, v in enumerate(e))
    return {x for x, cnt in c.items() if cnt > 1}


def is_flat(H: Configuration) -> bool:
    per = Counter(k for k, _ in centre(H))
    return all(cnt <= 1 for cnt in per.values())


def density(H: Configuration) -> Fraction:
    return Fraction(H.h, math.prod(H.parts))


# realisations


@dataclass(frozen=True)
class Realisation:
    phi: tuple[int, ...]
    points: tuple[tuple[int, ...], ...]

    def to_json(self):
        return {"phi": [i + 1 for i in self.phi], "points": [[a + 1 for a in p] for p in self.points]}


def _part_pattern(H: Configuration, k: int) -> tuple[int, ...]:
    """Canonical block labels of the edges at part k."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(e[k], len(seen)) for e in H.edges)


def _pattern_assignments(H: Configuration, n: int):
    """All distinct maps coordinate -> edge partition, up to interchangeable parts.

    Parts whose edges all differ behave like unused coordinates, so only
    the other parts need placing.  Yields (per-coordinate pattern, phi).
    """
    h = H.h
    discrete = tuple(range(h))
    pats = [_part_pattern(H, k) for k in range(H.ell)]
    active = [k for k in range(H.ell) if pats[k] != discrete]
    if H.ell > n:
        return
    seen = set()
    for coords in itertools.permutations(range(n), len(active)):
        layout = [discrete] * n
        for k, i in zip(active, coords):
            layout[i] = pats[k]
        key = tuple(layout)
        if key in seen:
            continue
        seen.add(key)
        phi = [None] * H.ell
        for k, i in zip(active, coords):
            phi[k] = i
        free = [i for i in range(n) if i not in set(coords)]
        for k in range(H.ell):
            if phi[k] is None:
                phi[k] = free.pop(0)
        yield key, tuple(phi)


def _same_masks(layout, h: int) -> np.ndarray:
    """same[j, j2, i] <=> points j and j2 must agree at coordinate i."""
    n = len(layout)
    same = np.zeros((h, h, n), dtype=bool)
    for i, pat in enumerate(layout):
        for j in range(h):
            for j2 in range(h):
                same[j, j2, i] = pat[j] == pat[j2]
    return same


def find_cross(families: Sequence[Code], H: Configuration, budget: int = NODE_BUDGET):
    """Points x^j in families[j] realising H, or None when none exist.

    Raises BudgetExceeded if the search visits more than ``budget`` nodes.
    """
    h = H.h
    if len(families) != h:
        raise ValueError("need one family per edge")
    if h == 0:
        return Realisation(tuple(range(H.ell)), ())
    shape = families[0].shape
    for F in families:
        if F.shape != shape:
            raise ValueError("families must share a shape")
    n = shape.n
    P = [F.points() for F in families]
    if any(len(p) == 0 for p in P):
        return None
    nodes = 0
    for layout, phi in _pattern_assignments(H, n):
        same = _same_masks(layout, h)
        # every coordinate needs as many symbols as the pattern has blocks
        if any(max(pat) + 1 > shape.m for pat in layout):
            continue
        if any(same[j, j2].all() for j in range(h) for j2 in range(j)):
            continue  # the points would coincide
        chosen: list[np.ndarray] = []

        def rec(j):
            nonlocal nodes
            if j == h:
                return True
            ok = np.ones(len(P[j]), dtype=bool)
            for j2, x in enumerate(chosen):
                ok &= np.all((P[j] == x) == same[j, j2], axis=1)
            for idx in np.flatnonzero(ok):
                nodes += 1
                if nodes > budget:
                    raise BudgetExceeded(f"realisation search passed {budget} nodes")
                chosen.append(P[j][idx])
                if rec(j + 1):
                    return True
                chosen.pop()
            return False

        if rec(0):
            return Realisation(phi, tuple(tuple(int(a) for a in x) for x in chosen))
    return None


def find_realisation(F: Code, H: Configuration, budget: int = NODE_BUDGET):
    return find_cross([F] * H.h, H, budget)


def is_H_free(F: Code, H: Configuration, budget: int = NODE_BUDGET) -> bool:
    return find_realisation(F, H, budget) is None


def verify_realisation(families: Sequence[Code], H: Configuration, R: Realisation) -> bool:
    """Independent check of the agreement pattern of a realisation."""
    if len(R.points) != H.h or len(R.phi) != H.ell or len(set(R.phi)) != H.ell:
        return False
    pts = R.points
    if any(tuple(p) not in F for p, F in zip(pts, families)):
        return False
    for j in range(H.h):
        for j2 in range(j + 1, H.h):
            agree = {i for i in range(len(pts[j])) if pts[j][i] == pts[j2][i]}
            want = {R.phi[k] for k in range(H.ell) if H.edges[j][k] == H.edges[j2][k]}
            if agree != want:
                return False
    return True


# shadows and projections


def shadow(F: Code, i: int) -> Code:
    """Union over a of F_{i->a}, a code on the other n-1 coordinates."""
    return Code(Shape(F.m, F.n - 1), F.table.any(axis=i))


def shadow_set(F: Code, I: Sequence[int]) -> Code:
    I = tuple(sorted(set(I)))
    t = F.table.any(axis=I) if I else F.table
    return Code(Shape(F.m, F.n - len(I)), t)


def projection(F: Code, S: Sequence[int]) -> Code:
    """Coordinate projection onto S (the shadow on every other coordinate)."""
    S = set(S)
    return shadow_set(F, [i for i in range(F.n) if i not in S])


def shadow_lower_check(F: Code, H: Configuration, budget: int = NODE_BUDGET) -> dict:
    """|F| <= h sum_i |shadow_i(F)| for flat H and H-free F with n >= h l."""
    if not is_flat(H):
        return {"skipped": True, "reason": "H not flat", "satisfied": None}
    if F.n < H.h * H.ell:
        return {"skipped": True, "reason": "n < h l", "satisfied": None}
    if not is_H_free(F, H, budget):
        return {"skipped": True, "reason": "F contains H", "satisfied": None}
    lhs = len(F)
    rhs = H.h * sum(len(shadow(F, i)) for i in range(F.n))
    return {"skipped": False, "lhs": lhs, "rhs": rhs, "satisfied": lhs <= rhs}


def shadow_uncap_transfer(F: Code, H: Configuration, r: int, eps, budget: int = NODE_BUDGET) -> dict:
    """Find i with shadow_i(F) (r/n, eps m / n h)-uncapturable."""
    from .pseudorandom import is_uncapturable
    from .reports import as_fraction

    eps = as_fraction(eps)
    if not is_flat(H):
        return {"skipped": True, "reason": "H not flat"}
    if F.n < H.h * H.ell:
        return {"skipped": True, "reason": "n < h l"}
    base = is_uncapturable(F, r, eps)
    if base.verdict != "holds":
        return {"skipped": True, "reason": f"F uncapturability {base.verdict}"}
    if not is_H_free(F, H, budget):
        return {"skipped": True, "reason": "F contains H"}
    r2 = r // F.n
    eps2 = eps * F.m / (F.n * H.h)
    verdicts = []
    for i in range(F.n):
        rep = is_uncapturable(shadow(F, i), r2, eps2)
        verdicts.append(rep.verdict)
        if rep.verdict == "holds":
            return {"skipped": False, "coordinate": i + 1, "r": r2, "eps": eps2,
                    "verdicts": verdicts, "violated": False}
    unknown = "unknown" in verdicts
    return {"skipped": False, "coordinate": None, "r": r2, "eps": eps2, "verdicts": verdicts,
            "violated": not unknown, "flagged": unknown}


def shearer_check(F: Code, k: int) -> dict:
    """|F|^{C(n-1,k-1)} <= prod over |S| = k of |Pi_S(F)|, in exact integers."""
    if not 1 <= k <= F.n:
        raise ValueError("need 1 <= k <= n")
    lhs = len(F) ** math.comb(F.n - 1, k - 1)
    rhs = 1
    for S in itertools.combinations(range(F.n), k):
        rhs *= len(projection(F, S))
    return {"k": k, "lhs": lhs, "rhs": rhs, "satisfied": lhs <= rhs, "equality": lhs == rhs}


# crosscuts and cross matchings


def crosscut(H: Configuration, budget: int = NODE_BUDGET):
    """Fewest vertices such that every edge contains exactly one of them.

    Each chosen vertex (k, v) stands for the dictator at part k, value v.
    Returns (size, vertices) or None when no such set exists.
    """
    if H.h == 0:
        return 0, []
    cover: dict[tuple[int, int], int] = {}
    for j, e in enumerate(H.edges):
        for k, v in enumerate(e):
            cover[(k, v)] = cover.get((k, v), 0) | (1 << j)
    full = (1 << H.h) - 1
    best: list = [None, None]
    nodes = 0

    def rec(covered, chosen):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded("crosscut search budget exceeded")
        if covered == full:
            if best[0] is None or len(chosen) < best[0]:
                best[0], best[1] = len(chosen), list(chosen)
            return
        if best[0] is not None and len(chosen) + 1 >= best[0]:
            return
        # branch on the lowest uncovered edge
        j = (~covered & full & -(~covered & full)).bit_length() - 1
        for k, v in enumerate(H.edges[j]):
            mask = cover[(k, v)]
            if mask & covered:
                continue
            chosen.append((k, v))
            rec(covered | mask, chosen)
            chosen.pop()

    rec(0, [])
    if best[0] is None:
        return None
    return best[0], best[1]


def greedy_cross_matching(families: Sequence[Code]):
    """Pick x^j in F_j one at a time, each disagreeing everywhere with the earlier ones."""
    chosen = []
    for F in families:
        P = F.points()
        ok = np.ones(len(P), dtype=bool)
        for x in chosen:
            ok &= np.all(P != x, axis=1)
        hit = np.flatnonzero(ok)
        if len(hit) == 0:
            return None
        chosen.append(tuple(int(a) for a in P[hit[0]]))
    return chosen


def cross_matching(families: Sequence[Code], nu=None, b=1, budget: int = NODE_BUDGET) -> dict:
    """Pairwise agreement-0 points x^j in F_j, plus the spectral existence bound."""
    from .analysis.measure import ProductMeasure
    from .reports import as_fraction

    h = len(families)
    shape = families[0].shape
    m = shape.m
    nu = ProductMeasure.uniform(m, shape.n) if nu is None else nu
    b = as_fraction(b)
    witness = greedy_cross_matching(families)
    method = "greedy"
    if witness is None:
        method = "exhaustive"
        try:
            R = find_cross(list(families), matching(h), budget)
            witness = list(R.points) if R is not None else None
        except BudgetExceeded:
            method = "budget"
    measures = [nu.measure_of(F.table) for F in families]
    hyp = m > h * b and nu.is_balanced(b)
    out = {"witness": witness, "method": method, "measures": measures, "hypothesis": hyp}
    if hyp:
        prod = math.prod(measures) if measures else 1
        bound = Fraction(2) ** h * b / (m - h * b)
        if not isinstance(prod, Fraction):
            bound = float(bound)
        out.update(product=prod, bound=bound, triggered=prod > bound)
        out["anomaly"] = bool(out["triggered"] and witness is None)
    else:
        out.update(triggered=False, anomaly=False)
    return out


# text format


def dumps(H: Configuration) -> str:
    head = "config v1 parts=" + ",".join(str(s) for s in H.parts)
    lines = [" ".join(str(v + 1) for v in e) if e else "-" for e in H.edges]
    return "\n".join([head, *lines]) + "\n"


def loads(text: str) -> Configuration:
    lines = text.splitlines()
    parts = lines[0].split()
    if parts[:2] != ["config", "v1"]:
        raise ValueError("not a config v1 file")
    hdr = dict(p.split("=", 1) for p in parts[2:])
    sizes = tuple(int(s) for s in hdr.get("parts", "").split(",") if s)
    edges = []
    for ln in lines[1:]:
        ln = ln.strip()
        if not ln:
            continue
        edges.append(() if ln == "-" else tuple(int(v) - 1 for v in ln.split()))
    return Configuration(sizes, tuple(edges))
