"""Exact extremal sizes of avoiding and intersecting codes by clique search.

Members of a family are the vertices of a clique in the compatibility graph
on [m]^n: x ~ y when the pair may coexist.  Branch and bound uses greedy
colouring bounds over Python-int bitsets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .codes import (Code, Shape, agreement_matrix, all_points, ball, BallSpec, best_ball,
                    is_isomorphic_small, is_s_avoiding, is_t_intersecting, maximizing_radii)

VERTEX_CAP = 2 ** 13
NODE_BUDGET = 10 ** 7

EXACT, LOWER, UNKNOWN = "exact", "lower-bound", "unknown"


@dataclass
class ExtremalResult:
    kind: str
    m: int
    n: int
    t: int
    size: int
    witness: Code
    optimality: str
    nodes: int = 0
    notes: list = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.optimality == EXACT

    def to_json(self):
        return {"kind": self.kind, "m": self.m, "n": self.n, "t": self.t, "size": self.size,
                "optimality": self.optimality, "nodes": self.nodes,
                "witness": [[int(a) + 1 for a in p] for p in self.witness.points()],
                "notes": self.notes}


def compatibility(shape: Shape, kind: str, t: int) -> np.ndarray:
    """Boolean adjacency: pairs of distinct points allowed together."""
    P = all_points(shape)
    A = agreement_matrix(P, P)
    if kind == "avoid":
        ok = A != t - 1
    elif kind == "intersect":
        ok = A >= t
    else:
        raise ValueError(f"unknown kind {kind!r}")
    np.fill_diagonal(ok, False)
    return ok


def _bitsets(adj: np.ndarray, order) -> list[int]:
    """Adjacency rows as ints, with bit k standing for vertex order[k]."""
    order = np.asarray(order, dtype=np.int64)
    sub = adj[np.ix_(order, order)]
    rows = []
    for k in range(len(order)):
        bits = 0
        for u in np.flatnonzero(sub[k]):
            bits |= 1 << int(u)
        rows.append(bits)
    return rows


def _colour_bound(P: int, nb: list[int]):
    """Greedy colouring of P; returns vertices with their colour numbers, ascending."""
    out = []
    colour = 0
    while P:
        colour += 1
        Q = P
        while Q:
            low = Q & -Q
            v = low.bit_length() - 1
            P &= ~low
            Q &= ~low & ~nb[v]
            out.append((v, colour))
    return out


def max_clique(nb: list[int], cand: int, lower: int = 0, budget: int = NODE_BUDGET):
    """Largest clique inside ``cand``.  Returns (vertex list, completed?, nodes)."""
    best: list[int] = []
    best_size = [lower]
    nodes = [0]
    done = [True]

    def expand(P: int, cur: list[int]):
        for v, c in reversed(_colour_bound(P, nb)):
            if len(cur) + c <= best_size[0]:
                return
            nodes[0] += 1
            if nodes[0] > budget:
                done[0] = False
                return
            cur.append(v)
            Q = P & nb[v]
            if Q:
                expand(Q, cur)
            elif len(cur) > best_size[0]:
                best_size[0] = len(cur)
                best[:] = cur
            cur.pop()
            if not done[0]:
                return
            P &= ~(1 << v)

    expand(cand, [])
    return best, done[0], nodes[0]


def _search(m: int, n: int, t: int, kind: str, budget: int, vertex_cap: int) -> ExtremalResult:
    shape = Shape(m, n)
    if not 0 <= t <= n:
        raise ValueError("need 0 <= t <= n")
    start = _ball_floor(shape, t)
    notes = []
    if shape.size > vertex_cap:
        notes.append(f"m^n = {shape.size} above vertex cap {vertex_cap}; ball returned")
        return ExtremalResult(kind, m, n, t, len(start), start, UNKNOWN, 0, notes)
    adj = compatibility(shape, kind, t)
    # vertex 0 (the all-1 point) can be assumed in the family up to symbol relabelling
    deg = adj.sum(axis=1)
    nbrs = np.flatnonzero(adj[0])
    order = sorted(nbrs.tolist(), key=lambda v: (-int(deg[v]), v))
    nb = _bitsets(adj, order)
    cand = (1 << len(order)) - 1
    lower = len(start) - 1
    clique, done, nodes = max_clique(nb, cand, lower=lower, budget=budget)
    if clique:
        members = [0] + [order[k] for k in clique]
        W = Code.from_indices(shape, members)
    else:
        W = start
    W = _canonical(W, start)
    opt = EXACT if done else LOWER
    if not done:
        notes.append(f"node budget {budget} exhausted")
    res = ExtremalResult(kind, m, n, t, len(W), W, opt, nodes, notes)
    _verify(res)
    return res


def _ball_floor(shape: Shape, t: int) -> Code:
    if t == 0:
        return Code.full(shape)
    return best_ball(shape, t)[2]


def _canonical(W: Code, ball_code: Code) -> Code:
    # prefer the ball itself whenever it is already optimal
    return ball_code if len(ball_code) >= len(W) else W


def _verify(res: ExtremalResult):
    W = res.witness
    ok = is_s_avoiding(W, res.t - 1) if res.kind == "avoid" else is_t_intersecting(W, res.t)
    if not ok:
        raise AssertionError(f"{res.kind} witness fails its predicate")


def max_avoiding(m: int, n: int, t: int, budget: int = NODE_BUDGET,
                 vertex_cap: int = VERTEX_CAP) -> ExtremalResult:
    """Largest (t-1)-avoiding code in [m]^n."""
    if t < 1:
        raise ValueError("need t >= 1")
    return _search(m, n, t, "avoid", budget, vertex_cap)


def max_intersecting(m: int, n: int, t: int, budget: int = NODE_BUDGET,
                     vertex_cap: int = VERTEX_CAP) -> ExtremalResult:
    """Largest t-intersecting code in [m]^n."""
    return _search(m, n, t, "intersect", budget, vertex_cap)


def naive_max(m: int, n: int, t: int, kind: str) -> int:
    """Maximum independent set of the conflict graph by memoised branching.

    Independent of the clique search: no colouring, no symmetry fixing,
    only component splitting and the degree <= 1 rule.
    Meant for m^n <= 64.
    """
    shape = Shape(m, n)
    ok = compatibility(shape, kind, t)
    N = shape.size
    conflict = [0] * N
    for v in range(N):
        for u in np.flatnonzero(~ok[v]):
            if u != v:
                conflict[v] |= 1 << int(u)

    def component(S: int) -> int:
        low = S & -S
        comp, frontier = low, low
        while frontier:
            nxt = 0
            while frontier:
                b = frontier & -frontier
                frontier &= ~b
                nxt |= conflict[b.bit_length() - 1]
            nxt &= S & ~comp
            comp |= nxt
            frontier = nxt
        return comp

    @lru_cache(maxsize=None)
    def mis(S: int) -> int:
        if S == 0:
            return 0
        comp = component(S)
        if comp != S:
            return mis(comp) + mis(S & ~comp)
        verts = []
        Q = S
        while Q:
            b = Q & -Q
            Q &= ~b
            v = b.bit_length() - 1
            verts.append((bin(conflict[v] & S).count("1"), v))
        d, v = min(verts)
        if d <= 1:
            return 1 + mis(S & ~(1 << v) & ~conflict[v])
        d, v = max(verts)
        return max(mis(S & ~(1 << v)), 1 + mis(S & ~(1 << v) & ~conflict[v]))

    out = mis((1 << N) - 1)
    mis.cache_clear()
    return out


def verify_main_theorem(m: int, n: int, t: int, budget: int = NODE_BUDGET, iso_budget: int = 10 ** 6) -> dict:
    """Compare the exact (t-1)-avoiding maximum with the largest ball."""
    shape = Shape(m, n)
    res = max_avoiding(m, n, t, budget)
    r_star, size, _ = best_ball(shape, t)
    iso = False
    for r in maximizing_radii(shape, t):
        v = is_isomorphic_small(res.witness, ball(shape, BallSpec(t, r)), iso_budget)
        if v is None:
            iso = None
        elif v:
            iso = True
            break
    rep = {
        "m": m, "n": n, "t": t, "brute": res.size, "ball": size, "ball_radius": r_star,
        "equal": res.size == size, "optimality": res.optimality,
        "witness_isomorphic_to_ball": iso,
        "note": "the theorem assumes n >= n_0 (unknown); a brute value above the ball at small n is data",
    }
    if res.size > size and res.optimal:
        rep["finding"] = "extremal value exceeds the ball bound"
    return rep


def explore(m: int, nmax: int, t: int, budget: int = NODE_BUDGET) -> list[dict]:
    """Table of extremal sizes for n = max(t, 1)..nmax."""
    rows = []
    for n in range(max(t, 1), nmax + 1):
        a = max_avoiding(m, n, t, budget)
        b = max_intersecting(m, n, t, budget)
        rows.append({"m": m, "n": n, "t": t, "avoiding": a.size, "avoiding_optimality": a.optimality,
                     "intersecting": b.size, "intersecting_optimality": b.optimality,
                     "ball": best_ball(Shape(m, n), t)[1]})
    return rows
