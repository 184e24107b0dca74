"""Balanced gluings of alphabets, pushforward measures and measure boosting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .analysis.measure import ProductMeasure
from .codes import Code, Restriction, Shape, is_t_intersecting, restrict
from .reports import as_fraction
from .rng import rng_for, run_chunks

REJECTION_CAP = 10 ** 4


@dataclass(frozen=True)
class Gluing:
    """Per-coordinate surjections maps[i]: [m] -> [k] (0-based), with declared balance b."""

    maps: tuple[tuple[int, ...], ...]
    k: int
    b: Fraction = Fraction(1)

    def __post_init__(self):
        for pi in self.maps:
            if set(pi) != set(range(self.k)):
                raise ValueError("each coordinate map must be onto [k]")
        if len({len(pi) for pi in self.maps}) > 1:
            raise ValueError("all coordinate maps must share the source alphabet")

    @property
    def n(self) -> int:
        return len(self.maps)

    @property
    def m(self) -> int:
        return len(self.maps[0]) if self.maps else 0

    @classmethod
    def identity(cls, m: int, n: int) -> "Gluing":
        return cls(tuple(tuple(range(m)) for _ in range(n)), m)

    def fibers(self, i: int) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for a, c in enumerate(self.maps[i]):
            out[c].append(a)
        return out

    def apply_point(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.maps[i][a] for i, a in enumerate(x))

    def then(self, other: "Gluing") -> "Gluing":
        """Apply self, then ``other``."""
        if other.n != self.n or other.m != self.k:
            raise ValueError("gluings do not compose")
        maps = tuple(tuple(other.maps[i][c] for c in pi) for i, pi in enumerate(self.maps))
        return Gluing(maps, other.k, Fraction(self.b) * Fraction(other.b))

    def to_json(self):
        return {"n": self.n, "m": self.m, "k": self.k, "b": self.b,
                "maps": [[c + 1 for c in pi] for pi in self.maps]}


def is_balanced(pi: Gluing, b) -> bool:
    """Every fiber has size <= b m / k."""
    b = as_fraction(b)
    return all(len(f) * pi.k <= b * pi.m for i in range(pi.n) for f in pi.fibers(i))


def feasible(m: int, k: int, b) -> bool:
    b = as_fraction(b)
    if not 1 <= k <= m or b < 1:
        return False
    if b == 1:
        return m % k == 0
    return math.floor(b * m / k) * k >= m


def _sample_map(rng: np.random.Generator, m: int, k: int, b: Fraction) -> tuple[int, ...]:
    if b == 1:
        perm = rng.permutation(m)
        pi = np.empty(m, dtype=np.int64)
        pi[perm] = np.arange(m) // (m // k)
        return tuple(int(c) for c in pi)
    cap = math.floor(b * m / k)
    for _ in range(REJECTION_CAP):
        pi = rng.integers(0, k, size=m)
        counts = np.bincount(pi, minlength=k)
        if counts.min() >= 1 and counts.max() <= cap:
            return tuple(int(c) for c in pi)
    raise RuntimeError(f"no balanced surjection found in {REJECTION_CAP} tries")


def sample_gluing(m: int, k: int, b=1, seed: int | np.random.Generator = 0, n: int = 1) -> Gluing:
    """A random b-balanced gluing [m] -> [k] on each of n coordinates.

    With b = 1 the fibers all have size m/k and the partition is uniform;
    otherwise random maps are drawn until one is onto and balanced.
    """
    b = as_fraction(b)
    if not feasible(m, k, b):
        raise ValueError(f"no {b}-balanced gluing from [{m}] to [{k}]")
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(seed)
    g = Gluing(tuple(_sample_map(rng, m, k, b) for _ in range(n)), k, b)
    assert is_balanced(g, b)
    return g


def block_gluing(m: int, k: int, n: int) -> Gluing:
    """Contiguous blocks with sizes as equal as possible, larger blocks last."""
    sizes = [m // k + (1 if j >= k - m % k else 0) for j in range(k)]
    pi = tuple(j for j, s in enumerate(sizes) for _ in range(s))
    b = Fraction(max(sizes) * k, m)
    return Gluing(tuple(pi for _ in range(n)), k, max(b, Fraction(1)))


def glue_table(table: np.ndarray, pi: Gluing, coords: Sequence[int] | None = None) -> np.ndarray:
    """Image of a boolean table; ``coords`` names which gluing map acts on each axis."""
    coords = range(table.ndim) if coords is None else coords
    t = table
    for axis, i in enumerate(coords):
        parts = [np.take(t, f, axis=axis).any(axis=axis, keepdims=True) for f in pi.fibers(i)]
        t = np.concatenate(parts, axis=axis)
    return t


def glue_code(F: Code, pi: Gluing) -> Code:
    """F^pi = pi(F)."""
    if pi.n != F.n or pi.m != F.m:
        raise ValueError("gluing does not match code shape")
    return Code(Shape(pi.k, F.n), glue_table(F.table, pi))


def glue_measure(nu: ProductMeasure, pi: Gluing, coords: Sequence[int] | None = None) -> ProductMeasure:
    """nu^pi(x) = sum of nu over the preimage of x."""
    coords = range(nu.n) if coords is None else coords
    out = []
    for w, i in zip(nu.weights, coords):
        if len(w) != pi.m:
            raise ValueError("gluing does not match measure")
        zero = Fraction(0) if nu.exact else 0.0
        acc = [zero] * pi.k
        for a, c in enumerate(pi.maps[i]):
            acc[c] += w[a]
        out.append(acc)
    return ProductMeasure(out)


def preimage_witness(F: Code, G: Code, pi: Gluing):
    """Pull back a glued pair with agreement 0 to points of F and G.

    Returns (x, y) with agr(x, y) = 0, or None if the glued codes cross-agree.
    """
    from .compression import find_disagreeing_pair

    pair = find_disagreeing_pair(glue_code(F, pi), glue_code(G, pi))
    if pair is None:
        return None
    u, v = pair
    # any preimages work: distinct glued symbols have distinct preimages
    PF = F.points()
    PG = G.points()
    x = next(tuple(int(a) for a in p) for p in PF if pi.apply_point(p) == u)
    y = next(tuple(int(a) for a in p) for p in PG if pi.apply_point(p) == v)
    return x, y


def t_intersection_preserved(F: Code, pi: Gluing, t: int) -> bool:
    """False only if F is t-intersecting and F^pi is not."""
    if not is_t_intersecting(F, t):
        return True
    return is_t_intersecting(glue_code(F, pi), t)


def expected_glued_measure(F: Code, nu: ProductMeasure, k: int, trials: int, seed: int,
                           jobs: int = 1, c: float | None = None) -> dict:
    """Monte Carlo mean of nu^pi(F^pi) over uniform equal-fiber gluings [m] -> [k]."""
    m = F.m
    if m % k:
        raise ValueError("k must divide m")
    base = nu.measure_of(F.table)

    def work(rng, size):
        vals, viol = [], 0
        for _ in range(size):
            pi = sample_gluing(m, k, 1, rng, n=F.n)
            v = glue_measure(nu, pi).measure_of(glue_table(F.table, pi))
            viol += v < base
            vals.append(float(v))
        return np.sum(vals), np.sum(np.square(vals)), viol

    parts = run_chunks(work, seed, trials, jobs)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    viol = int(sum(p[2] for p in parts))
    mean = s1 / trials
    var = max(s2 / trials - mean * mean, 0.0)
    stderr = math.sqrt(var / max(trials - 1, 1))
    s = Fraction(m, k)
    out = {"trials": trials, "seed": seed, "k": k, "mean": mean, "stderr": stderr,
           "base": base, "lower_bound_violations": viol,
           "theorem_regime": s >= 4 and nu.is_balanced(s)}
    if c is not None:
        out["c"] = c
        out["target"] = float(base) ** (1 - c)
    return out


# measure boosting


def _reached(mu_i, mu, eps) -> bool:
    """mu_i >= mu^eps, exactly when 1/eps is an integer."""
    eps = as_fraction(eps)
    if isinstance(mu_i, Fraction) and isinstance(mu, Fraction) and eps.numerator == 1:
        return mu_i ** eps.denominator >= mu
    return float(mu_i) >= float(mu) ** float(eps) * (1 - 1e-12)


def boost_measure(F: Code, nu: ProductMeasure, eps, b: int, seed: int = 0, c: float = 0.1,
                  max_iter: int = 50, r_cap: int = 4, tries: int = 8) -> dict:
    """Alternate restrictions and gluings until the measure reaches mu^eps.

    Returns the composite gluing, the restriction (R, alpha) in original
    coordinates with alpha in the final alphabet, the recounted final
    measure, and a per-step ledger.
    """
    from .pseudorandom import is_global

    eps = as_fraction(eps)
    n, m = F.n, F.m
    mu = nu.measure_of(F.table)
    warn = []
    if not nu.is_balanced(b):
        warn.append("measure is not b-balanced")
    if not (isinstance(b, int) and b >= 4):
        warn.append("b should be an integer >= 4")
    if not float(mu) < 16.0 ** (-1 / float(eps)):
        warn.append("mu is not below 16^(-1/eps)")
    rng = rng_for(seed)
    ledger = []
    if len(F) == 0:
        raise ValueError("F must be nonempty")

    m0 = 1
    while b >= 2 and m0 * b <= m:
        m0 *= b
    if b < 2:
        m0 = m
    total = block_gluing(m, m0, n) if m0 < m else Gluing.identity(m, n)
    cur = glue_code(F, total) if m0 < m else F
    cur_nu = glue_measure(nu, total)
    S = list(range(n))
    fixed: dict[int, int] = {}
    mc = total.k
    ledger.append({"step": "initial", "alphabet": mc, "measure": cur_nu.measure_of(cur.table)})
    status = "cap"
    for _ in range(max_iter):
        mu_i = cur_nu.measure_of(cur.table)
        if _reached(mu_i, mu, eps):
            status = "reached"
            break
        r_i = min(r_cap, len(S), max(1, math.ceil(math.log2(1 / float(mu_i)))))
        rep = is_global(cur, r_i, float(mu_i) ** (1 - c), nu=cur_nu, witness="first")
        if rep.verdict == "fails":
            rho = rep.witness["restriction"]
            cur = restrict(cur, rho)
            for pos, a in zip(rho.coords, rho.values):
                fixed[S[pos]] = a
            drop = set(rho.coords)
            cur_nu = cur_nu.drop(drop)
            S = [s for k, s in enumerate(S) if k not in drop]
            ledger.append({"step": "restrict", "coords": [S_i + 1 for S_i in sorted(fixed)],
                           "r": r_i, "alphabet": mc, "measure_before": mu_i,
                           "measure": cur_nu.measure_of(cur.table)})
            continue
        k = mc // (b * b)
        if k < 1 or mc % (b * b):
            status = "alphabet_exhausted"
            ledger.append({"step": "stuck", "alphabet": mc, "measure": mu_i})
            break
        best = None
        for _ in range(tries):
            pi = sample_gluing(mc, k, 1, rng, n=n)
            newnu = glue_measure(cur_nu, pi, coords=S)
            val = newnu.measure_of(glue_table(cur.table, pi, coords=S))
            if best is None or val > best[0]:
                best = (val, pi, newnu)
        val, pi, newnu = best
        cur = Code(Shape(k, len(S)), glue_table(cur.table, pi, coords=S))
        cur_nu = newnu
        fixed = {i: pi.maps[i][a] for i, a in fixed.items()}
        total = total.then(pi)
        mc = k
        ledger.append({"step": "glue", "alphabet": mc, "measure_before": mu_i, "measure": val,
                       "target_step": float(mu_i) ** (1 - c), "met_step": float(val) >= float(mu_i) ** (1 - c)})
    rho = Restriction.of(fixed)
    # recount from the original code through the composite gluing
    glued = glue_code(F, total)
    final_nu = glue_measure(nu, total).drop(rho.coords)
    final = final_nu.measure_of(restrict(glued, rho).table)
    return {"gluing": total, "restriction": rho, "final_measure": final, "start_measure": mu,
            "target": float(mu) ** float(eps), "reached": _reached(final, mu, eps),
            "status": status, "ledger": ledger, "warnings": warn,
            "R_size": len(rho), "R_over_log": len(rho) / max(math.log2(1 / float(mu)), 1e-300)}


# text format


def dumps(pi: Gluing) -> str:
    head = f"gluing v1 n={pi.n} m={pi.m} k={pi.k} b={pi.b}"
    return "\n".join([head, *(" ".join(str(c + 1) for c in f) for f in pi.maps)]) + "\n"


def loads(text: str) -> Gluing:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    parts = lines[0].split()
    if parts[:2] != ["gluing", "v1"]:
        raise ValueError("not a gluing v1 file")
    hdr = dict(p.split("=", 1) for p in parts[2:])
    maps = tuple(tuple(int(c) - 1 for c in ln.split()) for ln in lines[1:])
    pi = Gluing(maps, int(hdr["k"]), Fraction(hdr.get("b", "1")))
    if pi.n != int(hdr["n"]) or pi.m != int(hdr["m"]):
        raise ValueError("gluing header does not match its maps")
    return pi
