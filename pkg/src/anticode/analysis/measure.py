"""Product probability measures on finite product spaces."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

TOL = 1e-12


def _is_exact(w) -> bool:
    return all(isinstance(a, (int, Fraction)) for a in w)


class ProductMeasure:
    """nu = nu_1 x ... x nu_n; coordinate i lives on {0, .., radices[i]-1}.

    Weights given as ints/Fractions are kept exact and every measure computed
    from them is a Fraction; otherwise everything is float.
    """

    def __init__(self, weights: Sequence[Sequence]):
        ws = []
        for w in weights:
            w = tuple(w)
            if not w:
                raise ValueError("empty coordinate distribution")
            if _is_exact(w):
                w = tuple(Fraction(a) for a in w)
                if any(a < 0 for a in w) or sum(w) != 1:
                    raise ValueError(f"distribution {w} is not a probability vector")
            else:
                w = tuple(float(a) for a in w)
                if any(a < 0 for a in w) or abs(sum(w) - 1.0) > TOL:
                    raise ValueError(f"distribution {w} is not a probability vector")
            ws.append(w)
        self.weights = tuple(ws)
        self.exact = all(_is_exact(w) for w in self.weights)
        self._arrays = [np.array([float(a) for a in w]) for w in self.weights]

    @classmethod
    def uniform(cls, m: int, n: int) -> "ProductMeasure":
        return cls([[Fraction(1, m)] * m for _ in range(n)])

    @classmethod
    def uniform_on(cls, radices: Sequence[int]) -> "ProductMeasure":
        return cls([[Fraction(1, k)] * k for k in radices])

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def radices(self) -> tuple[int, ...]:
        return tuple(len(w) for w in self.weights)

    def array(self, i: int) -> np.ndarray:
        return self._arrays[i]

    def __eq__(self, other):
        return isinstance(other, ProductMeasure) and self.weights == other.weights

    def __hash__(self):
        return hash(self.weights)

    def __repr__(self):
        return f"ProductMeasure(radices={self.radices}, exact={self.exact})"

    def is_uniform(self) -> bool:
        return all(len(set(w)) == 1 for w in self.weights)

    def max_weight(self):
        return max(max(w) for w in self.weights)

    def is_balanced(self, b) -> bool:
        """max_{i,x} nu_i(x) <= b / m_i."""
        for w in self.weights:
            k = len(w)
            bound = Fraction(b) / k if self.exact and isinstance(b, (int, Fraction)) else b / k
            if max(w) > bound + (0 if self.exact else TOL):
                return False
        return True

    def drop(self, coords) -> "ProductMeasure":
        """Marginal on the coordinates not in ``coords``."""
        cs = set(coords)
        return ProductMeasure([w for i, w in enumerate(self.weights) if i not in cs])

    def keep(self, coords) -> "ProductMeasure":
        return ProductMeasure([self.weights[i] for i in coords])

    def density(self) -> np.ndarray:
        """Float table of nu(x) over the whole space."""
        out = np.ones(())
        for a in self._arrays:
            out = np.multiply.outer(out, a)
        return out

    def point_weight(self, x):
        p = Fraction(1) if self.exact else 1.0
        for w, a in zip(self.weights, x):
            p *= w[a]
        return p

    def measure_of(self, table) -> Fraction | float:
        """nu(A) for a boolean (or 0/1) table A of shape ``radices``."""
        table = np.asarray(table)
        if table.shape != self.radices:
            raise ValueError("table shape does not match measure")
        if not self.exact:
            return float(contract(table.astype(float), self._arrays))
        # integers scaled by per-coordinate common denominators
        dens, nums = [], []
        for w in self.weights:
            d = math.lcm(*[a.denominator for a in w])
            dens.append(int(d))
            nums.append([int(a * d) for a in w])
        bound = float(np.prod([max(v) for v in nums], dtype=float)) * table.size
        dtype = np.int64 if bound < 2 ** 62 else object
        acc = table.astype(np.int64).astype(dtype)
        for v in nums:
            acc = np.tensordot(acc, np.array(v, dtype=dtype), axes=([0], [0]))
        total = int(acc)
        denom = 1
        for d in dens:
            denom *= d
        return Fraction(total, denom)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` iid points as an (size, n) int array."""
        cols = [rng.choice(len(a), size=size, p=a) for a in self._arrays]
        return np.stack(cols, axis=1) if cols else np.zeros((size, 0), dtype=np.int64)


def contract(table: np.ndarray, vecs: Sequence[np.ndarray]) -> np.ndarray:
    """Sum over each axis against the matching weight vector."""
    acc = table
    for v in vecs:
        acc = np.tensordot(acc, v, axes=([0], [0]))
    return acc


def axis_mean(table: np.ndarray, w: np.ndarray, i: int) -> np.ndarray:
    """E over coordinate i under w, broadcast back to the full shape."""
    e = np.tensordot(table, w, axes=([i], [0]))
    return np.broadcast_to(np.expand_dims(e, i), table.shape)


def apply_axis(table: np.ndarray, M: np.ndarray, i: int) -> np.ndarray:
    """out[.., x_i, ..] = sum_y M[x_i, y] table[.., y, ..]."""
    return np.moveaxis(np.tensordot(M, table, axes=([1], [i])), 0, i)


def marginalize(table: np.ndarray, nu: ProductMeasure, keep) -> np.ndarray:
    """E[table | x_keep] as a table over the kept axes, in increasing axis order."""
    keep = set(keep)
    acc = table
    for i in reversed(range(table.ndim)):
        if i not in keep:
            acc = np.tensordot(acc, nu.array(i), axes=([i], [0]))
    return acc
