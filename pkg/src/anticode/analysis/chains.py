"""Finite Markov chains, their product chains, and the absolute spectral gap."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .measure import ProductMeasure, apply_axis
from .realfn import RealFn

ROW_TOL = 1e-12


class MarkovChain:
    def __init__(self, T):
        T = np.array(T, dtype=float, copy=True)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise ValueError("transition matrix must be square")
        if np.any(T < -ROW_TOL) or np.max(np.abs(T.sum(axis=1) - 1.0)) > ROW_TOL:
            raise ValueError("rows must be probability vectors")
        ncomp, _ = connected_components(T > 0, directed=True, connection="strong")
        if ncomp != 1:
            raise ValueError("chain is not irreducible")
        T.setflags(write=False)
        self.T = T
        self._nu = None

    @property
    def size(self) -> int:
        return self.T.shape[0]

    @classmethod
    def fully_mixing(cls, nu) -> "MarkovChain":
        nu = np.asarray(nu, dtype=float)
        return cls(np.outer(np.ones(len(nu)), nu))

    @classmethod
    def disagreement(cls, m: int) -> "MarkovChain":
        """Move to a uniformly random different state."""
        return cls((np.ones((m, m)) - np.eye(m)) / (m - 1))

    @classmethod
    def avoiding(cls, nu) -> "MarkovChain":
        """Never stay; move to y != x with probability nu(y) / (1 - nu(x))."""
        nu = np.asarray(nu, dtype=float)
        T = np.outer(1.0 / (1.0 - nu), nu)
        np.fill_diagonal(T, 0.0)
        return cls(T)

    @classmethod
    def noise(cls, nu, rho: float) -> "MarkovChain":
        nu = np.asarray(nu, dtype=float)
        return cls(rho * np.eye(len(nu)) + (1 - rho) * np.outer(np.ones(len(nu)), nu))

    @classmethod
    def random_floored(cls, rng: np.random.Generator, k: int, alpha: float,
                       reversible: bool = False) -> "MarkovChain":
        """T = alpha 1 nu^T + (1 - alpha) S where nu is stationary for S.

        Then nu is stationary for T and T_ab >= alpha nu(b).  S is a random
        positive stochastic matrix, made reversible on request by taking
        S = D^{-1} W for a random symmetric W with row sums D.
        """
        W = rng.random((k, k)) + 1e-3
        if reversible:
            W = W + W.T
        S = cls(W / W.sum(axis=1)[:, None])
        nu = S.stationary()
        return cls(alpha * np.outer(np.ones(k), nu) + (1 - alpha) * S.T)

    def stationary(self) -> np.ndarray:
        if self._nu is None:
            k = self.size
            A = np.vstack([self.T.T - np.eye(k), np.ones((1, k))])
            rhs = np.zeros(k + 1)
            rhs[-1] = 1.0
            nu, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            nu = np.clip(nu, 0.0, None)
            self._nu = nu / nu.sum()
        return self._nu

    def is_reversible(self, tol: float = 1e-12) -> bool:
        nu = self.stationary()
        flow = nu[:, None] * self.T
        return bool(np.max(np.abs(flow - flow.T)) <= tol)

    def abs_spectral_gap(self) -> float:
        """1 - ||T||_{op} on nu-mean-zero functions in L^2(nu).

        With D = diag(sqrt nu), f -> D f is an isometry onto Euclidean space,
        T becomes A = D T D^{-1}, and the mean-zero subspace becomes the
        orthogonal complement of sqrt(nu); so the operator norm is the top
        singular value of A restricted to that complement.
        """
        nu = self.stationary()
        s = np.sqrt(nu)
        A = (s[:, None] * self.T) / s[None, :]
        P = np.eye(self.size) - np.outer(s, s)
        sigma = np.linalg.svd(A @ P, compute_uv=False)[0] if self.size > 1 else 0.0
        return float(1.0 - sigma)

    def gap_floor_holds(self, alpha: float) -> bool:
        """Hypothesis T_ab >= alpha nu(b) for all a, b."""
        nu = self.stationary()
        return bool(np.all(self.T >= alpha * nu[None, :] - 1e-15))


def product_measure(chains: Sequence[MarkovChain]) -> ProductMeasure:
    return ProductMeasure([c.stationary() for c in chains])


def product_chain_apply(f: RealFn, chains: Sequence[MarkovChain]) -> RealFn:
    """(U f)(x) = E_{y ~ U x} f(y) for the product chain U."""
    if tuple(c.size for c in chains) != f.measure.radices:
        raise ValueError("chains do not match the function's space")
    g = f.values
    for i, c in enumerate(chains):
        g = apply_axis(g, c.T, i)
    return RealFn(g, f.measure)


def chain_correlation(F, G, chains: Sequence[MarkovChain]) -> float:
    """P(x in F, y in G) for x ~ nu and y one product-chain step from x."""
    nu = product_measure(chains)
    f = RealFn(F.table.astype(float), nu)
    g = RealFn(G.table.astype(float), nu)
    return f.inner(product_chain_apply(g, chains))


def chain_step(rng: np.random.Generator, xs: np.ndarray, chains: Sequence[MarkovChain]) -> np.ndarray:
    """One step of the product chain from each row of ``xs``."""
    ys = np.empty_like(xs)
    for i, c in enumerate(chains):
        cum = np.cumsum(c.T, axis=1)
        u = rng.random(len(xs))
        row = cum[xs[:, i]]
        ys[:, i] = np.minimum((row < u[:, None]).sum(axis=1), c.size - 1)
    return ys


def chain_correlation_mc(F, G, chains: Sequence[MarkovChain], trials: int, seed: int,
                         jobs: int = 1) -> tuple[float, float]:
    """Monte Carlo estimate of :func:`chain_correlation`; returns (mean, stderr)."""
    from ..rng import run_chunks

    nu = product_measure(chains)
    Ft, Gt = F.table, G.table

    def work(rng, size):
        xs = nu.sample(rng, size)
        ys = chain_step(rng, xs, chains)
        hit = Ft[tuple(xs.T)] & Gt[tuple(ys.T)]
        return int(hit.sum())

    hits = sum(run_chunks(work, seed, trials, jobs))
    p = hits / trials
    return p, float(np.sqrt(max(p * (1 - p), 0.0) / trials))
