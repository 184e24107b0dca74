"""Efron-Stein decomposition, Laplacians and the noise operator."""
from __future__ import annotations

from itertools import combinations
from typing import Iterable

import numpy as np

from .measure import apply_axis, axis_mean
from .realfn import RealFn

DEFAULT_MAX_DEGREE = 6


class ESDecomposition:
    """The pieces f^{=S} with |S| <= max_degree, plus the remainder.

    ``components`` maps sorted coordinate tuples to full-shape tables;
    ``tail`` holds the sum of every piece of higher degree.
    """

    def __init__(self, f: RealFn, components: dict, tail: np.ndarray, max_degree: int):
        self.f = f
        self.components = components
        self.tail = tail
        self.max_degree = max_degree

    @property
    def measure(self):
        return self.f.measure

    @property
    def complete(self) -> bool:
        return self.max_degree >= self.f.n

    def __getitem__(self, S) -> RealFn:
        S = tuple(sorted(S))
        if S in self.components:
            return RealFn(self.components[S], self.measure)
        if len(S) > self.max_degree:
            raise KeyError(f"piece {S} is above the stored degree cap {self.max_degree}")
        return RealFn(np.zeros(self.measure.radices), self.measure)

    def norms_sq(self) -> dict[tuple, float]:
        return {S: self.f.expect(c * c) for S, c in self.components.items()}

    def tail_fn(self) -> RealFn:
        return RealFn(self.tail, self.measure)


def efron_stein(f: RealFn, max_degree: int | None = DEFAULT_MAX_DEGREE) -> ESDecomposition:
    """Split f one coordinate at a time into E_i and (I - E_i) parts.

    f^{=S} = prod_{i in S} (I - E_i) prod_{i not in S} E_i f, where E_i
    averages out coordinate i under nu_i.
    """
    n = f.n
    cap = n if max_degree is None else min(max_degree, n)
    comps: dict[tuple, np.ndarray] = {}
    tail = np.zeros(f.measure.radices)
    ws = [f.measure.array(i) for i in range(n)]

    def split(g, i, S):
        nonlocal tail
        if i == n:
            comps[S] = np.ascontiguousarray(g)
            return
        e = axis_mean(g, ws[i], i)
        split(e, i + 1, S)
        if len(S) < cap:
            split(g - e, i + 1, S + (i,))
        else:
            tail = tail + (g - e)

    split(f.values, 0, ())
    return ESDecomposition(f, comps, tail, cap)


def recompose(dec: ESDecomposition) -> RealFn:
    total = dec.tail.copy()
    for c in dec.components.values():
        total = total + c
    return RealFn(total, dec.measure)


def conditional_expectation(f: RealFn, J: Iterable[int]) -> RealFn:
    """f^{subset J}: average over the coordinates outside J."""
    J = set(J)
    g = f.values
    for i in range(f.n):
        if i not in J:
            g = axis_mean(g, f.measure.array(i), i)
    return RealFn(g, f.measure)


def es_component(f: RealFn, S: Iterable[int]) -> RealFn:
    """One piece by inclusion-exclusion over conditional expectations."""
    S = tuple(sorted(S))
    total = np.zeros(f.measure.radices)
    for k in range(len(S) + 1):
        for J in combinations(S, k):
            total = total + (-1) ** (len(S) - k) * conditional_expectation(f, J).values
    return RealFn(total, f.measure)


def laplacian(f: RealFn, T: Iterable[int], dec: ESDecomposition | None = None) -> RealFn:
    """L_T f = sum of the pieces f^{=S} with S containing T."""
    T = set(T)
    if dec is None:
        dec = efron_stein(f, max_degree=None)
    if not dec.complete:
        raise ValueError("Laplacian via pieces needs a complete decomposition")
    total = np.zeros(f.measure.radices)
    for S, c in dec.components.items():
        if T.issubset(S):
            total = total + c
    return RealFn(total, f.measure)


def laplacian_combinatorial(f: RealFn, T: Iterable[int]) -> RealFn:
    """L_T f as the composition of L_i = I - E_i over i in T."""
    g = f.values
    for i in sorted(set(T)):
        g = g - axis_mean(g, f.measure.array(i), i)
    return RealFn(g, f.measure)


def laplacian_signed_sum(f: RealFn, T: Iterable[int]) -> RealFn:
    """L_T f = sum_{S subset T} (-1)^{|S|} E_S f, evaluated term by term."""
    T = sorted(set(T))
    total = np.zeros(f.measure.radices)
    for k in range(len(T) + 1):
        for S in combinations(T, k):
            g = f.values
            for i in S:
                g = axis_mean(g, f.measure.array(i), i)
            total = total + (-1) ** k * g
    return RealFn(total, f.measure)


def _check_rho(rho):
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho={rho} outside [0, 1]")


def noise_matrix(w: np.ndarray, rho: float) -> np.ndarray:
    k = len(w)
    return rho * np.eye(k) + (1.0 - rho) * np.outer(np.ones(k), w)


def noise_apply(f: RealFn, rho: float) -> RealFn:
    """T_rho f by applying the one-coordinate noise matrices in turn."""
    _check_rho(rho)
    g = f.values
    for i in range(f.n):
        g = apply_axis(g, noise_matrix(f.measure.array(i), rho), i)
    return RealFn(g, f.measure)


def noise_apply_es(f: RealFn, rho: float, dec: ESDecomposition | None = None) -> RealFn:
    """T_rho f = sum_S rho^{|S|} f^{=S}."""
    _check_rho(rho)
    if dec is None:
        dec = efron_stein(f, max_degree=None)
    if not dec.complete:
        raise ValueError("noise via pieces needs a complete decomposition")
    total = np.zeros(f.measure.radices)
    for S, c in dec.components.items():
        total = total + rho ** len(S) * c
    return RealFn(total, f.measure)


def noise_stability(f: RealFn, rho: float) -> float:
    return f.inner(noise_apply(f, rho))


def noise_stability_es(f: RealFn, rho: float, dec: ESDecomposition | None = None) -> float:
    _check_rho(rho)
    if dec is None:
        dec = efron_stein(f, max_degree=None)
    if not dec.complete:
        raise ValueError("stability via pieces needs a complete decomposition")
    return sum(rho ** len(S) * v for S, v in dec.norms_sq().items())
