"""Real-valued functions on a product space with an attached product measure."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .measure import ProductMeasure, contract


class RealFn:
    __slots__ = ("values", "measure")

    def __init__(self, values, measure: ProductMeasure):
        values = np.array(values, dtype=float, copy=True)
        if values.shape != measure.radices:
            values = values.reshape(measure.radices)
        if not np.all(np.isfinite(values)):
            raise ValueError("RealFn values must be finite")
        values.setflags(write=False)
        self.values = values
        self.measure = measure

    @classmethod
    def indicator(cls, code, measure: ProductMeasure | None = None) -> "RealFn":
        if measure is None:
            measure = ProductMeasure.uniform(code.m, code.n)
        return cls(code.table.astype(float), measure)

    @classmethod
    def random(cls, rng: np.random.Generator, measure: ProductMeasure, boolean=False) -> "RealFn":
        shape = measure.radices
        vals = rng.integers(0, 2, size=shape) if boolean else rng.standard_normal(shape)
        return cls(vals, measure)

    @property
    def n(self) -> int:
        return self.measure.n

    def _same(self, other: "RealFn"):
        if self.measure.radices != other.measure.radices:
            raise ValueError("functions live on different spaces")

    def __add__(self, other):
        self._same(other)
        return RealFn(self.values + other.values, self.measure)

    def __sub__(self, other):
        self._same(other)
        return RealFn(self.values - other.values, self.measure)

    def scale(self, c: float) -> "RealFn":
        return RealFn(c * self.values, self.measure)

    def mean(self) -> float:
        return float(contract(self.values, [self.measure.array(i) for i in range(self.n)]))

    def expect(self, table: np.ndarray) -> float:
        return float(contract(table, [self.measure.array(i) for i in range(self.n)]))

    def inner(self, other: "RealFn") -> float:
        self._same(other)
        return self.expect(self.values * other.values)

    def norm(self, q: float = 2) -> float:
        return self.expect(np.abs(self.values) ** q) ** (1.0 / q)

    def norm_sq(self) -> float:
        return self.expect(self.values ** 2)

    def restrict(self, coords: Sequence[int], values: Sequence[int]) -> "RealFn":
        """f_{S -> x}: fix coordinates ``coords`` to ``values``."""
        idx: list = [slice(None)] * self.n
        for i, a in zip(coords, values):
            idx[i] = a
        return RealFn(self.values[tuple(idx)], self.measure.drop(coords))

    def allclose(self, other: "RealFn", tol: float = 1e-10) -> bool:
        self._same(other)
        return bool(np.max(np.abs(self.values - other.values), initial=0.0) <= tol)


def dumps(f: RealFn) -> str:
    rad = ",".join(str(k) for k in f.measure.radices)
    lines = [f"realfn v1 n={f.n} radices={rad}"]
    for i in range(f.n):
        lines.append(f"nu {i + 1}: " + " ".join("%.17g" % float(a) for a in f.measure.weights[i]))
    flat = f.values.ravel()
    for s in range(0, len(flat), 8):
        lines.append(" ".join("%.17g" % v for v in flat[s:s + 8]))
    return "\n".join(lines) + "\n"


def loads(text: str) -> RealFn:
    lines = text.splitlines()
    parts = lines[0].split()
    if parts[:2] != ["realfn", "v1"]:
        raise ValueError("not a realfn v1 file")
    hdr = dict(p.split("=", 1) for p in parts[2:])
    n = int(hdr["n"])
    radices = tuple(int(k) for k in hdr["radices"].split(",")) if n else ()
    weights: dict[int, list[float]] = {}
    vals: list[float] = []
    for ln in lines[1:]:
        if ln.startswith("nu "):
            key, rest = ln[3:].split(":", 1)
            weights[int(key) - 1] = [float(a) for a in rest.split()]
        elif ln.strip():
            vals.extend(float(v) for v in ln.split())
    if weights:
        nu = ProductMeasure([weights[i] for i in range(n)])
    else:
        nu = ProductMeasure.uniform_on(radices)
    return RealFn(np.array(vals), nu)
