"""Codes in [m]^n stored as dense boolean tables.

A code is kept as an n-dimensional boolean array of shape ``(m,) * n``;
axis 0 is coordinate 1, so C-order flattening gives the mixed-radix rank
with coordinate 1 most significant.  Throughout the Python API coordinates
and symbols are 0-based; the text formats and reports render them 1-based.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

#: Largest number of cells a dense table may have.  Override with
#: :func:`set_cell_cap` for bigger desk-scale experiments.
CELL_CAP = 2 ** 27


def set_cell_cap(cap: int) -> None:
    global CELL_CAP
    CELL_CAP = int(cap)


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class Shape:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 0:
            raise ShapeError(f"invalid shape m={self.m} n={self.n}")
        if self.m ** self.n > CELL_CAP:
            raise ShapeError(f"m^n = {self.m}^{self.n} exceeds cell cap {CELL_CAP}")

    @property
    def size(self) -> int:
        return self.m ** self.n

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.m,) * self.n


def rank(point: Sequence[int], shape: Shape) -> int:
    """Mixed-radix rank of a 0-based point; coordinate 0 is most significant."""
    if len(point) != shape.n:
        raise ShapeError(f"point has {len(point)} coordinates, shape has n={shape.n}")
    r = 0
    for a in point:
        if not 0 <= a < shape.m:
            raise ShapeError(f"symbol {a} out of range for m={shape.m}")
        r = r * shape.m + int(a)
    return r


def unrank(index: int, shape: Shape) -> tuple[int, ...]:
    if not 0 <= index < shape.size:
        raise ShapeError(f"index {index} out of range for {shape}")
    out = []
    for _ in range(shape.n):
        index, a = divmod(index, shape.m)
        out.append(a)
    return tuple(reversed(out))


def agreement(x: Sequence[int], y: Sequence[int]) -> int:
    if len(x) != len(y):
        raise ShapeError("points of different length")
    return sum(1 for a, b in zip(x, y) if a == b)


def all_points(shape: Shape) -> np.ndarray:
    """Every point of the shape, in rank order, as an (m^n, n) array."""
    if shape.n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices(shape.dims).reshape(shape.n, -1)
    return grids.T.astype(np.int64)


class Code:
    """An immutable code (subset) of [m]^n."""

    __slots__ = ("shape", "table", "_count")

    def __init__(self, shape: Shape, table):
        table = np.array(table, dtype=bool, copy=True)
        if table.shape != shape.dims:
            table = table.reshape(shape.dims)
        table.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_count", None)

    def __setattr__(self, name, value):
        raise AttributeError("Code is immutable")

    # construction

    @classmethod
    def empty(cls, shape: Shape) -> "Code":
        return cls(shape, np.zeros(shape.dims, dtype=bool))

    @classmethod
    def full(cls, shape: Shape) -> "Code":
        return cls(shape, np.ones(shape.dims, dtype=bool))

    @classmethod
    def from_points(cls, shape: Shape, points: Iterable[Sequence[int]]) -> "Code":
        table = np.zeros(shape.size, dtype=bool)
        for p in points:
            table[rank(p, shape)] = True
        return cls(shape, table.reshape(shape.dims))

    @classmethod
    def from_indices(cls, shape: Shape, indices) -> "Code":
        table = np.zeros(shape.size, dtype=bool)
        table[np.asarray(list(indices), dtype=np.int64)] = True
        return cls(shape, table.reshape(shape.dims))

    @classmethod
    def from_predicate(cls, shape: Shape, predicate) -> "Code":
        """``predicate`` receives the (m^n, n) point array and returns a mask."""
        mask = np.asarray(predicate(all_points(shape)), dtype=bool)
        return cls(shape, mask.reshape(shape.dims))

    # basic accessors

    @property
    def m(self) -> int:
        return self.shape.m

    @property
    def n(self) -> int:
        return self.shape.n

    def __len__(self) -> int:
        if self._count is None:
            object.__setattr__(self, "_count", int(np.count_nonzero(self.table)))
        return self._count

    def __contains__(self, point) -> bool:
        return bool(self.table[tuple(point)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Code):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.shape, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"Code(m={self.m}, n={self.n}, size={len(self)})"

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.table.ravel())

    def points(self) -> np.ndarray:
        """Members as an (|F|, n) array of 0-based symbols, in rank order."""
        idx = self.indices()
        if self.n == 0:
            return np.zeros((len(idx), 0), dtype=np.int64)
        return np.stack(np.unravel_index(idx, self.shape.dims), axis=1).astype(np.int64)

    def measure(self) -> Fraction:
        return Fraction(len(self), self.shape.size)

    def _check(self, other: "Code"):
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __or__(self, other: "Code") -> "Code":
        self._check(other)
        return Code(self.shape, self.table | other.table)

    def __and__(self, other: "Code") -> "Code":
        self._check(other)
        return Code(self.shape, self.table & other.table)

    def __sub__(self, other: "Code") -> "Code":
        self._check(other)
        return Code(self.shape, self.table & ~other.table)

    def complement(self) -> "Code":
        return Code(self.shape, ~self.table)

    def issubset(self, other: "Code") -> bool:
        self._check(other)
        return not np.any(self.table & ~other.table)


# pairwise agreement machinery


def agreement_matrix(P: np.ndarray, Q: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """``A[a, b] = agr(P[a], Q[b])`` for point arrays P, Q."""
    out = np.empty((len(P), len(Q)), dtype=np.int16)
    for s in range(0, len(P), chunk):
        block = P[s:s + chunk]
        out[s:s + chunk] = (block[:, None, :] == Q[None, :, :]).sum(axis=2)
    return out


def _distinct_pair_agreements(F: Code) -> np.ndarray:
    P = F.points()
    if len(P) < 2:
        return np.zeros(0, dtype=np.int16)
    A = agreement_matrix(P, P)
    iu = np.triu_indices(len(P), k=1)
    return A[iu]


def agreement_spectrum(F: Code) -> tuple[int, ...]:
    """Histogram of agreements over unordered pairs of distinct members."""
    counts = np.bincount(_distinct_pair_agreements(F), minlength=F.n + 1)
    return tuple(int(c) for c in counts)


def is_t_intersecting(F: Code, t: int) -> bool:
    if not 0 <= t <= F.n:
        raise ValueError(f"t={t} outside 0..n")
    agr = _distinct_pair_agreements(F)
    return bool(agr.size == 0 or agr.min() >= t)


def is_s_avoiding(F: Code, s: int) -> bool:
    """No two distinct members agree on exactly s coordinates."""
    if not 0 <= s <= F.n:
        raise ValueError(f"s={s} outside 0..n")
    return not bool(np.any(_distinct_pair_agreements(F) == s))


def cross_agreements(F: Code, G: Code) -> np.ndarray:
    F._check(G)
    return agreement_matrix(F.points(), G.points())


def is_cross_t_intersecting(F: Code, G: Code, t: int) -> bool:
    A = cross_agreements(F, G)
    return bool(A.size == 0 or A.min() >= t)


# balls


@dataclass(frozen=True)
class BallSpec:
    t: int
    r: int = 0

    def __post_init__(self):
        if self.t < 1 or self.r < 0:
            raise ValueError(f"invalid ball parameters t={self.t} r={self.r}")

    @property
    def support(self) -> int:
        return self.t + 2 * self.r


def ball(shape: Shape, spec: BallSpec) -> Code:
    """S_{t,r}: at least t+r of the first t+2r coordinates equal symbol 1 (index 0)."""
    w = spec.support
    if w > shape.n:
        raise ValueError(f"t+2r = {w} exceeds n = {shape.n}")

    def pred(P):
        return (P[:, :w] == 0).sum(axis=1) >= spec.t + spec.r

    return Code.from_predicate(shape, pred)


def ball_size(m: int, n: int, t: int, r: int) -> int:
    """|S_{t,r}[m]^n| by counting, without building the table."""
    w = t + 2 * r
    if w > n:
        raise ValueError("t+2r exceeds n")
    inner = sum(math.comb(w, j) * (m - 1) ** (w - j) for j in range(t + r, w + 1))
    return inner * m ** (n - w)


def best_ball(shape: Shape, t: int) -> tuple[int, int, Code]:
    """(r*, size, ball) for the largest S_{t,r}; ties go to the smallest r."""
    if t > shape.n:
        raise ValueError("t exceeds n")
    best_r, best = 0, -1
    for r in range(0, (shape.n - t) // 2 + 1):
        size = ball_size(shape.m, shape.n, t, r)
        if size > best:
            best_r, best = r, size
    return best_r, best, ball(shape, BallSpec(t, best_r))


def maximizing_radii(shape: Shape, t: int) -> list[int]:
    sizes = {r: ball_size(shape.m, shape.n, t, r) for r in range(0, (shape.n - t) // 2 + 1)}
    top = max(sizes.values())
    return [r for r, s in sizes.items() if s == top]


# restrictions and subcubes


@dataclass(frozen=True)
class Restriction:
    coords: tuple[int, ...] = ()
    values: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.coords) != len(self.values):
            raise ValueError("restriction needs one value per coordinate")
        if any(b <= a for a, b in zip(self.coords, self.coords[1:])):
            raise ValueError("restriction coordinates must be strictly increasing")

    @classmethod
    def of(cls, mapping: dict[int, int]) -> "Restriction":
        items = sorted(mapping.items())
        return cls(tuple(i for i, _ in items), tuple(a for _, a in items))

    def __len__(self):
        return len(self.coords)

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.coords, self.values))

    def validate(self, shape: Shape):
        for i, a in zip(self.coords, self.values):
            if not (0 <= i < shape.n and 0 <= a < shape.m):
                raise ShapeError(f"restriction {i}->{a} invalid for {shape}")

    def index(self, n: int) -> tuple:
        idx: list = [slice(None)] * n
        for i, a in zip(self.coords, self.values):
            idx[i] = a
        return tuple(idx)

    def to_json(self) -> dict:
        return {"coords": [i + 1 for i in self.coords], "values": [a + 1 for a in self.values]}


def restrict(F: Code, rho: Restriction) -> Code:
    """F(alpha): members with x_R = alpha, as a code on the remaining coordinates."""
    rho.validate(F.shape)
    sub = F.table[rho.index(F.n)]
    return Code(Shape(F.m, F.n - len(rho)), sub)


def subcode(F: Code, rho: Restriction) -> Code:
    """F[alpha]: members of F with x_R = alpha, still inside [m]^n."""
    return F & Subcube(rho, F.shape).code()


@dataclass(frozen=True)
class Subcube:
    restriction: Restriction
    shape: Shape

    @property
    def codimension(self) -> int:
        return len(self.restriction)

    def code(self) -> Code:
        self.restriction.validate(self.shape)
        table = np.zeros(self.shape.dims, dtype=bool)
        table[self.restriction.index(self.shape.n)] = True
        return Code(self.shape, table)

    def measure(self) -> Fraction:
        return Fraction(1, self.shape.m ** self.codimension)


def dictator(shape: Shape, i: int, a: int) -> Code:
    return Subcube(Restriction((i,), (a,)), shape).code()


# juntas


def junta_from(J: Sequence[int], accepted: Iterable[Sequence[int]], shape: Shape) -> Code:
    J = tuple(J)
    acc = {tuple(p) for p in accepted}
    mask = np.zeros((shape.m,) * len(J), dtype=bool)
    for p in acc:
        mask[p] = True

    def pred(P):
        return mask[tuple(P[:, j] for j in J)] if J else np.full(len(P), bool(acc))

    return Code.from_predicate(shape, pred)


def junta_support(F: Code) -> tuple[int, ...]:
    """Smallest J such that F is a J-junta.

    A coordinate can be dropped exactly when membership is constant along
    its axis, and the set of such coordinates is closed under union, so the
    relevant coordinates form the unique minimal junta set.
    """
    out = []
    for i in range(F.n):
        first = np.take(F.table, [0], axis=i)
        if not np.all(F.table == first):
            out.append(i)
    return tuple(out)


# isomorphisms


@dataclass(frozen=True)
class Isomorphism:
    """Coordinate i is moved to position ``perm[i]`` after relabelling by ``relabel[i]``."""

    perm: tuple[int, ...]
    relabel: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)) or len(self.relabel) != n:
            raise ValueError("perm must be a permutation with one relabelling per coordinate")
        for tau in self.relabel:
            if sorted(tau) != list(range(len(tau))):
                raise ValueError("each relabelling must be a bijection")

    @classmethod
    def identity(cls, shape: Shape) -> "Isomorphism":
        return cls(tuple(range(shape.n)), tuple(tuple(range(shape.m)) for _ in range(shape.n)))

    def apply_point(self, x: Sequence[int]) -> tuple[int, ...]:
        y = [0] * len(x)
        for i, a in enumerate(x):
            y[self.perm[i]] = self.relabel[i][a]
        return tuple(y)


def apply_isomorphism(F: Code, iso: Isomorphism) -> Code:
    if len(iso.perm) != F.n or any(len(t) != F.m for t in iso.relabel):
        raise ShapeError("isomorphism does not match code shape")
    t = F.table
    for i, tau in enumerate(iso.relabel):
        inv = np.argsort(np.asarray(tau))
        t = np.take(t, inv, axis=i)
    t = np.transpose(t, axes=np.argsort(np.asarray(iso.perm)))
    return Code(F.shape, t)


def _marginals(F: Code) -> list[tuple[int, ...]]:
    out = []
    for i in range(F.n):
        axes = tuple(j for j in range(F.n) if j != i)
        out.append(tuple(int(c) for c in F.table.sum(axis=axes)))
    return out


def is_isomorphic_small(F: Code, G: Code, budget: int = 10 ** 6):
    """Exact isomorphism test; returns True, False, or None when the budget runs out."""
    F._check(G)
    if len(F) != len(G):
        return False
    if agreement_spectrum(F) != agreement_spectrum(G):
        return False
    mf, mg = _marginals(F), _marginals(G)
    if sorted(tuple(sorted(c)) for c in mf) != sorted(tuple(sorted(c)) for c in mg):
        return False
    n, m = F.n, F.m
    nodes = 0

    def relabels(cf, cg):
        # bijections tau with cg[tau[a]] == cf[a]
        options = [[b for b in range(m) if cg[b] == cf[a]] for a in range(m)]

        def rec(a, used, acc):
            if a == m:
                yield tuple(acc)
                return
            for b in options[a]:
                if b not in used:
                    used.add(b)
                    acc.append(b)
                    yield from rec(a + 1, used, acc)
                    acc.pop()
                    used.discard(b)

        return rec(0, set(), [])

    for perm in itertools.permutations(range(n)):
        if any(sorted(mf[i]) != sorted(mg[perm[i]]) for i in range(n)):
            continue
        choices = [list(relabels(mf[i], mg[perm[i]])) for i in range(n)]
        for relabel in itertools.product(*choices):
            nodes += 1
            if nodes > budget:
                return None
            if apply_isomorphism(F, Isomorphism(perm, relabel)) == G:
                return True
    return False


# measures


def measure(F: Code) -> Fraction:
    return F.measure()


def measure_under(F: Code, nu) -> Fraction | float:
    """nu(F) for a product measure; exact when nu carries rational weights."""
    if nu.radices != F.shape.dims:
        raise ShapeError("measure does not match code shape")
    return nu.measure_of(F.table)


# text format


def dumps(F: Code, enc: str = "list") -> str:
    head = f"anticode v1 m={F.m} n={F.n} enc={enc}"
    if enc == "list":
        lines = [" ".join(str(a + 1) for a in p) for p in F.points()]
        return "\n".join([head, *lines]) + "\n"
    if enc == "hex":
        bits = np.packbits(F.table.ravel().astype(np.uint8), bitorder="little")
        hx = bits.tobytes().hex()
        lines = [hx[i:i + 64] for i in range(0, len(hx), 64)]
        return "\n".join([head, *lines]) + "\n"
    raise ValueError(f"unknown encoding {enc!r}")


def _parse_header(line: str, magic: str) -> dict[str, str]:
    parts = line.split()
    if parts[:2] != [magic, "v1"]:
        raise ValueError(f"not a {magic} v1 file")
    return dict(p.split("=", 1) for p in parts[2:])


def loads(text: str) -> Code:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty code file")
    hdr = _parse_header(lines[0], "anticode")
    shape = Shape(int(hdr["m"]), int(hdr["n"]))
    enc = hdr.get("enc", "list")
    body = lines[1:]
    if enc == "list":
        if shape.n == 0:
            # the only point is the empty word, written as a blank line
            return Code(shape, np.array(len(body) > 0))
        pts = [tuple(int(a) - 1 for a in ln.split()) for ln in body if ln.strip()]
        return Code.from_points(shape, pts)
    if enc == "hex":
        raw = bytes.fromhex("".join("".join(body).split()))
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        if len(raw) != (shape.size + 7) // 8:
            raise ValueError("hex payload has the wrong length")
        return Code(shape, bits[:shape.size].astype(bool).reshape(shape.dims))
    raise ValueError(f"unknown encoding {enc!r}")


def point_str(p: Sequence[int]) -> str:
    return "(" + ",".join(str(a + 1) for a in p) + ")"


def census(F: Code) -> Counter:
    """Count of members by number of coordinates equal to symbol 1."""
    return Counter(int(w) for w in (F.points() == 0).sum(axis=1))
