"""Seeded, chunked Monte Carlo helpers.

Trials are cut into fixed chunks, each with its own child of one
SeedSequence, so results do not depend on how many workers run them.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 4096
ENV_SEED = "ANTICODE_SEED"


def effective_seed(seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get(ENV_SEED)
    return int(env) if env not in (None, "") else 0


def chunk_plan(trials: int, chunk: int = CHUNK) -> list[int]:
    sizes = [chunk] * (trials // chunk)
    if trials % chunk:
        sizes.append(trials % chunk)
    return sizes


def run_chunks(work, seed: int, trials: int, jobs: int = 1, chunk: int = CHUNK) -> list:
    """Call ``work(rng, size)`` on every chunk and return results in chunk order."""
    sizes = chunk_plan(trials, chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = [(np.random.default_rng(c), s) for c, s in zip(children, sizes)]
    if jobs <= 1 or len(tasks) <= 1:
        return [work(r, s) for r, s in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(lambda t: work(*t), tasks))


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """A generator keyed by seed and a fixed path of integers."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))
