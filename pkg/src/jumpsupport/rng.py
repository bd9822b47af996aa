"""Reproducible random streams.

Every Monte-Carlo path draws from its own generator, keyed by the master
seed, a named stream and the path index, so results do not depend on how
paths are split across workers.
"""
from __future__ import annotations

import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

MAX_SEED = 2**64 - 1


def _key(name):
    if isinstance(name, (int, np.integer)):
        return int(name)
    return zlib.crc32(str(name).encode("utf-8"))


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    if not 0 <= int(seed) <= MAX_SEED:
        raise ValueError(f"seed must lie in [0, 2^64), got {seed}")
    return int(seed)


@dataclass(frozen=True)
class Streams:
    """Factory of independent generators derived from one master seed."""

    seed: int

    def __post_init__(self):
        object.__setattr__(self, "seed", check_seed(self.seed))

    def generator(self, *key):
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(_key(k) for k in key))
        return np.random.Generator(np.random.PCG64(ss))


def substream(seed, *key):
    """Generator for ``key`` under master ``seed``."""
    return Streams(seed).generator(*key)


def _run_chunk(args):
    fn, seed, key, lo, hi = args
    streams = Streams(seed)
    return [fn(i, streams.generator(*key, i)) for i in range(lo, hi)]


def map_paths(fn, n, seed, key, jobs=1, chunk=None):
    """``[fn(i, rng_i) for i in range(n)]`` with per-index substreams.

    ``fn`` must be picklable when ``jobs > 1``.  The result is identical for
    every value of ``jobs``.
    """
    key = tuple(key) if isinstance(key, (tuple, list)) else (key,)
    jobs = max(1, int(jobs or 1))
    if jobs == 1 or n < 2:
        return _run_chunk((fn, seed, key, 0, n))
    chunk = chunk or max(1, -(-n // (4 * jobs)))
    tasks = [(fn, seed, key, lo, min(n, lo + chunk)) for lo in range(0, n, chunk)]
    out = []
    with ProcessPoolExecutor(max_workers=min(jobs, os.cpu_count() or 1, len(tasks))) as pool:
        for part in pool.map(_run_chunk, tasks):
            out.extend(part)
    return out
