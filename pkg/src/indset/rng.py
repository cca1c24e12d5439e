"""Seeded random streams.

All randomness goes through numpy's PCG64 bit generator. Named substreams are
derived from a root seed with a stable CRC of the stage name, so a partial
re-run of one stage sees the same numbers as a full run.
"""

from __future__ import annotations

import zlib

import numpy as np

BIT_GENERATOR = "PCG64"


def stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def make_rng(seed=None, *names: str) -> np.random.Generator:
    """Return a generator for ``seed`` and an optional path of stage names.

    Passing an existing ``Generator`` with no names returns it unchanged, which
    lets callers thread one stream through several helpers.
    """
    if isinstance(seed, np.random.Generator):
        if not names:
            return seed
        seed = int(seed.integers(0, 2**63))
    if seed is None:
        seed = 0
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [stream_key(n) for n in names]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def spawn(seed, count: int, *names: str) -> list[np.random.Generator]:
    """Independent per-task streams, e.g. one per Markov chain."""
    return [make_rng(seed, *names, f"#{i}") for i in range(count)]
