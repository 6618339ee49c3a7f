"""Seeded random streams.

Every randomized operation takes a plain integer seed and derives its own
PCG64 stream from ``(seed, tag...)`` through numpy's ``SeedSequence``.  Tags
are hashed with CRC32 so the derivation is stable across processes and
Python versions (``hash()`` is salted and is never used here).
"""
from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def _tag_words(tags) -> list[int]:
    words = []
    for t in tags:
        if isinstance(t, (int, np.integer)):
            t = int(t) & MASK64
            words.extend([t & 0xFFFFFFFF, t >> 32])
        else:
            words.append(zlib.crc32(str(t).encode("utf-8")))
    return words


def seed_sequence(seed: int, *tags) -> np.random.SeedSequence:
    seed = int(seed)
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, *_tag_words(tags)])


def make_rng(seed: int, *tags) -> np.random.Generator:
    """Independent generator for ``seed`` restricted to the stream ``tags``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *tags)))


def derive_seed(seed: int, *tags) -> int:
    """A new 64-bit seed for a sub-operation, e.g. ``derive_seed(s, "balance")``."""
    lo, hi = seed_sequence(seed, *tags).generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)
