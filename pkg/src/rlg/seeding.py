"""Deterministic seed derivation.

Streams are Philox (counter-based) generators keyed by a SeedSequence built
from ``(base, replicate, purpose)``, so replicates can run in any order or
process and still draw the same numbers.
"""
from __future__ import annotations

import os
import zlib

import numpy as np

DEFAULT_SEED = 20240601
SEED_ENV = "RLG_SEED"


def purpose_code(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def derive_seed(base: int, replicate: int, purpose: str) -> int:
    """A 64-bit seed for one ``(replicate, purpose)`` stream of a run."""
    ss = np.random.SeedSequence(int(base), spawn_key=(int(replicate), purpose_code(purpose)))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)


def make_rng(seed) -> np.random.Generator:
    """Generator from an int seed; an existing Generator is passed through."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.Generator(np.random.Philox(int(seed)))


def base_seed_from_env(default: int = DEFAULT_SEED) -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return default
    return int(raw)
