"""Seeded randomness with derivable per-subsystem streams.

Every random draw in a simulation comes from a numpy PCG64 generator whose
seed is derived from the scenario seed plus a fixed stream id, so workload
synthesis, RTT sampling, index construction and document generation stay
independent and reproducible bit-for-bit across runs and platforms.

splitmix64 is used for stateless 64-bit hashing (prompt keys, per-request
confidence values) where a value must depend only on its inputs, not on how
many draws happened before it.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Fixed stream ids; changing these changes every seeded run.
STREAM_WORKLOAD = 1
STREAM_RTT = 2
STREAM_CONFIDENCE = 3
STREAM_ANN = 4
STREAM_DOCS = 5

_PROMPT_KEY_SALT = 0x9E3779B97F4A7C15
_CONFIDENCE_SALT = 0xD1B54A32D192ED03


def splitmix64(x: int) -> int:
    """One splitmix64 step: maps a 64-bit integer to a well-mixed 64-bit integer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def substream(seed: int, stream_id: int) -> np.random.Generator:
    """Return an independent generator for (scenario seed, subsystem stream id)."""
    if not 0 <= seed < (1 << 64):
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, stream_id))))


def prompt_key_for_rank(rank: int) -> int:
    """Deterministic 64-bit prompt identity for a popularity rank (seed independent)."""
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    return splitmix64(_PROMPT_KEY_SALT ^ rank)


def confidence_for_request(seed: int, request_id: int) -> float:
    """Per-request confidence in [0, 1), a pure function of (seed, request id)."""
    h = splitmix64(splitmix64((seed ^ _CONFIDENCE_SALT) & _MASK64) ^ request_id)
    # 53-bit mantissa yields a uniform double strictly below 1.
    return (h >> 11) / float(1 << 53)
