"""Seeded random streams.

Every stochastic routine in the package draws from a Philox generator whose
key is derived from ``(seed, stream)`` by hashing, so independent consumers of
one master seed never share state and results do not depend on call order.
"""

from __future__ import annotations

import hashlib

import numpy as np

DEFAULT_SEED = 20240601


def _key(seed: int, stream: int) -> int:
    payload = f"{int(seed)}:{int(stream)}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Return the generator for stream ``index`` of master ``seed``."""
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=_key(seed, index)))


def substreams(seed: int, count: int, offset: int = 0) -> list[np.random.Generator]:
    return [stream(seed, offset + i) for i in range(count)]
