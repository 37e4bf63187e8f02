"""Seeded random streams.

Every stochastic component draws from a ``random.Random`` built here, so a
single master seed fixes all output. Sub-streams are derived by hashing the
master seed together with a key path (trial index, route index, ...), which
keeps results independent of evaluation order.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, *keys: object) -> int:
    """Return a 64-bit seed derived from ``seed`` and a key path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for key in keys:
        h.update(b"/")
        h.update(str(key).encode())
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int, *keys: object) -> random.Random:
    if not keys:
        return random.Random(int(seed))
    return random.Random(derive_seed(seed, *keys))


def rand(rng: random.Random, alpha: float, beta: float) -> float:
    """Uniform draw on the half-open interval [alpha, beta)."""
    return alpha + (beta - alpha) * rng.random()


def rand_index(rng: random.Random, n: int) -> int:
    """floor(rand(0, n)) -- a uniform index into a sequence of length n."""
    # min() guards the float product rounding up to n
    return min(int(rng.random() * n), n - 1)
