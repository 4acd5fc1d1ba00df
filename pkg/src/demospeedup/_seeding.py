"""Stable seed derivation for per-frame sampling.

The builtin hash() is salted per process, which would make sampling
irreproducible across runs, so seeds are derived from a keyed blake2b
digest instead.
"""

from __future__ import annotations

import hashlib

_MASK = (1 << 64) - 1


def derive_seed(base: int, *parts: object) -> int:
    """Mix a base seed with a stable 64-bit hash of the given parts."""
    tag = "|".join(str(p) for p in parts).encode("utf-8")
    digest = hashlib.blake2b(tag, digest_size=8).digest()
    return (int(base) ^ int.from_bytes(digest, "little")) & _MASK
