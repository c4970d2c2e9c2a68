"""Deterministic, splittable random streams.

Every random quantity in the package is drawn from a stream derived from
a master seed plus a path of string/integer tags, so any (trial, purpose)
pair gets an independent generator and whole experiments replay
bit-identically from one integer.

The derivation is documented and stable: string tags are hashed to 64-bit
integers with SHA-256, and the tuple (master_seed, *tag_codes) is fed to
``numpy.random.SeedSequence``, which drives a PCG64 generator.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _tag_code(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(str(tag).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(master_seed: int, *tags) -> np.random.Generator:
    """Return the generator for stream (master_seed, *tags)."""
    entropy = (int(master_seed) & 0xFFFFFFFFFFFFFFFF,) + tuple(_tag_code(t) for t in tags)
    return np.random.default_rng(np.random.SeedSequence(entropy))
