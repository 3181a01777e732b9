"""Deterministic random-stream derivation.

Every stochastic quantity in the package draws from a Generator derived
from ``(master_seed, *keys)`` where keys are small ints (batch or frame
indices) and purpose strings ("bits", "chan", ...).  String keys are
hashed with SHA-256 so derivation does not depend on the interpreter's
hash randomization.  Identical (seed, keys) always yield an identical
stream; distinct purposes yield statistically independent streams.
"""
from __future__ import annotations

import hashlib

import numpy as np

from .errors import InvalidArgument

_MASK64 = (1 << 64) - 1


def _as_entropy(part) -> int:
    if isinstance(part, bool):
        raise InvalidArgument(f"bad stream key {part!r}: bool keys are ambiguous")
    if isinstance(part, (int, np.integer)):
        return int(part) & _MASK64
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise InvalidArgument(f"bad stream key {part!r}: expected int or str")


def seed_sequence(master_seed: int, *keys) -> np.random.SeedSequence:
    entropy = [_as_entropy(master_seed)] + [_as_entropy(k) for k in keys]
    return np.random.SeedSequence(entropy)


def stream(master_seed: int, *keys) -> np.random.Generator:
    """Generator for the given master seed and key path."""
    return np.random.default_rng(seed_sequence(master_seed, *keys))


def subseed(master_seed: int, *keys) -> int:
    """A derived 64-bit seed, usable as the master seed of a sub-phase."""
    return int(seed_sequence(master_seed, *keys).generate_state(1, np.uint64)[0])
