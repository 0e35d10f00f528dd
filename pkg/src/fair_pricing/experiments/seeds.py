"""Deterministic 64-bit seed derivation for sweep cells and trials.

    cell_key   = first 8 bytes (big-endian) of sha256("policy|lambda|T")
    trial_seed = splitmix64(splitmix64(splitmix64(base) ^ cell_key) ^ trial)

with ``lambda`` formatted by ``repr(float(lam))``.
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer of a 64-bit integer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def cell_key(policy: str, lam: float, T: int) -> int:
    digest = hashlib.sha256(f"{policy}|{float(lam)!r}|{int(T)}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def trial_seed(base_seed: int, policy: str, lam: float, T: int, trial: int) -> int:
    mixed = splitmix64(splitmix64(base_seed & MASK64) ^ cell_key(policy, lam, T))
    return splitmix64(mixed ^ (trial & MASK64))
