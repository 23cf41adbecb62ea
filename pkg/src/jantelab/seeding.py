"""Deterministic per-run random streams.

Each run of an ensemble gets its own generator, seeded by a
splitmix-style hash of (master seed, run index). The derivation is a
pure function of those two integers, so results never depend on worker
count or scheduling order.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed", "run_rng", "splitmix64"]

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, (z ^ (z >> 31)) & _MASK


def derive_seed(master_seed: int, run_index: int) -> int:
    """64-bit seed for one run, independent of every other run's."""
    state = master_seed & _MASK
    state, a = splitmix64(state)
    state, _ = splitmix64(state ^ (run_index & _MASK))
    _, b = splitmix64(state)
    return (a ^ b) & _MASK


def run_rng(master_seed: int, run_index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, run_index))
