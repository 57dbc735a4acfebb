"""Seeded, splittable random streams.

All randomness in the package flows from one explicit 64-bit seed through
Philox (counter-based) generators.  Independent child streams are derived
with SeedSequence spawning, so parallel shots and sweep points are
reproducible bit-for-bit regardless of evaluation order.
"""
from __future__ import annotations

import numpy as np


def stream(seed: int) -> np.random.Generator:
    """Root generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def split(seed: int, n: int) -> list[np.random.Generator]:
    """n independent child generators derived from one seed."""
    children = np.random.SeedSequence(int(seed)).spawn(int(n))
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def random_phase_unitary(d: int, seed) -> np.ndarray:
    """Diagonal unitary of independent uniform phases."""
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed)
    return np.diag(np.exp(2j * np.pi * rng.random(d)))
