"""Seeded random streams.

Every stochastic routine takes an explicit integer seed and builds its own
generator here, so there is no global RNG state. The bit generator is
Philox-4x64 (counter-based); Gaussians come from numpy's ziggurat
transform, which makes histograms bit-reproducible for a pinned seed.
"""

import numpy as np


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def spawn_seeds(seed, count: int) -> list[int]:
    """Deterministic, independent child seeds for concurrent trials."""
    ss = np.random.SeedSequence(int(seed))
    return [int(child.generate_state(1, np.uint64)[0]) for child in ss.spawn(count)]
