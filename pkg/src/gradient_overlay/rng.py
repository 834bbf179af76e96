"""Purpose-tagged RNG streams.

Every randomized component derives its generator from (root seed, purpose
tag) through SeedSequence, so adding or removing one consumer never perturbs
the draws of another and whole runs replay bit-for-bit from the root seed.
"""

from __future__ import annotations

import numpy as np

TAG_TOPOLOGY_INIT = 0
TAG_PEER_SAMPLING = 1
TAG_EVICTION_TIEBREAK = 2
TAG_CHAIN_ENSEMBLE = 3
TAG_SCENARIO_EVENTS = 4
TAG_NODE_CLASSES = 5
TAG_LATENCY_MAP = 6
TAG_BLOCK_CHOICE = 7
TAG_SAMPLER_VIEW = 8
TAG_SEED_SWEEP = 9


def stream(seed: int, tag: int, *extra: int) -> np.random.Generator:
    """Generator for (seed, tag) plus optional sub-keys (e.g. node pairs)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=[int(seed), tag, *map(int, extra)]))


def sweep_seeds(seed: int, count: int) -> list[int]:
    """Derive `count` independent root seeds for repeated runs."""
    rng = stream(seed, TAG_SEED_SWEEP)
    return [int(s) for s in rng.integers(0, 2**63 - 1, size=count)]
