"""Order-independent seed splitting.

Every stream is addressed by a key path ``(master, scenario, trial, ...)``,
so adding trials or changing the worker count never perturbs existing ones.
"""
from __future__ import annotations

import numpy as np

SCENARIO_TAGS = {
    "localise": 1,
    "split-law": 1,       # same landscapes as localise on purpose
    "gamma-scaling": 3,
    "events": 4,
    "extremes": 5,
    "pmf-check": 6,
}


def _sequence(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))


def child_seed(master: int, *key: int) -> int:
    """64-bit seed for the stream at ``key`` (used as a landscape key)."""
    return int(_sequence(master, *key).generate_state(1, dtype=np.uint64)[0])


def child_rng(master: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_sequence(master, *key)))
