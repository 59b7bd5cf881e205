"""Deterministic seeding with counter-based streams.

Every trial ``t`` of a run with master seed ``s`` uses the Philox stream keyed
by ``SeedSequence(entropy=s, spawn_key=(t,))``, so trials can run in any order
or on any worker and still reproduce.
"""

from __future__ import annotations

import numpy as np


def trial_seed(seed: int, trial: int) -> int:
    """64-bit seed derived from ``(seed, trial)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return make_rng(trial_seed(seed, trial))
