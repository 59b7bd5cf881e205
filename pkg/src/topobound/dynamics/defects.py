"""Classical defect dynamics standing in for dissipative toric-code preparation.

Defects live on the vertices of the L x L torus and annihilate in pairs when
they meet (occupancy is taken mod 2 after each step).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from topobound.errors import ContractViolation
from topobound.rng import trial_rng, trial_seed

DYNAMICS = ("sweep", "diffusive")


@dataclass
class DefectConfig:
    """Defect indicator on the vertex torus, indexed ``[y, x]``."""

    L: int
    defects: np.ndarray
    step: int = 0

    @property
    def count(self) -> int:
        return int(self.defects.sum())

    @property
    def parity(self) -> int:
        return self.count & 1

    def positions(self) -> np.ndarray:
        return np.argwhere(self.defects)


def sample_even_defects(L: int, rng: np.random.Generator) -> np.ndarray:
    """Each vertex defective with probability 1/2, resampled until the parity is even."""
    while True:
        grid = rng.integers(0, 2, size=(L, L), dtype=np.uint8)
        if not grid.sum() & 1:
            return grid


def sweep_step(grid: np.ndarray) -> np.ndarray:
    """Move every defect one step toward column 0, then down column 0 to (0, 0)."""
    L = grid.shape[0]
    new = np.zeros_like(grid)
    new[:, : L - 1] ^= grid[:, 1:]
    new[: L - 1, 0] ^= grid[1:, 0]
    new[0, 0] ^= grid[0, 0]
    return new


def _neighbor_table(L: int) -> np.ndarray:
    idx = np.arange(L * L)
    y, x = divmod(idx, L)
    return np.stack([
        idx,
        y * L + (x + 1) % L,
        y * L + (x - 1) % L,
        ((y + 1) % L) * L + x,
        ((y - 1) % L) * L + x,
    ])


def _annihilate(pos: np.ndarray) -> np.ndarray:
    values, counts = np.unique(pos, return_counts=True)
    return values[counts & 1 == 1]


def run_sweep(grid: np.ndarray, max_steps: int | None = None, track_parity: bool = False) -> int:
    """Steps until the sweep dynamics clears ``grid``."""
    L = grid.shape[0]
    limit = 2 * L if max_steps is None else max_steps
    steps = 0
    while grid.any():
        if steps >= limit:
            raise RuntimeError(f"sweep did not clear within {limit} steps")
        grid = sweep_step(grid)
        steps += 1
        if track_parity and grid.sum() & 1:
            raise AssertionError("defect parity changed")
    return steps


def run_diffusive(grid: np.ndarray, rng: np.random.Generator, max_steps: int = 10**8,
                  track_parity: bool = False) -> int:
    """Steps until lazy annihilating random walkers clear ``grid``.

    Each defect stays or moves to one of its four neighbors with equal
    probability.  Laziness matters: with simultaneous non-lazy moves on an
    even torus, two walkers on opposite sublattices never share a site.
    """
    L = grid.shape[0]
    table = _neighbor_table(L)
    pos = np.flatnonzero(grid.ravel())
    steps = 0
    while pos.size:
        if steps >= max_steps:
            raise RuntimeError(f"diffusive dynamics did not clear within {max_steps} steps")
        moves = rng.integers(0, 5, size=pos.size)
        pos = _annihilate(table[moves, pos])
        steps += 1
        if track_parity and pos.size & 1:
            raise AssertionError("defect parity changed")
    return steps


def nearest_neighbor_bound(grid: np.ndarray) -> int:
    """Lower bound on clearing time: max over defects of half the distance to the nearest other defect.

    Distances are Manhattan on the torus; a defect cannot vanish before some
    partner reaches it, and both move at most one site per step.
    """
    pos = np.argwhere(grid)
    if len(pos) < 2:
        return 0
    L = grid.shape[0]
    diff = np.abs(pos[:, None, :] - pos[None, :, :])
    dist = np.minimum(diff, L - diff).sum(axis=-1)
    np.fill_diagonal(dist, np.iinfo(dist.dtype).max)
    nearest = dist.min(axis=1)
    return int(-(-nearest.max() // 2))


@dataclass
class TrialRow:
    L: int
    dynamics: str
    trial: int
    seed: int
    initial_defects: int
    steps_to_clear: int
    lower_bound: int


def dissipative_prep_mc(L: int, dynamics: str, trials: int, seed: int) -> list[TrialRow]:
    """Monte Carlo of defect clearing from random even-parity configurations.

    Trial ``t`` uses the Philox stream derived from ``(seed, t)``, so rows do
    not depend on evaluation order.
    """
    if L < 2:
        raise ContractViolation("need L >= 2")
    if trials < 1:
        raise ContractViolation("need at least one trial")
    if dynamics not in DYNAMICS:
        raise ContractViolation(f"unknown dynamics {dynamics!r}; choose from {DYNAMICS}")
    rows = []
    for t in range(trials):
        s = trial_seed(seed, t)
        rng = trial_rng(seed, t)
        grid = sample_even_defects(L, rng)
        bound = nearest_neighbor_bound(grid)
        if dynamics == "sweep":
            steps = run_sweep(grid)
        else:
            steps = run_diffusive(grid, rng)
        rows.append(TrialRow(L, dynamics, t, s, int(grid.sum()), steps, bound))
    return rows
