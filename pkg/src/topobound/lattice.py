"""Periodic lattice geometry: sites, regions, torus metric, cubes and neighborhoods.

Sites are qubit indices with integer coordinates in the doubled convention:
vertices sit at even tuples, edge midpoints at mixed tuples and faces at odd
tuples.  The metric is the L-infinity distance on the doubled-coordinate
torus, so a cube of cells is a metric ball and every distance is an integer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from topobound.errors import ContractViolation

METRIC = "torus-linf-doubled"


class Lattice:
    """Sites of a D-dimensional periodic lattice in doubled coordinates.

    Args:
        coords: one integer coordinate tuple per qubit index.
        extent: per-axis period in doubled units (twice the linear size).
    """

    def __init__(self, coords: Sequence[Sequence[int]], extent: Sequence[int]):
        extent = tuple(int(e) for e in extent)
        if not extent or any(e <= 0 for e in extent):
            raise ContractViolation(f"invalid extent {extent}")
        arr = np.asarray(coords, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != len(extent):
            raise ContractViolation(
                f"coordinates must have shape (n, {len(extent)}), got {arr.shape}"
            )
        self.extent = extent
        self.dim = len(extent)
        self.coords = np.mod(arr, np.asarray(extent))
        self.coords.flags.writeable = False

    @property
    def n(self) -> int:
        return int(self.coords.shape[0])

    @property
    def cells_per_axis(self) -> tuple[int, ...]:
        return tuple(max(1, e // 2) for e in self.extent)

    @property
    def diameter(self) -> int:
        return max(e // 2 for e in self.extent)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Lattice):
            return NotImplemented
        return self.extent == other.extent and np.array_equal(self.coords, other.coords)

    def __hash__(self) -> int:
        return hash((self.extent, self.coords.tobytes()))

    def __repr__(self) -> str:
        return f"Lattice(n={self.n}, extent={self.extent})"

    def site_distance(self, a: int, b: int) -> int:
        diff = np.abs(self.coords[a] - self.coords[b])
        ext = np.asarray(self.extent)
        return int(np.minimum(diff, ext - diff).max())

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """All pairwise site distances, computed once per lattice."""
        ext = np.asarray(self.extent)
        out = np.zeros((self.n, self.n), dtype=np.int32)
        for axis in range(self.dim):
            c = self.coords[:, axis]
            diff = np.abs(c[:, None] - c[None, :])
            np.maximum(out, np.minimum(diff, ext[axis] - diff), out=out)
        out.flags.writeable = False
        return out

    def region(self, sites: Iterable[int]) -> Region:
        return Region(frozenset(int(s) for s in sites), self)

    def all_sites(self) -> Region:
        return self.region(range(self.n))

    def cell_of(self, site: int) -> tuple[int, ...]:
        return tuple(int(c) // 2 for c in self.coords[site])

    @cached_property
    def _cells(self) -> np.ndarray:
        return self.coords // 2

    def distance(self, x: int, B: Region) -> int:
        """Distance from site ``x`` to the nearest site of ``B``."""
        self._check_region(B)
        if not 0 <= x < self.n:
            raise ContractViolation(f"site {x} not on the lattice")
        return int(self.distance_matrix[x, B.indices].min())

    def region_distance(self, B1: Region, B2: Region) -> int:
        """Minimum pairwise distance between two nonempty regions."""
        self._check_region(B1)
        self._check_region(B2)
        return int(self.distance_matrix[np.ix_(B1.indices, B2.indices)].min())

    def neighborhood(self, B: Region, r: int) -> Region:
        """All sites within distance ``r`` of ``B``."""
        if r < 0:
            raise ContractViolation("neighborhood radius must be non-negative")
        if not B.sites:
            return B
        close = (self.distance_matrix[:, B.indices] <= r).any(axis=1)
        return self.region(np.flatnonzero(close))

    def cube(self, v: int | Sequence[int], R: int) -> Region:
        """Qubits in the cube of R cells per axis around cell ``v``.

        ``v`` is either a cell tuple or a site index (which selects its cell).
        For even R the center cell is the lower corner of the central block.
        """
        if R < 1:
            raise ContractViolation("cube size must be at least 1")
        center = self.cell_of(v) if isinstance(v, (int, np.integer)) else tuple(v)
        if len(center) != self.dim:
            raise ContractViolation(f"cell {center} has wrong dimension")
        ncells = self.cells_per_axis
        lo = -((R - 1) // 2)
        inside = np.ones(self.n, dtype=bool)
        for axis in range(self.dim):
            if R >= ncells[axis]:
                continue
            offset = np.mod(self._cells[:, axis] - center[axis] - lo, ncells[axis])
            inside &= offset < R
        return self.region(np.flatnonzero(inside))

    def diameter_of(self, sites: Iterable[int]) -> int:
        idx = sorted(sites)
        if not idx:
            return 0
        return int(self.distance_matrix[np.ix_(idx, idx)].max())

    def all_cells(self) -> list[tuple[int, ...]]:
        return [tuple(c) for c in np.ndindex(*self.cells_per_axis)]

    def _check_region(self, B: Region) -> None:
        if not B.sites:
            raise ContractViolation("region is empty")

    def to_json(self) -> dict:
        return {"coords": self.coords.tolist(), "extent": list(self.extent), "metric": METRIC}


@dataclass(frozen=True)
class Region:
    """Finite set of qubit indices on a lattice."""

    sites: frozenset
    lattice: Lattice | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.lattice is not None and self.sites:
            if min(self.sites) < 0 or max(self.sites) >= self.lattice.n:
                raise ContractViolation("region contains sites outside the lattice")

    @classmethod
    def parse(cls, text: str, lattice: Lattice | None = None) -> Region:
        text = text.strip()
        sites = frozenset(int(t) for t in text.split(",") if t.strip()) if text else frozenset()
        return cls(sites, lattice)

    @cached_property
    def indices(self) -> np.ndarray:
        return np.asarray(sorted(self.sites), dtype=np.int64)

    @property
    def mask(self) -> int:
        m = 0
        for s in self.sites:
            m |= 1 << s
        return m

    def __str__(self) -> str:
        return ",".join(str(s) for s in sorted(self.sites))

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(sorted(self.sites))

    def __contains__(self, site) -> bool:
        return site in self.sites

    def _wrap(self, sites) -> Region:
        return Region(frozenset(sites), self.lattice)

    def __or__(self, other: Region) -> Region:
        return self._wrap(self.sites | other.sites)

    def __and__(self, other: Region) -> Region:
        return self._wrap(self.sites & other.sites)

    def __sub__(self, other: Region) -> Region:
        return self._wrap(self.sites - other.sites)

    def __le__(self, other: Region) -> bool:
        return self.sites <= other.sites

    def complement(self) -> Region:
        if self.lattice is None:
            raise ContractViolation("complement needs a lattice")
        return self._wrap(set(range(self.lattice.n)) - self.sites)

    def isdisjoint(self, other: Region) -> bool:
        return self.sites.isdisjoint(other.sites)
