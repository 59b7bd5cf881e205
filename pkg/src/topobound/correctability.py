"""Correctable regions, operator cleaning and the cube sweep."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from topobound.algebra import BitMatrix, PauliOp, solve
from topobound.codes import StabilizerCode, distance
from topobound.errors import CleaningObstruction, ContractViolation, SetupError
from topobound.lattice import Region


@dataclass(frozen=True)
class CleaningResult:
    """A logical operator and its equivalent copy supported off the cleaned region.

    ``stabilizer_certificate[i]`` is 1 when generator ``i`` was multiplied in.
    """

    original: PauliOp
    cleaned: PauliOp
    stabilizer_certificate: np.ndarray = field(compare=False)


def _restricted_columns(code: StabilizerCode, sites) -> BitMatrix:
    sites = sorted(sites)
    cols = sites + [s + code.n for s in sites]
    return code.check_matrix.columns(cols)


def _restricted_rank(code: StabilizerCode, sites) -> int:
    if not sites or not code.generators:
        return 0
    return _restricted_columns(code, sites).rank()


def logical_count_on(code: StabilizerCode, gamma: Region) -> int:
    """Number of independent logical classes with a representative inside ``gamma``.

    Centralizer operators on the region number ``2|Γ| - rank(G|Γ)`` and the
    stabilizer elements among them ``r - rank(G|Γᶜ)``; the difference counts
    logical directions.
    """
    inside = sorted(gamma.sites)
    outside = sorted(set(range(code.n)) - gamma.sites)
    centralizer = 2 * len(inside) - _restricted_rank(code, inside)
    stabilizers = code.num_generators - _restricted_rank(code, outside)
    return centralizer - stabilizers


def is_correctable(code: StabilizerCode, gamma: Region) -> bool:
    """True iff no nontrivial logical operator is supported inside ``gamma``."""
    if gamma.sites and (min(gamma.sites) < 0 or max(gamma.sites) >= code.n):
        raise ContractViolation("region contains sites outside the code")
    return logical_count_on(code, gamma) == 0


def clean(code: StabilizerCode, P: PauliOp, gamma: Region) -> CleaningResult:
    """Multiply ``P`` by a stabilizer so that the result acts trivially on ``gamma``.

    Solves ``(prod_i g_i^{c_i})|Γ = P|Γ`` over generator coefficients ``c``.
    Among several solutions the solver's pivot order picks one.

    Raises:
        ContractViolation: if ``P`` anticommutes with a generator.
        CleaningObstruction: if no stabilizer matches ``P`` on ``gamma``.
    """
    if P.n != code.n:
        raise ContractViolation("operator size does not match the code")
    if code.syndrome(P):
        raise ContractViolation(f"{P} is not in the centralizer of the stabilizer group")
    sites = sorted(gamma.sites)
    if not sites or not (P.support_mask & gamma.mask):
        return CleaningResult(P, P, np.zeros(code.num_generators, dtype=np.uint8))
    M = _restricted_columns(code, sites).transpose()
    target = P.restricted(sites)
    rhs = np.concatenate([target.x_bits[sites], target.z_bits[sites]])
    coeffs = solve(M, rhs)
    if coeffs is None:
        certified = is_correctable(code, gamma)
        msg = f"{P} cannot be cleaned off the region"
        if certified:
            msg += " although the region is correctable (internal inconsistency)"
        raise CleaningObstruction(msg, inconsistent=certified)
    cleaned = P * code.stabilizer_element(coeffs)
    return CleaningResult(P, cleaned, coeffs)


@dataclass
class SweepRow:
    R: int
    all_correctable: bool
    num_cubes_tested: int


@dataclass
class SweepResult:
    """Cube-correctability table for one code."""

    code: str
    L: int | None
    d: int
    xi: int
    rows: list[SweepRow]
    R_star: int
    dim: int = 2

    @property
    def ratio(self) -> float:
        """R* divided by d^(1/(D-1))."""
        return self.R_star / (self.d ** (1.0 / max(self.dim - 1, 1)))


def lemma1_sweep(code: StabilizerCode, known_distance: int | None = None) -> SweepResult:
    """Test every centered cube ``Γ_R(v)`` for every ``R`` up to the lattice size.

    Args:
        code: the code to sweep.
        known_distance: exact distance if already certified elsewhere; otherwise
            it is computed exactly (which may raise ``DistanceInfeasible``).
    """
    d = known_distance if known_distance is not None else distance(code).d
    lat = code.lattice
    cells = lat.all_cells()
    rows = []
    for R in range(1, max(lat.cells_per_axis) + 1):
        seen = set()
        ok = True
        for v in cells:
            cube = lat.cube(v, R)
            if cube.sites in seen:
                continue
            seen.add(cube.sites)
            if not is_correctable(code, cube):
                ok = False
                break
        rows.append(SweepRow(R, ok, len(seen)))
    R_star = 0
    for row in rows:
        if not row.all_correctable:
            break
        R_star = row.R
    return SweepResult(code.name, code.metadata.get("L"), d, code.xi, rows, R_star, lat.dim)


@dataclass
class Theorem1Regions:
    """Regions and logical operator used by the distinguishability argument."""

    gamma: Region
    B: Region
    P_B: PauliOp
    R: int
    center: tuple
    d_BA: int
    cleaning: CleaningResult


def construct_theorem1_regions(code: StabilizerCode, A: Region) -> Theorem1Regions:
    """Find a large correctable cube around ``A`` and a logical supported off it.

    Cube sizes are tried from largest to smallest.  For each size, centers
    whose cube contains ``A`` are ranked by the distance between ``A`` and the
    cube's complement, and the first correctable one is used.  ``P_B`` is the
    first logical basis operator that can be cleaned out of the cube.

    Raises:
        SetupError: if no correctable cube strictly containing ``A`` exists.
    """
    if not A.sites:
        raise ContractViolation("region A is empty")
    lat = code.lattice
    for R in range(max(lat.cells_per_axis), 0, -1):
        options = []
        for v in lat.all_cells():
            cube = lat.cube(v, R)
            if not A.sites < cube.sites or len(cube) == lat.n:
                continue
            B = cube.complement()
            options.append((-lat.region_distance(B, A), v, cube, B))
        options.sort(key=lambda t: t[0])
        for neg_d, v, cube, B in options:
            if not is_correctable(code, cube):
                continue
            for op in code.logical_operators:
                try:
                    res = clean(code, op, cube)
                except CleaningObstruction:
                    continue
                return Theorem1Regions(cube, B, res.cleaned, R, tuple(v), -neg_d, res)
    raise SetupError("no correctable cube strictly contains A; the code is too small")
