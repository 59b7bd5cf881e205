"""Logical-measurement statistics: dense ground spaces, entropic bounds and strip correlations.

Dense state vectors index basis states by integers whose bit ``j`` is the
value of qubit ``j``.  Entropies are in bits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from topobound.algebra import PauliOp, symplectic_commutes
from topobound.codes import StabilizerCode, toric2d_v
from topobound.dynamics.circuit import LocalCircuit, heisenberg_evolve, heisenberg_support
from topobound.dynamics.experiment import expectation_on_zero_state
from topobound.errors import ContractViolation, ResourceBudgetError, SetupError
from topobound.rng import make_rng

MAX_DENSE_QUBITS = 20
ANYON_LABELS = {(1, 1): "1", (-1, 1): "e", (1, -1): "m", (-1, -1): "eps"}
_LABEL_ORDER = ["1", "e", "m", "eps"]


def _check_dense(n: int) -> None:
    if n > MAX_DENSE_QUBITS:
        raise ResourceBudgetError(f"dense simulation limited to {MAX_DENSE_QUBITS} qubits, got {n}")


def apply_pauli(P: PauliOp, psi: np.ndarray) -> np.ndarray:
    """``P psi`` for a state vector (or a matrix of column vectors)."""
    n = P.n
    if psi.shape[0] != 1 << n:
        raise ContractViolation(f"vector of length {psi.shape[0]} for {n} qubits")
    idx = np.arange(1 << n, dtype=np.uint64)
    z_sign = 1 - 2 * (np.bitwise_count(idx & np.uint64(P.z)) & 1).astype(np.int8)
    phase = P.sign * (1j ** ((P.x & P.z).bit_count() % 4))
    out = (z_sign.reshape((-1,) + (1,) * (psi.ndim - 1)) * psi)[idx ^ np.uint64(P.x)]
    return phase * out


def pauli_expectation(P: PauliOp, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, apply_pauli(P, psi))))


@dataclass
class OutcomeDistribution:
    """Probabilities over labelled measurement outcomes."""

    labels: list
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if (self.probs < -1e-12).any() or abs(self.probs.sum() - 1) > 1e-9:
            raise ContractViolation("probabilities must be non-negative and sum to 1")
        self.probs = np.clip(self.probs, 0.0, None)

    def entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-(p * np.log2(p)).sum()) + 0.0

    def marginal(self, position: int) -> OutcomeDistribution:
        """Marginal of one component of tuple-valued labels."""
        acc: dict = {}
        for lab, p in zip(self.labels, self.probs):
            acc[lab[position]] = acc.get(lab[position], 0.0) + p
        keys = sorted(acc, reverse=True)
        return OutcomeDistribution(keys, np.array([acc[k] for k in keys]))

    def as_dict(self) -> dict:
        return {str(lab): float(p) for lab, p in zip(self.labels, self.probs)}


def entropy_bits(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def measure_distribution(psi: np.ndarray, observables: PauliOp | Sequence[PauliOp]) -> OutcomeDistribution:
    """Joint distribution of commuting Pauli observables, outcomes in ``{+1, -1}``.

    Raises:
        ContractViolation: if two observables anticommute.
    """
    obs = [observables] if isinstance(observables, PauliOp) else list(observables)
    for a, b in itertools.combinations(obs, 2):
        if not symplectic_commutes(a, b):
            raise ContractViolation(f"observables {a} and {b} do not commute")
    branches = [((), psi)]
    for P in obs:
        nxt = []
        for lab, phi in branches:
            Pphi = apply_pauli(P, phi)
            nxt.append((lab + (1,), (phi + Pphi) / 2))
            nxt.append((lab + (-1,), (phi - Pphi) / 2))
        branches = nxt
    labels = [lab if len(obs) > 1 else lab[0] for lab, _ in branches]
    probs = np.array([np.vdot(phi, phi).real for _, phi in branches])
    return OutcomeDistribution(labels, probs)


def ground_space(code: StabilizerCode, seed: int = 0) -> np.ndarray:
    """Orthonormal basis (columns) of the joint +1 eigenspace of all generators.

    Random seed vectors are projected with ``prod_a (I + S_a)/2`` and
    orthonormalized; the rank must equal ``2^k``.

    Raises:
        ResourceBudgetError: for more than 20 qubits.
    """
    _check_dense(code.n)
    dim = 1 << code.k
    rng = make_rng(seed)
    seeds = rng.standard_normal((1 << code.n, dim + 4)) + 1j * rng.standard_normal((1 << code.n, dim + 4))
    for g in code.generators:
        seeds = (seeds + apply_pauli(g, seeds)) / 2
    u, s, _ = np.linalg.svd(seeds, full_matrices=False)
    rank = int((s > 1e-8 * s[0]).sum())
    if rank != dim:
        raise ContractViolation(f"ground space has dimension {rank}, expected {dim}")
    return u[:, :dim]


def in_ground_space(code: StabilizerCode, psi: np.ndarray, tol: float = 1e-8) -> bool:
    return all(pauli_expectation(g, psi) > 1 - tol for g in code.generators)


def random_ground_state(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector in the span of ``basis`` columns."""
    c = rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1])
    psi = basis @ c
    return psi / np.linalg.norm(psi)


def eq5_check(code: StabilizerCode, psi: np.ndarray, pair: int = 0) -> tuple[float, float, float]:
    """``(<X>^2, <Z>^2, sum)`` for logical pair ``pair``; the sum never exceeds 1.

    Raises:
        ContractViolation: if ``psi`` is not in the ground space.
    """
    if not in_ground_space(code, psi):
        raise ContractViolation("state is not in the ground space")
    X, Z = code.logical_pairs[pair]
    ex, ez = pauli_expectation(X, psi), pauli_expectation(Z, psi)
    zz = pauli_expectation(Z * Z, psi)
    if abs(zz - 1) > 1e-9:
        raise AssertionError(f"<Z^2> = {zz}")
    total = ex ** 2 + ez ** 2
    if total > 1 + 1e-9:
        raise AssertionError(f"<X>^2 + <Z>^2 = {total} exceeds 1")
    return ex ** 2, ez ** 2, total


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mag = np.abs(v)
    i = int(np.flatnonzero(mag > 0.5 * mag.max())[0])
    return v * (np.conj(v[i]) / mag[i])


@dataclass
class AnyonBasis:
    """Joint eigenbasis of a Wilson Z-loop and a 't Hooft X-loop along one cycle."""

    wilson: PauliOp
    thooft: PauliOp
    labels: list[str]
    vectors: np.ndarray = field(repr=False)


def anyon_basis(code: StabilizerCode, direction: int, ground: np.ndarray | None = None) -> AnyonBasis:
    """Anyon basis along cycle ``direction`` (1 = x-cycle, 2 = y-cycle) of the 2D toric code.

    Along x the loops are ``Z1`` (row of horizontal edges) and ``X2`` (row of
    vertical edges); along y they are ``Z2`` and ``X1``.  Eigenvalue pairs
    ``(wilson, thooft)`` map to labels ``(+,+)->1, (-,+)->e, (+,-)->m, (-,-)->eps``.
    """
    if code.name != "toric2d":
        raise ContractViolation("anyon bases are built for the 2D toric code")
    (X1, Z1), (X2, Z2) = code.logical_pairs
    wilson, thooft = (Z1, X2) if direction == 1 else (Z2, X1)
    V = ground_space(code) if ground is None else ground
    W = V.conj().T @ apply_pauli(wilson, V)
    T = V.conj().T @ apply_pauli(thooft, V)
    eye = np.eye(V.shape[1])
    by_label = {}
    for (a, b), lab in ANYON_LABELS.items():
        proj = (eye + a * W) @ (eye + b * T) / 4
        col = int(np.argmax(np.linalg.norm(proj, axis=0)))
        vec = V @ proj[:, col]
        by_label[lab] = _fix_phase(vec / np.linalg.norm(vec))
    vectors = np.stack([by_label[lab] for lab in _LABEL_ORDER], axis=1)
    return AnyonBasis(wilson, thooft, list(_LABEL_ORDER), vectors)


def s_matrix_numeric(code: StabilizerCode, ground: np.ndarray | None = None) -> np.ndarray:
    """Overlaps ``S_ij = <i|_1 |j>_2`` between the two anyon bases.

    Checks unitarity and ``max |S_ij|^2 = 1/4`` within 1e-8.
    """
    V = ground_space(code) if ground is None else ground
    b1 = anyon_basis(code, 1, V)
    b2 = anyon_basis(code, 2, V)
    S = b1.vectors.conj().T @ b2.vectors
    if np.abs(S @ S.conj().T - np.eye(4)).max() > 1e-8:
        raise AssertionError("S-matrix is not unitary")
    if abs((np.abs(S) ** 2).max() - 0.25) > 1e-8:
        raise AssertionError("max |S_ij|^2 differs from 1/4")
    return S


def s_matrix_z2_double() -> np.ndarray:
    """Analytic S-matrix of the Z2 quantum double in the order (1, e, m, eps)."""
    charges = [(0, 0), (1, 0), (0, 1), (1, 1)]
    return np.array([[0.5 * (-1) ** (a * d + b * c) for (c, d) in charges] for (a, b) in charges])


def entropic_bound(S: np.ndarray) -> float:
    return float(-np.log2((np.abs(S) ** 2).max()))


def maassen_uffink_check(psi: np.ndarray, basis1: AnyonBasis, basis2: AnyonBasis,
                         bound: float) -> tuple[float, float, float]:
    """Entropies of the two anyon-label measurements and the bound they must respect."""
    p1 = np.abs(basis1.vectors.conj().T @ psi) ** 2
    p2 = np.abs(basis2.vectors.conj().T @ psi) ** 2
    if abs(p1.sum() - 1) > 1e-8 or abs(p2.sum() - 1) > 1e-8:
        raise ContractViolation("state is not in the ground space")
    h1 = OutcomeDistribution(basis1.labels, p1 / p1.sum()).entropy()
    h2 = OutcomeDistribution(basis2.labels, p2 / p2.sum()).entropy()
    if h1 + h2 < bound - 1e-9:
        raise AssertionError(f"entropic bound violated: {h1} + {h2} < {bound}")
    return h1, h2, bound


def strip_operator(code: StabilizerCode, column: int) -> PauliOp:
    """Z on the vertical edges of one column: a width-1 strip realizing logical Z2."""
    L = code.metadata["L"]
    return PauliOp.on(code.n, [toric2d_v(L, column, y) for y in range(L)], "Z")


@dataclass
class Theorem2Report:
    L: int
    depth: int
    separation: int
    cones_disjoint: bool
    corr: float
    exp1: float
    exp2: float
    H1: float
    H2: float
    Hjoint: float
    mutual_info: float
    joint: dict


def joint_from_expectations(e1: float, e2: float, e12: float) -> OutcomeDistribution:
    """Distribution of two commuting ±1 observables from their moments."""
    labels = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    probs = [(1 + a * e1 + b * e2 + a * b * e12) / 4 for a, b in labels]
    return OutcomeDistribution(labels, np.array(probs))


def theorem2_experiment(code: StabilizerCode, prep: LocalCircuit, separation: int,
                        column: int = 0, offset: int | None = None) -> Theorem2Report:
    """Correlations between two strip realizations of the same logical Z.

    The state is ``prep |0...0>``.  Moments are computed exactly in the
    Heisenberg picture, so the joint distribution of the two strips is exact.

    Raises:
        SetupError: if the strips are closer than ``separation``.
    """
    L = code.metadata["L"]
    if offset is None:
        offset = L // 2
    P1 = strip_operator(code, column)
    P2 = strip_operator(code, column + offset)
    lat = code.lattice
    r1, r2 = lat.region(P1.support), lat.region(P2.support)
    dist = lat.region_distance(r1, r2)
    if dist < separation:
        raise SetupError(f"strips are {dist} apart, fewer than the requested {separation}")
    e1 = expectation_on_zero_state(heisenberg_evolve(prep, P1))
    e2 = expectation_on_zero_state(heisenberg_evolve(prep, P2))
    e12 = expectation_on_zero_state(heisenberg_evolve(prep, P1 * P2))
    joint = joint_from_expectations(e1, e2, e12)
    h1, h2 = joint.marginal(0).entropy(), joint.marginal(1).entropy()
    hj = joint.entropy()
    disjoint = heisenberg_support(prep, r1).isdisjoint(heisenberg_support(prep, r2))
    return Theorem2Report(
        L=L,
        depth=prep.depth,
        separation=dist,
        cones_disjoint=disjoint,
        corr=float(e12),
        exp1=float(e1),
        exp2=float(e2),
        H1=h1,
        H2=h2,
        Hjoint=hj,
        mutual_info=h1 + h2 - hj,
        joint={f"{a:+d},{b:+d}": float(p) for (a, b), p in zip(joint.labels, joint.probs)},
    )
