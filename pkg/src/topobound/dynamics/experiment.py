"""Light-cone distinguishability experiment for local encoders."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from topobound.algebra import PauliOp
from topobound.codes import StabilizerCode
from topobound.correctability import Theorem1Regions, construct_theorem1_regions
from topobound.dynamics.circuit import LocalCircuit, heisenberg_evolve, heisenberg_support, localize
from topobound.dynamics.tableau import StabilizerState
from topobound.errors import ContractViolation, SetupError
from topobound.lattice import Region

_SINGLE = ("X", "Y", "Z")


def expectation_on_zero_state(P: PauliOp) -> int:
    """``<0...0| P |0...0>``: the sign when P has no X part, otherwise 0."""
    return P.sign if P.x == 0 else 0


def _commuting_partner(q: PauliOp, sites: list[int]) -> PauliOp:
    """A Pauli on ``sites`` that commutes with ``q`` and is independent of it."""
    n = q.n
    for ch in _SINGLE:
        for s in sites:
            R = PauliOp.from_sparse(n, {s: ch})
            if R.commutes(q) and R.unsigned() != q.unsigned():
                return R
    raise SetupError("region A is too small to hold a second commuting Pauli")


def two_encoded_states(Q: PauliOp, A: Region) -> tuple[StabilizerState, StabilizerState]:
    """``rho_b ⊗ |0><0|`` with ``(-1)^b Q`` in the stabilizer of ``rho_b``.

    ``Q`` must act as Z-type on the complement of ``A`` and nontrivially on A.
    """
    n = Q.n
    inside = A.mask
    if (Q.x & ~inside) & ((1 << n) - 1):
        raise SetupError("decoded operator is not Z-type outside A")
    if not Q.support_mask & inside:
        raise SetupError("decoded operator acts trivially on A")
    q_on_A = Q.restricted(A.sites)
    R = _commuting_partner(q_on_A, sorted(A.sites))
    rest = [PauliOp(n, 0, 1 << j) for j in range(n) if j not in A.sites]
    extra = []
    # complete {Q, R} with commuting Paulis on A until the state is pure
    for ch in _SINGLE:
        for s in sorted(A.sites):
            if len(rest) + 2 + len(extra) == n:
                break
            cand = PauliOp.from_sparse(n, {s: ch})
            group = [q_on_A, R] + extra
            if all(cand.commutes(g) for g in group) and _independent(group + [cand]):
                extra.append(cand)
    states = []
    for b in (0, 1):
        gens = rest + [Q if b == 0 else -Q, R] + extra
        states.append(StabilizerState(gens))
    return states[0], states[1]


def _independent(ops: list[PauliOp]) -> bool:
    from topobound.algebra import check_matrix

    return check_matrix(ops).rank() == len(ops)


@dataclass
class Theorem1Report:
    L: int | None
    depth: int
    R: int
    dBA: int
    cone_hits_A: bool
    D_full: int
    D_loc: int
    P_B: str
    decoded: str
    cone_speed: int
    tail: float = 0.0
    initial_state: str = "|0>^n"

    def as_dict(self) -> dict:
        return asdict(self)


def theorem1_experiment(
    code: StabilizerCode,
    encoder: LocalCircuit,
    A: Region,
    reference: LocalCircuit | None = None,
    regions: Theorem1Regions | None = None,
) -> Theorem1Report:
    """Distinguish two encoded states with a logical operator supported far from A.

    ``P_B`` is a logical supported on ``B`` (complement of a correctable cube
    around A).  The reference encoder (default: ``encoder``) decodes it to
    ``Q``, which splits the input states ``rho_0``, ``rho_1``.  The report gives

    * ``D_full``: ``<E^dagger(P_B)>_0 - <E^dagger(P_B)>_1`` under ``encoder``;
    * ``D_loc``: the same for ``encoder`` localized to ``B(dBA - 1)``;
    * ``cone_hits_A``: whether the light cone of ``B`` reaches ``A``.

    When the cone misses A, ``D_full`` is exactly 0; a true encoder gives 2.

    Raises:
        SetupError: if the regions cannot be built or ``Q`` does not act on A.
    """
    if encoder.n != code.n:
        raise ContractViolation("encoder and code sizes differ")
    if regions is None:
        regions = construct_theorem1_regions(code, A)
    ref = encoder if reference is None else reference
    Q = heisenberg_evolve(ref, regions.P_B)
    rho0, rho1 = two_encoded_states(Q, A)

    def contrast(circ: LocalCircuit) -> int:
        P_t = heisenberg_evolve(circ, regions.P_B)
        return rho0.expectation(P_t) - rho1.expectation(P_t)

    r = max(regions.d_BA - 1, 0)
    cone = heisenberg_support(encoder, regions.B)
    return Theorem1Report(
        L=code.metadata.get("L"),
        depth=encoder.depth,
        R=regions.R,
        dBA=regions.d_BA,
        cone_hits_A=not cone.isdisjoint(A),
        D_full=contrast(encoder),
        D_loc=contrast(localize(encoder, regions.B, r)),
        P_B=str(regions.P_B),
        decoded=str(Q),
        cone_speed=encoder.range,
    )
