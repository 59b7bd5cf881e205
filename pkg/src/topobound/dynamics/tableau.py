"""Stabilizer states as generator tableaux with sign bits."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from topobound.algebra import BitMatrix, PauliOp, bits_to_int, check_matrix, int_to_bits, solve
from topobound.dynamics.circuit import Gate, LocalCircuit
from topobound.errors import ContractViolation, UnsupportedGate


class StabilizerState:
    """Pure n-qubit stabilizer state given by n independent commuting generators.

    Only stabilizer rows are kept.  Expectation values need a linear solve
    instead of a destabilizer lookup, which is cheap at the sizes used here.

    Args:
        generators: n independent, pairwise commuting Pauli operators.
    """

    def __init__(self, generators: Sequence[PauliOp], validate: bool = True):
        if not generators:
            raise ContractViolation("a state needs at least one generator")
        n = generators[0].n
        if len(generators) != n:
            raise ContractViolation(f"need {n} generators for {n} qubits, got {len(generators)}")
        self.n = n
        self.xs = np.array([int_to_bits(g.x, n) for g in generators], dtype=np.uint8)
        self.zs = np.array([int_to_bits(g.z, n) for g in generators], dtype=np.uint8)
        self.signs = np.array([0 if g.sign == 1 else 1 for g in generators], dtype=np.uint8)
        if validate:
            self._validate()

    @classmethod
    def zero_state(cls, n: int) -> StabilizerState:
        return cls([PauliOp(n, 0, 1 << i) for i in range(n)], validate=False)

    def _validate(self) -> None:
        ops = self.generators()
        mat = check_matrix(ops, self.n)
        if mat.rank() != self.n:
            raise ContractViolation("state generators are not independent")
        sym = (self.xs.astype(np.int64) @ self.zs.T.astype(np.int64)
               + self.zs.astype(np.int64) @ self.xs.T.astype(np.int64)) % 2
        if sym.any():
            i, j = np.argwhere(sym)[0]
            raise ContractViolation(f"state generators {i} and {j} anticommute")

    def copy(self) -> StabilizerState:
        out = object.__new__(StabilizerState)
        out.n = self.n
        out.xs, out.zs, out.signs = self.xs.copy(), self.zs.copy(), self.signs.copy()
        return out

    def generator(self, i: int) -> PauliOp:
        return PauliOp(self.n, bits_to_int(self.xs[i]), bits_to_int(self.zs[i]), -1 if self.signs[i] else 1)

    def generators(self) -> list[PauliOp]:
        return [self.generator(i) for i in range(self.n)]

    def apply_gate(self, gate: Gate) -> None:
        """Evolve the state by ``gate`` (all generators conjugated at once)."""
        xs, zs, r = self.xs, self.zs, self.signs
        a = gate.sites[0]
        name = gate.name
        if name == "H":
            r ^= xs[:, a] & zs[:, a]
            xs[:, a], zs[:, a] = zs[:, a].copy(), xs[:, a].copy()
        elif name == "S":
            r ^= xs[:, a] & zs[:, a]
            zs[:, a] ^= xs[:, a]
        elif name == "SDG":
            r ^= xs[:, a] & (zs[:, a] ^ 1)
            zs[:, a] ^= xs[:, a]
        elif name == "X":
            r ^= zs[:, a]
        elif name == "Z":
            r ^= xs[:, a]
        elif name == "Y":
            r ^= xs[:, a] ^ zs[:, a]
        elif name == "CNOT":
            b = gate.sites[1]
            r ^= xs[:, a] & zs[:, b] & (xs[:, b] ^ zs[:, a] ^ 1)
            xs[:, b] ^= xs[:, a]
            zs[:, a] ^= zs[:, b]
        elif name == "CZ":
            b = gate.sites[1]
            r ^= xs[:, a] & xs[:, b] & (zs[:, a] ^ zs[:, b])
            zs[:, a] ^= xs[:, b]
            zs[:, b] ^= xs[:, a]
        elif name != "I":
            raise UnsupportedGate(f"unsupported gate {name!r}")

    def apply_circuit(self, circuit: LocalCircuit) -> StabilizerState:
        if circuit.n != self.n:
            raise ContractViolation("circuit and state sizes differ")
        for layer in circuit.layers:
            for g in layer:
                self.apply_gate(g)
        return self

    def _anticommuting_rows(self, P: PauliOp) -> np.ndarray:
        px, pz = P.x_bits, P.z_bits
        return ((self.xs @ pz + self.zs @ px) % 2).astype(bool)

    def expectation(self, P: PauliOp) -> int:
        """``<P>`` in {-1, 0, +1}."""
        if P.n != self.n:
            raise ContractViolation(f"operator on {P.n} qubits, state on {self.n}")
        if self._anticommuting_rows(P).any():
            return 0
        M = BitMatrix.from_dense(np.concatenate([self.xs, self.zs], axis=1).T)
        coeffs = solve(M, P.symplectic())
        if coeffs is None:
            return 0
        prod = PauliOp(self.n)
        for i in np.flatnonzero(coeffs):
            prod = prod * self.generator(int(i))
        return 1 if prod.sign == P.sign else -1

    def measure(self, P: PauliOp, rng: np.random.Generator | None = None, outcome: int | None = None) -> int:
        """Projectively measure ``P``; returns the eigenvalue and updates the state.

        A random outcome is drawn from ``rng`` unless ``outcome`` forces it.
        """
        anti = np.flatnonzero(self._anticommuting_rows(P))
        if anti.size == 0:
            return self.expectation(P)
        if outcome is None:
            if rng is None:
                raise ContractViolation("random measurement needs an rng or a forced outcome")
            outcome = 1 if rng.random() < 0.5 else -1
        p = int(anti[0])
        pivot = self.generator(p)
        for i in anti[1:]:
            row = self.generator(int(i)) * pivot
            self._set_row(int(i), row)
        self._set_row(p, P if outcome == 1 else -P)
        return outcome

    def _set_row(self, i: int, P: PauliOp) -> None:
        self.xs[i] = P.x_bits
        self.zs[i] = P.z_bits
        self.signs[i] = 0 if P.sign == 1 else 1
