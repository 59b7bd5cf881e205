"""Layered Clifford circuits, Pauli conjugation and exact light cones."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from topobound.algebra import PauliOp
from topobound.errors import ContractViolation, UnsupportedGate
from topobound.lattice import Lattice, Region

GATE_ARITY = {"I": 1, "H": 1, "S": 1, "SDG": 1, "X": 1, "Y": 1, "Z": 1, "CNOT": 2, "CZ": 2}
_INVERSE = {"S": "SDG", "SDG": "S"}


@dataclass(frozen=True)
class Gate:
    """A Clifford gate tag acting on an ordered tuple of qubits (control first)."""

    name: str
    sites: tuple[int, ...]

    def __post_init__(self):
        arity = GATE_ARITY.get(self.name)
        if arity is None:
            raise UnsupportedGate(f"unsupported gate {self.name!r}")
        if len(self.sites) != arity or len(set(self.sites)) != arity:
            raise ContractViolation(f"gate {self.name} needs {arity} distinct sites, got {self.sites}")

    def inverse(self) -> Gate:
        return Gate(_INVERSE.get(self.name, self.name), self.sites)

    def to_json(self) -> dict:
        return {"gate": self.name, "sites": list(self.sites)}


def conjugate_gate(gate: Gate, P: PauliOp) -> PauliOp:
    """Return ``g P g^dagger``."""
    x, z, sign = P.x, P.z, P.sign
    name = gate.name
    a = gate.sites[0]
    xa, za = x >> a & 1, z >> a & 1
    flip = 0
    if name == "H":
        flip = xa & za
        if xa != za:
            x ^= 1 << a
            z ^= 1 << a
    elif name == "S":
        flip = xa & za
        z ^= xa << a
    elif name == "SDG":
        flip = xa & (za ^ 1)
        z ^= xa << a
    elif name == "X":
        flip = za
    elif name == "Z":
        flip = xa
    elif name == "Y":
        flip = xa ^ za
    elif name == "CNOT":
        b = gate.sites[1]
        xb, zb = x >> b & 1, z >> b & 1
        flip = xa & zb & (xb ^ za ^ 1)
        x ^= xa << b
        z ^= zb << a
    elif name == "CZ":
        b = gate.sites[1]
        xb, zb = x >> b & 1, z >> b & 1
        flip = xa & xb & (za ^ zb)
        z ^= (xb << a) | (xa << b)
    elif name != "I":
        raise UnsupportedGate(f"unsupported gate {name!r}")
    return PauliOp(P.n, x, z, -sign if flip else sign)


class LocalCircuit:
    """Ordered layers of gates with pairwise disjoint supports inside each layer.

    Applying the circuit means applying layer 0 first.

    Args:
        n: number of qubits.
        layers: gate layers.
        lattice: geometry used for ranges and localization (optional).
        metadata: free-form construction notes.
    """

    def __init__(
        self,
        n: int,
        layers: Sequence[Sequence[Gate]] = (),
        lattice: Lattice | None = None,
        metadata: dict | None = None,
    ):
        self.n = n
        self.layers = tuple(tuple(layer) for layer in layers)
        self.lattice = lattice
        self.metadata = dict(metadata or {})
        for i, layer in enumerate(self.layers):
            used: set[int] = set()
            for g in layer:
                if any(s < 0 or s >= n for s in g.sites):
                    raise ContractViolation(f"gate {g} acts outside {n} qubits")
                if used.intersection(g.sites):
                    raise ContractViolation(f"layer {i} has overlapping gates")
                used.update(g.sites)

    @classmethod
    def from_gates(cls, n: int, gates: Iterable[Gate], lattice: Lattice | None = None,
                   metadata: dict | None = None) -> LocalCircuit:
        """Schedule gates as soon as possible, keeping the order on shared qubits."""
        last = [-1] * n
        layers: list[list[Gate]] = []
        for g in gates:
            t = max(last[s] for s in g.sites) + 1
            if t == len(layers):
                layers.append([])
            layers[t].append(g)
            for s in g.sites:
                last[s] = t
        return cls(n, layers, lattice, metadata)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def gates(self) -> list[Gate]:
        return [g for layer in self.layers for g in layer]

    @property
    def range(self) -> int:
        """Largest gate-support diameter (0 without a lattice or gates)."""
        if self.lattice is None:
            return 0
        return max((self.lattice.diameter_of(g.sites) for g in self.gates), default=0)

    def inverse(self) -> LocalCircuit:
        layers = [[g.inverse() for g in layer] for layer in reversed(self.layers)]
        return LocalCircuit(self.n, layers, self.lattice, self.metadata)

    def truncated(self, t: int) -> LocalCircuit:
        """The first ``t`` layers."""
        if t < 0:
            raise ContractViolation("truncation depth must be non-negative")
        return LocalCircuit(self.n, self.layers[:t], self.lattice, {**self.metadata, "truncated_to": t})

    def __add__(self, other: LocalCircuit) -> LocalCircuit:
        if other.n != self.n:
            raise ContractViolation("circuits act on different qubit counts")
        return LocalCircuit(self.n, self.layers + other.layers, self.lattice or other.lattice, self.metadata)

    def to_json(self) -> list:
        return [[g.to_json() for g in layer] for layer in self.layers]

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, n: int, document, lattice: Lattice | None = None) -> LocalCircuit:
        if isinstance(document, str):
            document = json.loads(document)
        layers = [[Gate(str(g["gate"]).upper(), tuple(int(s) for s in g["sites"])) for g in layer]
                  for layer in document]
        return cls(n, layers, lattice)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalCircuit):
            return NotImplemented
        return self.n == other.n and self.layers == other.layers

    def __repr__(self) -> str:
        return f"LocalCircuit(n={self.n}, depth={self.depth}, gates={len(self.gates)})"


def schrodinger_evolve(circuit: LocalCircuit, P: PauliOp) -> PauliOp:
    """Return ``U P U^dagger``."""
    _check(circuit, P)
    for layer in circuit.layers:
        for g in layer:
            P = conjugate_gate(g, P)
    return P


def heisenberg_evolve(circuit: LocalCircuit, P: PauliOp) -> PauliOp:
    """Return ``U^dagger P U``, the observable ``P`` pulled back through the circuit."""
    _check(circuit, P)
    for layer in reversed(circuit.layers):
        for g in layer:
            P = conjugate_gate(g.inverse(), P)
    return P


def heisenberg_support(circuit: LocalCircuit, B: Region) -> Region:
    """Exact light cone: every site that ``U^dagger O U`` may touch for ``O`` on ``B``."""
    region = set(B.sites)
    for layer in reversed(circuit.layers):
        for g in layer:
            if region.intersection(g.sites):
                region.update(g.sites)
    return Region(frozenset(region), B.lattice or circuit.lattice)


def localize(circuit: LocalCircuit, B: Region, r: int) -> LocalCircuit:
    """Drop every gate not contained in the r-neighborhood of ``B``."""
    lattice = circuit.lattice or B.lattice
    if lattice is None:
        raise ContractViolation("localization needs a lattice")
    keep = lattice.neighborhood(B, r).sites
    layers = [[g for g in layer if keep.issuperset(g.sites)] for layer in circuit.layers]
    return LocalCircuit(circuit.n, layers, circuit.lattice, {**circuit.metadata, "localized_r": r})


def _check(circuit: LocalCircuit, P: PauliOp) -> None:
    if P.n != circuit.n:
        raise ContractViolation(f"operator on {P.n} qubits, circuit on {circuit.n}")
