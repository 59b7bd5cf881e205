"""Reference local Clifford encoders for the 2D toric code."""

from __future__ import annotations

from collections import deque

from topobound.codes import build_toric_2d, toric2d_h, toric2d_v
from topobound.dynamics.circuit import Gate, LocalCircuit
from topobound.errors import ContractViolation
from topobound.lattice import Lattice


def toric_input_sites(L: int, origin: tuple[int, int] = (0, 0)) -> tuple[int, int]:
    """Qubits holding the two logical inputs: the edges leaving vertex ``origin``."""
    ox, oy = origin
    return toric2d_h(L, ox, oy), toric2d_v(L, ox, oy)


def _ladder(chain: list[int]) -> list[Gate]:
    """CNOTs spreading X from ``chain[0]`` around a ring in both directions."""
    m = len(chain)
    gates = []
    left, right = 0, 0
    reached = 1
    while reached < m:
        nxt = (right + 1) % m
        gates.append(Gate("CNOT", (chain[right], chain[nxt])))
        right = nxt
        reached += 1
        if reached >= m:
            break
        prv = (left - 1) % m
        gates.append(Gate("CNOT", (chain[left], chain[prv])))
        left = prv
        reached += 1
    return gates


def encoder_toric_2d(L: int, origin: tuple[int, int] = (0, 0), lattice: Lattice | None = None) -> LocalCircuit:
    """Geometrically local Clifford encoder into the 2D toric code.

    Input qubits are ``h(origin)`` and ``v(origin)``; every other qubit starts
    in ``|0>``.  CNOT ladders copy the inputs' X onto the two X-logical
    chains, then each vertex except ``origin`` gets its star operator from a
    pivot edge (H, then CNOTs to the other three edges).  Pivots are tree
    edges of a BFS tree on the lattice graph without the chain edges,
    processed from the leaves inward so that every pivot is still fresh.

    Gates act on sites at doubled-coordinate distance at most 2, and the
    ASAP-scheduled depth grows linearly in L.
    """
    if L < 2:
        raise ContractViolation("encoder needs L >= 2")
    ox, oy = origin
    h = lambda x, y: toric2d_h(L, x, y)  # noqa: E731
    v = lambda x, y: toric2d_v(L, x, y)  # noqa: E731
    chain1 = [h(ox, oy + s) for s in range(L)]
    chain2 = [v(ox + s, oy) for s in range(L)]
    gates = _ladder(chain1) + _ladder(chain2)
    blocked = set(chain1) | set(chain2)

    def neighbors(x: int, y: int):
        for (nx, ny), edge in (
            ((x + 1, y), h(x, y)),
            ((x - 1, y), h(x - 1, y)),
            ((x, y + 1), v(x, y)),
            ((x, y - 1), v(x, y - 1)),
        ):
            if edge not in blocked:
                yield (nx % L, ny % L), edge

    root = (ox % L, oy % L)
    parent_edge: dict[tuple[int, int], int] = {}
    depth = {root: 0}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w, edge in neighbors(*u):
            if w not in depth:
                depth[w] = depth[u] + 1
                parent_edge[w] = edge
                order.append(w)
                queue.append(w)
    if len(depth) != L * L:
        raise ContractViolation("lattice graph without chain edges is disconnected")
    for x, y in sorted(order[1:], key=lambda u: (-depth[u], order.index(u))):
        pivot = parent_edge[(x, y)]
        star = [h(x, y), h(x - 1, y), v(x, y), v(x, y - 1)]
        gates.append(Gate("H", (pivot,)))
        gates.extend(Gate("CNOT", (pivot, e)) for e in star if e != pivot)
    if lattice is None:
        lattice = build_toric_2d(L).lattice
    meta = {"encoder": "staircase", "L": L, "origin": [ox % L, oy % L], "initial_state": "|0>^n"}
    return LocalCircuit.from_gates(2 * L * L, gates, lattice, meta)


def prep_toric_2d(L: int, origin: tuple[int, int] = (0, 0), lattice: Lattice | None = None) -> LocalCircuit:
    """Prepare an X2-logical eigenstate from ``|0>^n``: H on the second input, then encode."""
    enc = encoder_toric_2d(L, origin, lattice)
    _, a2 = toric_input_sites(L, origin)
    gates = [Gate("H", (a2,))] + enc.gates
    meta = {**enc.metadata, "logical_input": "|0>|+>"}
    return LocalCircuit.from_gates(enc.n, gates, enc.lattice, meta)
