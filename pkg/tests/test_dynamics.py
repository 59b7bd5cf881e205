from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import circuit_dense, gate_dense, pauli_dense
from topobound.algebra import PauliOp
from topobound.codes import build_toric_2d
from topobound.dynamics.circuit import (
    Gate,
    LocalCircuit,
    conjugate_gate,
    heisenberg_evolve,
    heisenberg_support,
    localize,
    schrodinger_evolve,
)
from topobound.dynamics.defects import (
    dissipative_prep_mc,
    nearest_neighbor_bound,
    run_diffusive,
    run_sweep,
    sample_even_defects,
    sweep_step,
)
from topobound.dynamics.encoders import encoder_toric_2d, prep_toric_2d, toric_input_sites
from topobound.dynamics.experiment import theorem1_experiment
from topobound.dynamics.tableau import StabilizerState
from topobound.errors import ContractViolation, UnsupportedGate
from topobound.rng import trial_rng

ONE_QUBIT = ["H", "S", "SDG", "X", "Y", "Z"]
TWO_QUBIT = ["CNOT", "CZ"]


def random_gate(rng, n):
    if n > 1 and rng.random() < 0.5:
        a, b = rng.choice(n, size=2, replace=False)
        return Gate(str(rng.choice(TWO_QUBIT)), (int(a), int(b)))
    return Gate(str(rng.choice(ONE_QUBIT)), (int(rng.integers(n)),))


def random_pauli(rng, n):
    x, z = (int(v) for v in rng.integers(0, 1 << n, size=2))
    return PauliOp(n, x, z, int(rng.choice([-1, 1])))


def dense_layers(circ):
    return [[(g.name, g.sites) for g in layer] for layer in circ.layers]


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4))
def test_conjugate_gate_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    g = random_gate(rng, n)
    P = random_pauli(rng, n)
    U = gate_dense(g.name, g.sites, n)
    expected = U @ pauli_dense(str(P)) @ U.conj().T
    assert np.allclose(pauli_dense(str(conjugate_gate(g, P))), expected)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_heisenberg_and_schrodinger_match_dense(seed):
    rng = np.random.default_rng(seed)
    n = 4
    circ = LocalCircuit.from_gates(n, [random_gate(rng, n) for _ in range(12)])
    U = circuit_dense(dense_layers(circ), n)
    P = random_pauli(rng, n)
    Pd = pauli_dense(str(P))
    assert np.allclose(pauli_dense(str(heisenberg_evolve(circ, P))), U.conj().T @ Pd @ U)
    assert np.allclose(pauli_dense(str(schrodinger_evolve(circ, P))), U @ Pd @ U.conj().T)
    assert heisenberg_evolve(circ.inverse(), P) == schrodinger_evolve(circ, P)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_tableau_expectations_match_dense(seed):
    rng = np.random.default_rng(seed)
    n = 4
    circ = LocalCircuit.from_gates(n, [random_gate(rng, n) for _ in range(15)])
    psi = circuit_dense(dense_layers(circ), n)[:, 0]
    state = StabilizerState.zero_state(n).apply_circuit(circ)
    for _ in range(10):
        P = random_pauli(rng, n)
        dense = np.vdot(psi, pauli_dense(str(P)) @ psi).real
        assert state.expectation(P) == int(round(dense))


def test_measurement_projects_like_dense():
    rng = np.random.default_rng(4)
    n = 3
    for _ in range(30):
        circ = LocalCircuit.from_gates(n, [random_gate(rng, n) for _ in range(10)])
        psi = circuit_dense(dense_layers(circ), n)[:, 0]
        state = StabilizerState.zero_state(n).apply_circuit(circ)
        P = random_pauli(rng, n)
        if P.is_identity:
            continue
        before = state.expectation(P)
        out = state.measure(P, rng)
        if before != 0:
            assert out == before
        proj = (np.eye(1 << n) + out * pauli_dense(str(P))) / 2
        phi = proj @ psi
        phi /= np.linalg.norm(phi)
        Q = random_pauli(rng, n)
        assert state.expectation(Q) == int(round(np.vdot(phi, pauli_dense(str(Q)) @ phi).real))
        assert state.expectation(P) == out


def test_state_validation():
    with pytest.raises(ContractViolation):
        StabilizerState([PauliOp.from_string("XI"), PauliOp.from_string("ZI")])
    with pytest.raises(ContractViolation):
        StabilizerState([PauliOp.from_string("ZI"), PauliOp.from_string("ZI")])
    with pytest.raises(ContractViolation):
        StabilizerState.zero_state(2).measure(PauliOp.from_string("XI"))


def test_gate_and_circuit_validation():
    with pytest.raises(UnsupportedGate):
        Gate("T", (0,))
    with pytest.raises(ContractViolation):
        Gate("CNOT", (1, 1))
    with pytest.raises(ContractViolation):
        LocalCircuit(2, [[Gate("H", (0,)), Gate("CNOT", (0, 1))]])
    with pytest.raises(ContractViolation):
        LocalCircuit(2, [[Gate("H", (2,))]])


def test_circuit_json_round_trip():
    rng = np.random.default_rng(5)
    circ = LocalCircuit.from_gates(5, [random_gate(rng, 5) for _ in range(20)])
    assert LocalCircuit.from_json(5, circ.dumps()) == circ
    assert circ.truncated(3).depth == min(3, circ.depth)
    assert (circ + circ.inverse()).depth == 2 * circ.depth


def test_light_cone_contains_support():
    L = 4
    code = build_toric_2d(L)
    enc = encoder_toric_2d(L, lattice=code.lattice)
    rng = np.random.default_rng(6)
    for t in range(0, enc.depth + 1, 3):
        circ = enc.truncated(t)
        for _ in range(5):
            sites = [int(s) for s in rng.choice(code.n, size=2, replace=False)]
            B = code.lattice.region(sites)
            cone = heisenberg_support(circ, B)
            assert cone.sites <= code.lattice.neighborhood(B, t * circ.range).sites
            for ch in "XYZ":
                P = PauliOp.from_sparse(code.n, {sites[0]: ch, sites[1]: "Z"})
                assert set(heisenberg_evolve(circ, P).support) <= cone.sites


def test_localize_is_exact_inside_cone():
    L = 4
    code = build_toric_2d(L)
    enc = encoder_toric_2d(L, lattice=code.lattice)
    rng = np.random.default_rng(7)
    for t in (2, 4, 6):
        circ = enc.truncated(t)
        r = t * circ.range
        for _ in range(5):
            q = int(rng.integers(code.n))
            B = code.lattice.region([q])
            P = PauliOp.from_sparse(code.n, {q: str(rng.choice(list("XYZ")))})
            loc = localize(circ, B, r)
            assert heisenberg_evolve(loc, P) == heisenberg_evolve(circ, P)
            assert len(loc.gates) <= len(circ.gates)


@pytest.mark.parametrize("L", [2, 3, 4, 5, 6])
def test_encoder_prepares_code_state(L):
    code = build_toric_2d(L)
    for origin in [(0, 0), (1, L - 1)]:
        enc = encoder_toric_2d(L, origin, code.lattice)
        assert enc.depth == (4 * L - 3 if L >= 3 else 6)
        assert enc.range == 2
        state = StabilizerState.zero_state(code.n).apply_circuit(enc)
        for g in code.generators:
            assert state.expectation(g) == 1


def test_encoder_maps_inputs_to_logicals():
    L = 4
    code = build_toric_2d(L)
    enc = encoder_toric_2d(L, lattice=code.lattice)
    a1, a2 = toric_input_sites(L)
    X1, _, X2, _ = code.logical_operators
    for a, X in ((a1, X1), (a2, X2)):
        decoded = heisenberg_evolve(enc, X)
        assert decoded.x == 1 << a


def test_prep_is_logical_eigenstate():
    L = 4
    code = build_toric_2d(L)
    state = StabilizerState.zero_state(code.n).apply_circuit(prep_toric_2d(L, lattice=code.lattice))
    X1, Z1, X2, Z2 = code.logical_operators
    assert state.expectation(Z1) != 0
    assert state.expectation(X2) == 1
    assert state.expectation(X1) == 0 and state.expectation(Z2) == 0


def test_light_cone_experiment_full_and_truncated():
    L = 6
    code = build_toric_2d(L)
    full = encoder_toric_2d(L, lattice=code.lattice)
    A = code.lattice.region(toric_input_sites(L))
    rep = theorem1_experiment(code, full, A)
    assert rep.cone_hits_A and abs(rep.D_full) == 2
    t = (rep.dBA - 1) // full.range
    short = theorem1_experiment(code, full.truncated(t), A, reference=full)
    assert not short.cone_hits_A
    assert short.D_full == 0 and short.D_loc == 0


def test_sweep_dynamics_by_hand():
    grid = np.zeros((4, 4), dtype=np.uint8)
    grid[2, 3] = grid[0, 1] = 1
    assert sweep_step(grid).sum() == 2
    assert run_sweep(grid.copy()) == 5  # (2, 3) needs 3 steps left and 2 down
    assert nearest_neighbor_bound(grid) == 2


@pytest.mark.parametrize("L", [3, 4, 8])
def test_defect_parity_and_bounds(L):
    for t in range(30):
        rng = trial_rng(11, t)
        grid = sample_even_defects(L, rng)
        assert grid.sum() % 2 == 0
        steps = run_sweep(grid, max_steps=2 * (L - 1), track_parity=True)
        assert nearest_neighbor_bound(grid) <= steps <= 2 * (L - 1)
        d = run_diffusive(grid, rng, track_parity=True)
        assert d >= nearest_neighbor_bound(grid)


def test_monte_carlo_is_deterministic():
    a = dissipative_prep_mc(6, "diffusive", 5, 123)
    b = dissipative_prep_mc(6, "diffusive", 5, 123)
    assert a == b
    assert dissipative_prep_mc(6, "diffusive", 5, 124) != a
    with pytest.raises(ContractViolation):
        dissipative_prep_mc(6, "teleport", 5, 0)


def test_encoder_depth_linear():
    ratios = [encoder_toric_2d(L).depth / L for L in range(2, 9)]
    assert max(ratios) - min(ratios) <= 1


def test_light_cone_experiment_empty_encoder():
    L = 6
    code = build_toric_2d(L)
    full = encoder_toric_2d(L, lattice=code.lattice)
    A = code.lattice.region(toric_input_sites(L))
    rep = theorem1_experiment(code, full.truncated(0), A, reference=full)
    assert rep.D_full == 0 and not rep.cone_hits_A


def _random_local_layer(rng, lattice, n):
    order = rng.permutation(n)
    used: set[int] = set()
    layer = []
    D = lattice.distance_matrix
    for a in order:
        a = int(a)
        if a in used:
            continue
        near = [int(b) for b in np.flatnonzero(D[a] <= 2) if b != a and int(b) not in used]
        if near and rng.random() < 0.7:
            b = int(rng.choice(near))
            layer.append(Gate(str(rng.choice(TWO_QUBIT)), (a, b)))
            used.update((a, b))
        elif rng.random() < 0.5:
            layer.append(Gate(str(rng.choice(ONE_QUBIT)), (a,)))
            used.add(a)
    return layer


def test_random_local_circuits_below_cone_cannot_distinguish():
    L = 6
    code = build_toric_2d(L)
    full = encoder_toric_2d(L, lattice=code.lattice)
    A = code.lattice.region(toric_input_sites(L))
    base = theorem1_experiment(code, full, A)
    rng = np.random.default_rng(12)
    for _ in range(20):
        circ = LocalCircuit(code.n, [_random_local_layer(rng, code.lattice, code.n) for _ in range(8)],
                            code.lattice)
        t = (base.dBA - 1) // max(circ.range, 1)
        rep = theorem1_experiment(code, circ.truncated(t), A, reference=full)
        assert t * circ.range < rep.dBA
        assert not rep.cone_hits_A and rep.D_full == 0


def test_zero_defects_clear_immediately():
    grid = np.zeros((5, 5), dtype=np.uint8)
    assert run_sweep(grid) == 0
    assert run_diffusive(grid, np.random.default_rng(0)) == 0
    assert nearest_neighbor_bound(grid) == 0
