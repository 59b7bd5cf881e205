from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import pauli_dense, rank_gf2, span_gf2
from topobound.algebra import (
    BitMatrix,
    PauliOp,
    RowSpace,
    multiply,
    nullspace,
    rank,
    rref,
    solve,
    symplectic_commutes,
)
from topobound.errors import ContractViolation


def pauli_strings(n):
    return st.text(alphabet="IXYZ", min_size=n, max_size=n).map(lambda s: s)


signed = st.integers(1, 6).flatmap(
    lambda n: st.tuples(st.sampled_from("+-"), st.text("IXYZ", min_size=n, max_size=n))
).map(lambda t: PauliOp.from_string(t[0] + t[1]))


def pair_of_size(max_n=6):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(
            st.sampled_from("+-"), st.text("IXYZ", min_size=n, max_size=n),
            st.sampled_from("+-"), st.text("IXYZ", min_size=n, max_size=n),
        )
    ).map(lambda t: (PauliOp.from_string(t[0] + t[1]), PauliOp.from_string(t[2] + t[3])))


def random_matrix(rng, rows, cols):
    return BitMatrix.from_dense(rng.integers(0, 2, size=(rows, cols)))


class TestBitMatrix:
    def test_roundtrip_wide(self):
        rng = np.random.default_rng(0)
        dense = rng.integers(0, 2, size=(5, 130)).astype(np.uint8)
        assert np.array_equal(BitMatrix.from_dense(dense).to_dense(), dense)

    def test_rref_identity(self):
        R, piv = rref(BitMatrix.identity(3))
        assert R == BitMatrix.identity(3)
        assert piv == [0, 1, 2]

    def test_rref_idempotent(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            M = random_matrix(rng, 6, 8)
            R, piv = rref(M)
            R2, piv2 = rref(R)
            assert R == R2 and piv == piv2

    def test_rank_cycle_matrix(self):
        M = BitMatrix.from_dense([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        assert rank(M) == 2
        R, _ = rref(M)
        assert int(R.to_dense().any(axis=1).sum()) == 2
        # oracle: the span has 2^rank elements
        rows = [int("".join(map(str, r[::-1])), 2) for r in M.to_dense()]
        assert len(span_gf2(rows)) == 4

    def test_rref_is_reduced(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            M = random_matrix(rng, 7, 9)
            R, piv = rref(M)
            d = R.to_dense()
            for i, c in enumerate(piv):
                assert d[i, c] == 1
                assert d[:, c].sum() == 1
                assert not d[i, :c].any()
            assert not d[len(piv):].any()
            assert piv == sorted(piv)

    def test_rref_preserves_row_space(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            M = random_matrix(rng, 6, 10)
            R, piv = rref(M)
            basis = BitMatrix.from_dense(R.to_dense()[: len(piv)])
            for row in M.to_dense():
                assert solve(basis.transpose(), row) is not None

    def test_rank_matches_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            M = random_matrix(rng, int(rng.integers(1, 9)), int(rng.integers(1, 70)))
            assert rank(M) == rank_gf2(M.row_ints())

    def test_solve_identity(self):
        b = np.array([1, 0, 1, 1], dtype=np.uint8)
        assert np.array_equal(solve(BitMatrix.identity(4), b), b)

    def test_solve_inconsistent(self):
        M = BitMatrix.from_dense([[1, 0], [0, 0]])
        assert solve(M, np.array([0, 1])) is None

    def test_solve_random(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            M = random_matrix(rng, 8, 10)
            x0 = rng.integers(0, 2, size=10)
            b = M @ x0
            x = solve(M, b)
            assert x is not None
            assert np.array_equal(M @ x, b)

    def test_solve_dimension_mismatch(self):
        with pytest.raises(ContractViolation):
            solve(BitMatrix.identity(3), np.zeros(4))

    def test_nullspace(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            M = random_matrix(rng, 5, 9)
            N = nullspace(M)
            assert N.rows == 9 - rank(M)
            for v in N.to_dense():
                assert not (M @ v).any()
            assert rank(N) == N.rows

    def test_rowspace_membership(self):
        rs = RowSpace([0b0011, 0b0110])
        assert 0b0101 in rs
        assert 0b0001 not in rs
        assert rs.dimension == 2


class TestPauliOp:
    def test_text_roundtrip(self):
        for text in ("+XYZI", "-ZZII", "+I"):
            assert str(PauliOp.from_string(text)) == text
        assert PauliOp.from_string("−XXIZ") == PauliOp.from_string("-XXIZ")
        assert PauliOp.from_string("XZ").sign == 1

    def test_bad_character(self):
        with pytest.raises(ContractViolation):
            PauliOp.from_string("XQ")

    def test_support_weight(self):
        P = PauliOp.from_string("XIYZI")
        assert P.support == frozenset({0, 2, 3})
        assert P.weight == 3

    def test_commutation_examples(self):
        assert not symplectic_commutes(PauliOp.from_string("XI"), PauliOp.from_string("ZI"))
        assert symplectic_commutes(PauliOp.from_string("XX"), PauliOp.from_string("ZZ"))

    def test_size_mismatch(self):
        with pytest.raises(ContractViolation):
            symplectic_commutes(PauliOp.from_string("X"), PauliOp.from_string("XX"))
        with pytest.raises(ContractViolation):
            multiply(PauliOp.from_string("X"), PauliOp.from_string("XX"))

    def test_multiply_examples(self):
        P = PauliOp.from_string("-XYZ")
        assert P * PauliOp.identity(3) == P
        assert PauliOp.from_string("ZI") * PauliOp.from_string("ZI") == PauliOp.identity(2)
        assert PauliOp.from_string("X") * PauliOp.from_string("Z") == PauliOp.from_string("Y")

    @settings(max_examples=300, deadline=None)
    @given(pair_of_size())
    def test_multiply_matches_dense(self, pq):
        P, Q = pq
        dense = pauli_dense(str(P)) @ pauli_dense(str(Q))
        R = pauli_dense(str(P * Q))
        if symplectic_commutes(P, Q):
            assert np.allclose(dense, R, atol=1e-12)
        else:
            # anticommuting products are returned as the Hermitian i*P*Q
            assert np.allclose(1j * dense, R, atol=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(pair_of_size())
    def test_commutes_matches_dense(self, pq):
        P, Q = pq
        a, b = pauli_dense(str(P)), pauli_dense(str(Q))
        assert symplectic_commutes(P, Q) == np.allclose(a @ b, b @ a)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 12).flatmap(lambda n: st.lists(st.text("IXYZ", min_size=n, max_size=n),
                                                          min_size=3, max_size=3)))
    def test_bilinearity(self, texts):
        P, Q, R = (PauliOp.from_string(t) for t in texts)
        expected = symplectic_commutes(P, Q) == symplectic_commutes(P, R)
        assert symplectic_commutes(P, Q * R) == expected

    @settings(max_examples=200, deadline=None)
    @given(pair_of_size(12))
    def test_weight_subadditive(self, pq):
        P, Q = pq
        assert (P * Q).weight <= P.weight + Q.weight

    @settings(max_examples=200, deadline=None)
    @given(signed)
    def test_square_is_identity(self, P):
        sq = P * P
        assert sq.is_identity and sq.sign == 1

    def test_associative_on_commuting_triples(self):
        rng = np.random.default_rng(7)
        checked = 0
        for _ in range(2000):
            ops = [PauliOp(4, int(rng.integers(16)), int(rng.integers(16)), int(rng.choice([1, -1])))
                   for _ in range(3)]
            if all(symplectic_commutes(a, b) for a, b in itertools.combinations(ops, 2)):
                P, Q, R = ops
                assert (P * Q) * R == P * (Q * R)
                checked += 1
        assert checked > 50

    def test_restricted_and_symplectic(self):
        P = PauliOp.from_string("-XYZ")
        assert str(P.restricted([1, 2])) == "-IYZ"
        assert PauliOp.from_symplectic(P.symplectic(), -1) == P
