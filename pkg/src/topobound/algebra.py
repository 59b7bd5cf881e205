"""GF(2) bit-matrix linear algebra and binary-symplectic Pauli operators.

Bit matrices are stored as rows of packed 64-bit words.  Pauli operators keep
their x and z parts as Python integers used as bit sets (bit ``i`` is qubit
``i``), which makes products and commutation checks a handful of word
operations.

Pauli convention: ``PauliOp(n, x, z, sign)`` is the Hermitian operator
``sign * P_0 ⊗ ... ⊗ P_{n-1}`` with ``P_j`` in ``{I, X, Y, Z}`` selected by
``(x_j, z_j)``.  Products of commuting operators are exact.  Products of
anticommuting operators carry a factor ``±i``; it is absorbed so that
``X·Z`` reads as ``+Y`` and signs stay in ``{+1, -1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from topobound.errors import ContractViolation

_ONE = np.uint64(1)


def _pack_rows(dense: np.ndarray) -> np.ndarray:
    dense = np.asarray(dense, dtype=np.uint8) & 1
    if dense.ndim != 2:
        raise ContractViolation(f"expected a 2-D bit array, got shape {dense.shape}")
    rows, cols = dense.shape
    nwords = max(1, -(-cols // 64))
    padded = np.zeros((rows, nwords * 64), dtype=np.uint8)
    padded[:, :cols] = dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64).reshape(rows, nwords)


def _unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    rows = words.shape[0]
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8).reshape(rows, -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


def int_to_bits(value: int, length: int) -> np.ndarray:
    """Little-endian bit vector (uint8) of a non-negative integer."""
    nbytes = max(1, -(-length // 8))
    raw = np.frombuffer(value.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length].copy()


def bits_to_int(bits: Iterable[int]) -> int:
    arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=np.uint8) & 1
    if arr.size == 0:
        return 0
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


class BitMatrix:
    """Dense matrix over GF(2) with rows packed into 64-bit words.

    Instances are treated as immutable; every operation returns a new matrix.
    """

    __slots__ = ("rows", "cols", "words")

    def __init__(self, words: np.ndarray, cols: int):
        words = np.asarray(words, dtype=np.uint64)
        if words.ndim != 2:
            raise ContractViolation("packed words must be 2-D")
        self.rows = int(words.shape[0])
        self.cols = int(cols)
        self.words = words
        self.words.flags.writeable = False

    @classmethod
    def from_dense(cls, dense) -> BitMatrix:
        dense = np.asarray(dense)
        if dense.ndim == 1:
            dense = dense.reshape(1, -1)
        if dense.ndim != 2:
            raise ContractViolation(f"expected a 2-D array, got shape {dense.shape}")
        return cls(_pack_rows(dense), dense.shape[1])

    @classmethod
    def from_ints(cls, rows: Sequence[int], cols: int) -> BitMatrix:
        dense = np.zeros((len(rows), cols), dtype=np.uint8)
        for i, r in enumerate(rows):
            dense[i] = int_to_bits(r, cols)
        return cls.from_dense(dense)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(np.zeros((rows, max(1, -(-cols // 64))), dtype=np.uint64), cols)

    @classmethod
    def identity(cls, size: int) -> BitMatrix:
        return cls.from_dense(np.eye(size, dtype=np.uint8))

    def to_dense(self) -> np.ndarray:
        return _unpack_rows(self.words, self.cols)

    def row_ints(self) -> list[int]:
        return [bits_to_int(r) for r in self.to_dense()]

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_dense(self.to_dense().T)

    def columns(self, cols: Sequence[int]) -> BitMatrix:
        return BitMatrix.from_dense(self.to_dense()[:, list(cols)])

    def rank(self) -> int:
        return len(_eliminate(self.words, self.cols)[1])

    def __matmul__(self, vector) -> np.ndarray:
        vec = np.asarray(vector, dtype=np.uint8) & 1
        if vec.shape != (self.cols,):
            raise ContractViolation(f"vector of length {vec.shape} for {self.cols} columns")
        return (self.to_dense().astype(np.int64) @ vec.astype(np.int64) % 2).astype(np.uint8)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and np.array_equal(
            self.words, other.words
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


def _eliminate(words: np.ndarray, cols: int, pivot_limit: int | None = None):
    """Gauss-Jordan elimination on packed rows.

    Pivots are searched left to right among the first ``pivot_limit`` columns;
    within a column the topmost eligible row wins.
    """
    W = np.array(words, dtype=np.uint64, copy=True)
    m = W.shape[0]
    limit = cols if pivot_limit is None else pivot_limit
    pivots: list[int] = []
    r = 0
    for c in range(limit):
        if r == m:
            break
        w, b = divmod(c, 64)
        shift = np.uint64(b)
        column = (W[:, w] >> shift) & _ONE
        below = np.flatnonzero(column[r:])
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            W[[r, p]] = W[[p, r]]
            column[[r, p]] = column[[p, r]]
        hit = column.astype(bool)
        hit[r] = False
        if hit.any():
            W[hit] ^= W[r]
        pivots.append(c)
        r += 1
    return W, pivots


def rref(M: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row-echelon form over GF(2) and the list of pivot columns."""
    W, pivots = _eliminate(M.words, M.cols)
    return BitMatrix(W, M.cols), pivots


def rank(M: BitMatrix) -> int:
    return M.rank()


def solve(M: BitMatrix, b) -> np.ndarray | None:
    """Return some ``x`` with ``M @ x = b`` over GF(2), or ``None`` if inconsistent.

    Free variables are set to zero, so the answer is deterministic.
    """
    b = np.asarray(b, dtype=np.uint8) & 1
    if b.shape != (M.rows,):
        raise ContractViolation(f"right-hand side has length {b.size}, matrix has {M.rows} rows")
    aug = np.zeros((M.rows, M.cols + 1), dtype=np.uint8)
    aug[:, : M.cols] = M.to_dense()
    aug[:, M.cols] = b
    W, pivots = _eliminate(_pack_rows(aug), M.cols + 1, pivot_limit=M.cols)
    reduced = _unpack_rows(W, M.cols + 1)
    if reduced[len(pivots) :, M.cols].any():
        return None
    x = np.zeros(M.cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = reduced[i, M.cols]
    return x


def nullspace(M: BitMatrix) -> BitMatrix:
    """Basis of ``{x : M @ x = 0}`` as the rows of a BitMatrix."""
    R, pivots = rref(M)
    dense = R.to_dense()
    free = [c for c in range(M.cols) if c not in set(pivots)]
    basis = np.zeros((len(free), M.cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, c in enumerate(pivots):
            if dense[row, f]:
                basis[i, c] = 1
    if not free:
        return BitMatrix.zeros(0, M.cols)
    return BitMatrix.from_dense(basis)


class RowSpace:
    """Row space of a set of bit rows, reduced once for fast membership tests.

    Rows are Python integers.  ``reduce`` returns the remainder of a vector
    after clearing every pivot bit, which is zero exactly for members.
    """

    def __init__(self, rows: Iterable[int]):
        basis: list[tuple[int, int]] = []
        for r in rows:
            for pivot, vec in basis:
                if r >> pivot & 1:
                    r ^= vec
            if r:
                pivot = r.bit_length() - 1
                basis = [(p, v ^ r if v >> pivot & 1 else v) for p, v in basis]
                basis.append((pivot, r))
        self._basis = basis

    @property
    def dimension(self) -> int:
        return len(self._basis)

    def reduce(self, vector: int) -> int:
        for pivot, vec in self._basis:
            if vector >> pivot & 1:
                vector ^= vec
        return vector

    def __contains__(self, vector: int) -> bool:
        return self.reduce(vector) == 0


_PAULI_CHARS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_CHAR_BITS = {"I": (0, 0), "_": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class PauliOp:
    """Signed n-qubit Pauli operator in binary-symplectic form."""

    n: int
    x: int = 0
    z: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ContractViolation(f"sign must be +1 or -1, got {self.sign}")
        if self.x >> self.n or self.z >> self.n or self.x < 0 or self.z < 0:
            raise ContractViolation("x/z bits exceed the qubit count")

    @classmethod
    def identity(cls, n: int) -> PauliOp:
        return cls(n)

    @classmethod
    def from_string(cls, text: str) -> PauliOp:
        """Parse ``"-XXIZ"`` style text; the leading sign may be ``+``, ``-`` or ``−``."""
        text = text.strip()
        sign = 1
        if text[:1] in ("+", "-", "−"):
            sign = -1 if text[0] != "+" else 1
            text = text[1:]
        x = z = 0
        for i, ch in enumerate(text.upper()):
            try:
                xb, zb = _CHAR_BITS[ch]
            except KeyError:
                raise ContractViolation(f"invalid Pauli character {ch!r} in {text!r}") from None
            x |= xb << i
            z |= zb << i
        return cls(len(text), x, z, sign)

    @classmethod
    def from_sparse(cls, n: int, terms: dict[int, str] | Iterable[tuple[int, str]], sign: int = 1) -> PauliOp:
        x = z = 0
        items = terms.items() if isinstance(terms, dict) else terms
        for q, ch in items:
            xb, zb = _CHAR_BITS[ch.upper()]
            if not 0 <= q < n:
                raise ContractViolation(f"qubit {q} out of range for n={n}")
            x ^= xb << q
            z ^= zb << q
        return cls(n, x, z, sign)

    @classmethod
    def from_symplectic(cls, vector, sign: int = 1) -> PauliOp:
        vec = np.asarray(vector, dtype=np.uint8)
        n = vec.size // 2
        return cls(n, bits_to_int(vec[:n]), bits_to_int(vec[n:]), sign)

    @classmethod
    def on(cls, n: int, sites: Iterable[int], kind: str) -> PauliOp:
        """Uniform operator of type ``kind`` on every site in ``sites``."""
        return cls.from_sparse(n, [(q, kind) for q in sites])

    def __str__(self) -> str:
        chars = "".join(
            _PAULI_CHARS[(self.x >> i & 1, self.z >> i & 1)] for i in range(self.n)
        )
        return ("+" if self.sign == 1 else "-") + chars

    @property
    def x_bits(self) -> np.ndarray:
        return int_to_bits(self.x, self.n)

    @property
    def z_bits(self) -> np.ndarray:
        return int_to_bits(self.z, self.n)

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    @cached_property
    def support(self) -> frozenset[int]:
        mask = self.x | self.z
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return frozenset(out)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def symplectic(self) -> np.ndarray:
        """Length-2n vector ``[x | z]``."""
        return np.concatenate([self.x_bits, self.z_bits])

    def symplectic_int(self) -> int:
        return self.x | (self.z << self.n)

    def restricted(self, sites: Iterable[int]) -> PauliOp:
        """Keep only the tensor factors on ``sites`` (sign preserved)."""
        mask = 0
        for q in sites:
            mask |= 1 << q
        return PauliOp(self.n, self.x & mask, self.z & mask, self.sign)

    def commutes(self, other: PauliOp) -> bool:
        return symplectic_commutes(self, other)

    def __mul__(self, other: PauliOp) -> PauliOp:
        return multiply(self, other)

    def __neg__(self) -> PauliOp:
        return PauliOp(self.n, self.x, self.z, -self.sign)

    def unsigned(self) -> PauliOp:
        return PauliOp(self.n, self.x, self.z, 1)


def _check_sizes(P: PauliOp, Q: PauliOp) -> None:
    if P.n != Q.n:
        raise ContractViolation(f"Pauli operators act on {P.n} and {Q.n} qubits")


def symplectic_commutes(P: PauliOp, Q: PauliOp) -> bool:
    """True iff ``<P.x, Q.z> + <P.z, Q.x> = 0 (mod 2)``."""
    _check_sizes(P, Q)
    return (((P.x & Q.z) ^ (P.z & Q.x)).bit_count() & 1) == 0


def product_phase(P: PauliOp, Q: PauliOp) -> int:
    """Exponent ``k`` (mod 4) with ``P·Q = i^k · sign_P·sign_Q · R``, R Hermitian."""
    mask = (1 << P.n) - 1
    py, px, pz = P.x & P.z, P.x & ~P.z & mask, P.z & ~P.x & mask
    qy, qx, qz = Q.x & Q.z, Q.x & ~Q.z & mask, Q.z & ~Q.x & mask
    plus = (py & qz).bit_count() + (px & qy).bit_count() + (pz & qx).bit_count()
    minus = (py & qx).bit_count() + (px & qz).bit_count() + (pz & qy).bit_count()
    return (plus - minus) % 4


def multiply(P: PauliOp, Q: PauliOp) -> PauliOp:
    """Pauli product with the phase restricted to ``±1``."""
    _check_sizes(P, Q)
    k = product_phase(P, Q)
    if k & 1:
        k = (k + 1) % 4
    sign = P.sign * Q.sign * (-1 if k == 2 else 1)
    return PauliOp(P.n, P.x ^ Q.x, P.z ^ Q.z, sign)


def product(ops: Iterable[PauliOp], n: int) -> PauliOp:
    out = PauliOp(n)
    for op in ops:
        out = multiply(out, op)
    return out


def symplectic_inner(a: int, b: int, n: int) -> int:
    """Symplectic form of two ``x | z << n`` packed vectors."""
    mask = (1 << n) - 1
    ax, az = a & mask, a >> n
    bx, bz = b & mask, b >> n
    return ((ax & bz) ^ (az & bx)).bit_count() & 1


def check_matrix(ops: Sequence[PauliOp], n: int | None = None) -> BitMatrix:
    """Stack operators as rows ``[x | z]`` of a ``len(ops) x 2n`` bit matrix."""
    if n is None:
        if not ops:
            raise ContractViolation("cannot infer n from an empty operator list")
        n = ops[0].n
    dense = np.zeros((len(ops), 2 * n), dtype=np.uint8)
    for i, op in enumerate(ops):
        if op.n != n:
            raise ContractViolation("operators of mixed size")
        dense[i] = op.symplectic()
    return BitMatrix.from_dense(dense)
