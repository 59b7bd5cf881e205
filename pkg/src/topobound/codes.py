"""Stabilizer codes on periodic lattices: builders, loading, logical bases and distance."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from topobound.algebra import (
    BitMatrix,
    PauliOp,
    RowSpace,
    check_matrix,
    nullspace,
    solve,
    symplectic_commutes,
    symplectic_inner,
)
from topobound.errors import ContractViolation, DistanceInfeasible, ValidationError
from topobound.lattice import METRIC, Lattice

DISTANCE_BUDGET = 1 << 30
COSET_BUDGET = 1 << 22
# subsets held in memory at once by the weight search
LEVEL_LIMIT = 1 << 26


@dataclass(frozen=True)
class CodeDistanceCertificate:
    """Exact code distance with a minimum-weight logical witness."""

    d: int
    witness: PauliOp
    method: str


class StabilizerCode:
    """Commuting, independent Pauli generators embedded in a lattice.

    Args:
        generators: independent, pairwise commuting stabilizer generators.
        lattice: site geometry; ``lattice.n`` must equal the qubit count.
        logical_pairs: optional ``(X_i, Z_i)`` pairs; computed when omitted.
        name: short identifier used in reports.
        metadata: free-form construction notes.

    Raises:
        ValidationError: if the generators or logical pairs are inconsistent.
    """

    def __init__(
        self,
        generators: Sequence[PauliOp],
        lattice: Lattice,
        logical_pairs: Sequence[tuple[PauliOp, PauliOp]] | None = None,
        name: str = "custom",
        metadata: dict | None = None,
    ):
        self.generators = tuple(generators)
        self.lattice = lattice
        self.n = lattice.n
        self.name = name
        self.metadata = dict(metadata or {})
        self._validate_generators()
        self.k = self.n - len(self.generators)
        if logical_pairs is None:
            logical_pairs = logical_basis(self)
        self.logical_pairs = tuple((X, Z) for X, Z in logical_pairs)
        self._validate_logicals()
        self.xi = max((lattice.diameter_of(g.support) for g in self.generators), default=0)

    def _validate_generators(self) -> None:
        for i, g in enumerate(self.generators):
            if g.n != self.n:
                raise ValidationError(f"generator {i} acts on {g.n} qubits, lattice has {self.n}")
        for (i, a), (j, b) in itertools.combinations(enumerate(self.generators), 2):
            if not symplectic_commutes(a, b):
                raise ValidationError(f"generators {i} ({a}) and {j} ({b}) anticommute")
        if self.generators and check_matrix(self.generators, self.n).rank() != len(self.generators):
            raise ValidationError("generators are not independent")

    def _validate_logicals(self) -> None:
        if len(self.logical_pairs) != self.k:
            raise ValidationError(f"expected {self.k} logical pairs, got {len(self.logical_pairs)}")
        ops = self.logical_operators
        for op in ops:
            if op.n != self.n:
                raise ValidationError("logical operator has the wrong size")
            if self.syndrome(op):
                raise ValidationError(f"logical {op} anticommutes with a generator")
        for i, (Xi, Zi) in enumerate(self.logical_pairs):
            for j, (Xj, Zj) in enumerate(self.logical_pairs):
                expect = i != j
                if (symplectic_commutes(Xi, Zj) != expect or not symplectic_commutes(Xi, Xj)
                        or not symplectic_commutes(Zi, Zj)):
                    raise ValidationError(f"logical pairs {i} and {j} are not canonical")

    @property
    def logical_operators(self) -> list[PauliOp]:
        return [op for pair in self.logical_pairs for op in pair]

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    @cached_property
    def check_matrix(self) -> BitMatrix:
        return check_matrix(self.generators, self.n)

    @cached_property
    def _stabilizer_space(self) -> RowSpace:
        return RowSpace(g.symplectic_int() for g in self.generators)

    @cached_property
    def is_css(self) -> bool:
        return all(g.x == 0 or g.z == 0 for g in self.generators)

    def syndrome(self, P: PauliOp) -> int:
        """Bit ``i`` set iff ``P`` anticommutes with generator ``i``."""
        out = 0
        for i, g in enumerate(self.generators):
            if ((P.x & g.z) ^ (P.z & g.x)).bit_count() & 1:
                out |= 1 << i
        return out

    def in_stabilizer_group(self, P: PauliOp) -> bool:
        """Membership of ``P`` in the stabilizer group, ignoring the sign."""
        return P.symplectic_int() in self._stabilizer_space

    def stabilizer_coefficients(self, P: PauliOp) -> np.ndarray | None:
        """Generator coefficients whose product equals ``P`` up to sign."""
        if not self.generators:
            return np.zeros(0, dtype=np.uint8) if P.is_identity else None
        return solve(self.check_matrix.transpose(), P.symplectic())

    def stabilizer_element(self, coefficients) -> PauliOp:
        out = PauliOp(self.n)
        for c, g in zip(np.asarray(coefficients), self.generators):
            if c:
                out = out * g
        return out

    def is_logical(self, P: PauliOp) -> bool:
        """True for centralizer elements outside the stabilizer group."""
        return self.syndrome(P) == 0 and not self.in_stabilizer_group(P)

    def logical_action(self, P: PauliOp) -> int:
        """Bit mask of logical basis operators that anticommute with ``P``."""
        out = 0
        for i, op in enumerate(self.logical_operators):
            if not symplectic_commutes(P, op):
                out |= 1 << i
        return out

    def to_json(self) -> dict:
        doc = {
            "n": self.n,
            "name": self.name,
            "generators": [str(g) for g in self.generators],
            "coords": self.lattice.coords.tolist(),
            "metric": METRIC,
            "extent": list(self.lattice.extent),
            "logicals": [[str(X), str(Z)] for X, Z in self.logical_pairs],
        }
        return doc

    def __eq__(self, other) -> bool:
        if not isinstance(other, StabilizerCode):
            return NotImplemented
        return (
            self.n == other.n
            and self.generators == other.generators
            and self.lattice == other.lattice
            and self.logical_pairs == other.logical_pairs
        )

    def __hash__(self) -> int:
        return hash((self.n, self.generators))

    def __repr__(self) -> str:
        return f"StabilizerCode({self.name}, n={self.n}, k={self.k}, xi={self.xi})"


def load_code(document: dict | str) -> StabilizerCode:
    """Build a validated code from its JSON document (dict or text).

    Raises:
        ValidationError: on schema problems, anticommuting or dependent generators.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"code document is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ValidationError("code document must be a JSON object")
    for key in ("n", "generators", "coords", "extent"):
        if key not in document:
            raise ValidationError(f"code document is missing {key!r}")
    metric = document.get("metric", METRIC)
    if metric != METRIC:
        raise ValidationError(f"unsupported metric {metric!r}")
    n = int(document["n"])
    coords = document["coords"]
    if not isinstance(coords, list) or len(coords) != n:
        raise ValidationError(f"expected {n} coordinate entries, got {len(coords) if isinstance(coords, list) else 0}")
    extent = document["extent"]
    if any(not isinstance(c, list) or len(c) != len(extent) for c in coords):
        raise ValidationError("every coordinate must have one entry per extent axis")
    try:
        gens = [PauliOp.from_string(s) for s in document["generators"]]
        logicals = None
        if document.get("logicals") is not None:
            logicals = [(PauliOp.from_string(a), PauliOp.from_string(b)) for a, b in document["logicals"]]
    except ContractViolation as exc:
        raise ValidationError(str(exc)) from None
    for g in gens:
        if g.n != n:
            raise ValidationError(f"generator {g} does not have length {n}")
    try:
        lattice = Lattice(coords, extent)
    except ContractViolation as exc:
        raise ValidationError(str(exc)) from None
    return StabilizerCode(gens, lattice, logicals, name=document.get("name", "custom"))


def _symplectic_gram_schmidt(candidates: list[int], n: int) -> list[tuple[int, int]]:
    pairs = []
    pool = list(candidates)
    while pool:
        a = pool.pop(0)
        partner = next((i for i, c in enumerate(pool) if symplectic_inner(a, c, n)), None)
        if partner is None:
            continue
        b = pool.pop(partner)
        pool = [
            c ^ (b if symplectic_inner(c, a, n) else 0) ^ (a if symplectic_inner(c, b, n) else 0)
            for c in pool
        ]
        pool = [c for c in pool if c]
        pairs.append((a, b))
    return pairs


def logical_basis(code: StabilizerCode) -> list[tuple[PauliOp, PauliOp]]:
    """Canonical anticommuting logical pairs spanning centralizer modulo stabilizers.

    Candidates come from the centralizer (split into X and Z kernels for CSS
    codes, so that CSS codes get pure X-type and Z-type representatives) and
    are paired by symplectic Gram-Schmidt.  Stabilizer directions never find
    a partner and drop out.
    """
    n = code.n
    gens = code.generators
    if code.n - len(gens) == 0:
        return []
    mask = (1 << n) - 1
    if code.is_css:
        hx = [g.x for g in gens if g.x]
        hz = [g.z for g in gens if g.z]
        x_kernel = _kernel_ints(hz, n)
        z_kernel = _kernel_ints(hx, n)
        candidates = list(x_kernel) + [z << n for z in z_kernel]
    else:
        # v commutes with g iff v.x.g.z + v.z.g.x = 0: kernel of swapped rows
        swapped = [(g.z) | (g.x << n) for g in gens]
        candidates = _kernel_ints(swapped, 2 * n)
    pairs = _symplectic_gram_schmidt(candidates, n)
    if len(pairs) != code.k:
        raise ValidationError(f"found {len(pairs)} logical pairs, expected k = {code.k}")
    out = []
    for a, b in pairs:
        X = PauliOp(n, a & mask, a >> n)
        Z = PauliOp(n, b & mask, b >> n)
        out.append((X, Z))
    return out


def _kernel_ints(rows: list[int], width: int) -> list[int]:
    if not rows:
        return [1 << i for i in range(width)]
    M = BitMatrix.from_ints(rows, width)
    return nullspace(M).row_ints()


def toric2d_h(L: int, x: int, y: int) -> int:
    """Index of the horizontal edge leaving vertex (x, y)."""
    return (y % L) * L + (x % L)


def toric2d_v(L: int, x: int, y: int) -> int:
    """Index of the vertical edge leaving vertex (x, y)."""
    return L * L + (y % L) * L + (x % L)


def build_toric_2d(L: int) -> StabilizerCode:
    """Kitaev's toric code on an L x L torus with qubits on edges.

    Star and plaquette operators at the origin are dropped to make the
    generating set independent.  Logical pair 1 is (X on the horizontal
    edges of column 0, Z along row 0); pair 2 is the transposed version.
    """
    if L < 2:
        raise ContractViolation("toric code needs L >= 2")
    n = 2 * L * L
    h = lambda x, y: toric2d_h(L, x, y)  # noqa: E731
    v = lambda x, y: toric2d_v(L, x, y)  # noqa: E731
    coords = [None] * n
    for y in range(L):
        for x in range(L):
            coords[h(x, y)] = (2 * x + 1, 2 * y)
            coords[v(x, y)] = (2 * x, 2 * y + 1)
    stars, faces = [], []
    for y in range(L):
        for x in range(L):
            if (x, y) == (0, 0):
                continue
            stars.append(PauliOp.on(n, [h(x, y), h(x - 1, y), v(x, y), v(x, y - 1)], "X"))
            faces.append(PauliOp.on(n, [h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)], "Z"))
    logicals = [
        (PauliOp.on(n, [h(0, y) for y in range(L)], "X"), PauliOp.on(n, [h(x, 0) for x in range(L)], "Z")),
        (PauliOp.on(n, [v(x, 0) for x in range(L)], "X"), PauliOp.on(n, [v(0, y) for y in range(L)], "Z")),
    ]
    lattice = Lattice(coords, (2 * L, 2 * L))
    meta = {"L": L, "dropped": "star and plaquette at vertex (0,0)"}
    return StabilizerCode(stars + faces, lattice, logicals, name="toric2d", metadata=meta)


def build_toric_3d(L: int) -> StabilizerCode:
    """3D toric code on the L^3 cubic torus, qubits on edges.

    X-type generators are weight-6 vertex stars, Z-type generators are
    plaquettes chosen greedily to be independent.  Z logicals are straight
    edge loops (weight L), X logicals are dual membranes (weight L^2).
    """
    if L < 2:
        raise ContractViolation("toric code needs L >= 2")
    n = 3 * L ** 3

    def e(d: int, p) -> int:
        x, y, z = (c % L for c in p)
        return d * L ** 3 + (z * L + y) * L + x

    def shift(p, d, s=1):
        q = list(p)
        q[d] += s
        return tuple(q)

    coords = [None] * n
    verts = [(x, y, z) for z in range(L) for y in range(L) for x in range(L)]
    for p in verts:
        for d in range(3):
            coords[e(d, p)] = tuple(2 * c + (1 if a == d else 0) for a, c in enumerate(p))
    stars = []
    for p in verts[1:]:
        sites = [e(d, p) for d in range(3)] + [e(d, shift(p, d, -1)) for d in range(3)]
        stars.append(PauliOp.on(n, sites, "X"))
    faces = []
    space = RowSpace([])
    for p in verts:
        for a, b in ((0, 1), (0, 2), (1, 2)):
            sites = [e(a, p), e(b, p), e(a, shift(p, b)), e(b, shift(p, a))]
            f = PauliOp.on(n, sites, "Z")
            vec = f.z
            if vec not in space:
                faces.append(f)
                space = RowSpace([g.z for g in faces])
    logicals = []
    for d in range(3):
        zloop = PauliOp.on(n, [e(d, shift((0, 0, 0), d, s)) for s in range(L)], "Z")
        sheet = [e(d, p) for p in verts if p[d] == 0]
        logicals.append((PauliOp.on(n, sheet, "X"), zloop))
    lattice = Lattice(coords, (2 * L, 2 * L, 2 * L))
    meta = {"L": L, "dropped": "star at vertex (0,0,0); dependent plaquettes"}
    return StabilizerCode(stars + faces, lattice, logicals, name="toric3d", metadata=meta)


def ring_lattice(n: int) -> Lattice:
    return Lattice([(2 * i,) for i in range(n)], (2 * n,))


def build_repetition(n: int = 3) -> StabilizerCode:
    """Bit-flip repetition code with ``Z_i Z_{i+1}`` checks on an open chain."""
    gens = [PauliOp.on(n, [i, i + 1], "Z") for i in range(n - 1)]
    return StabilizerCode(gens, ring_lattice(n), name=f"repetition{n}")


def build_five_qubit() -> StabilizerCode:
    """The [[5,1,3]] code with cyclic XZZXI checks."""
    base = "XZZXI"
    gens = [PauliOp.from_string(base[-i:] + base[:-i] if i else base) for i in range(4)]
    return StabilizerCode(gens, ring_lattice(5), name="five_qubit")


BUILTIN_CODES = {"toric2d": build_toric_2d, "toric3d": build_toric_3d}


def build_code(name: str, L: int) -> StabilizerCode:
    try:
        builder = BUILTIN_CODES[name]
    except KeyError:
        raise ContractViolation(f"unknown code {name!r}; choose from {sorted(BUILTIN_CODES)}") from None
    return builder(L)


def distance(code: StabilizerCode, method: str = "auto", budget: int = DISTANCE_BUDGET) -> CodeDistanceCertificate:
    """Exact minimum weight of a logical operator.

    Args:
        code: code with ``k >= 1``.
        method: ``"coset"`` enumerates the stabilizer group for every logical
            class; ``"weight"`` runs a meet-in-the-middle search over supports
            of increasing weight; ``"auto"`` picks coset when it is cheap.
        budget: maximum number of enumerated group elements or subsets.

    Raises:
        ContractViolation: if the code encodes no qubits.
        DistanceInfeasible: if the search would exceed ``budget``.
    """
    if code.k < 1:
        raise ContractViolation("distance is undefined for k = 0")
    r = code.num_generators
    coset_cost = (1 << r) * ((1 << (2 * code.k)) - 1)
    if method == "auto":
        method = "coset" if coset_cost <= COSET_BUDGET else "weight"
    if method == "coset":
        if coset_cost > min(budget, COSET_BUDGET) or 2 * code.n > 64:
            raise DistanceInfeasible(f"coset enumeration of {coset_cost} elements exceeds the budget")
        return _distance_coset(code)
    if method == "weight":
        return _distance_weight(code, budget)
    raise ContractViolation(f"unknown distance method {method!r}")


def _popcount_u64(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a)


def _distance_coset(code: StabilizerCode) -> CodeDistanceCertificate:
    n = code.n
    mask = np.uint64((1 << n) - 1)
    group = np.zeros(1, dtype=np.uint64)
    for g in code.generators:
        group = np.concatenate([group, group ^ np.uint64(g.symplectic_int())])
    ops = [op.symplectic_int() for op in code.logical_operators]
    best = None
    for combo in range(1, 1 << len(ops)):
        rep = 0
        for i, op in enumerate(ops):
            if combo >> i & 1:
                rep ^= op
        coset = group ^ np.uint64(rep)
        weights = _popcount_u64((coset & mask) | (coset >> np.uint64(n)))
        i = int(np.argmin(weights))
        w = int(weights[i])
        if best is None or w < best[0]:
            best = (w, int(coset[i]))
    w, vec = best
    witness = PauliOp(n, vec & ((1 << n) - 1), vec >> n)
    return CodeDistanceCertificate(w, witness, "coset")


def _distance_weight(code: StabilizerCode, budget: int) -> CodeDistanceCertificate:
    """Meet-in-the-middle search over supports of increasing weight.

    A weight-w logical splits into disjoint halves ``a``, ``b`` of sizes
    ``ceil(w/2)`` and ``floor(w/2)`` with equal syndromes and different
    logical action.  Conversely every such pair multiplies to a logical of
    weight at most w, so the first weight with a collision is the distance.
    CSS codes search X-type and Z-type supports separately.
    """
    n = code.n
    kinds = ["X", "Z"] if code.is_css else ["XYZ"]
    nwords = max(1, -(-code.num_generators // 64))
    spent = [0]
    searches = []
    for kind in kinds:
        cols = [(q, ch) for q in range(n) for ch in kind]
        syn = np.zeros((len(cols), nwords), dtype=np.uint64)
        lm = np.zeros(len(cols), dtype=np.uint64)
        for i, (q, ch) in enumerate(cols):
            P = PauliOp.from_sparse(n, {q: ch})
            s = code.syndrome(P)
            for w in range(nwords):
                syn[i, w] = np.uint64((s >> (64 * w)) & ((1 << 64) - 1))
            lm[i] = np.uint64(code.logical_action(P))
        searches.append((cols, syn, lm, [_Level.empty(nwords)]))
    for w in range(1, n + 1):
        h = -(-w // 2)
        for cols, syn, lm, levels in searches:
            while len(levels) <= h:
                levels.append(levels[-1].extend(syn, lm, spent, budget))
            hit = _collide(levels[h], levels[w // 2])
            if hit is None:
                continue
            P = PauliOp(n)
            for i in hit:
                q, ch = cols[i]
                P = P * PauliOp.from_sparse(n, {q: ch})
            P = P.unsigned()
            return CodeDistanceCertificate(P.weight, P, "weight")
    raise ContractViolation("no logical operator found; the code has no logical qubits")


@dataclass
class _Level:
    """All column subsets of one size with their syndromes and logical masks."""

    members: np.ndarray
    syn: np.ndarray
    lm: np.ndarray

    @classmethod
    def empty(cls, nwords: int) -> _Level:
        return cls(np.zeros((1, 0), dtype=np.int32), np.zeros((1, nwords), dtype=np.uint64),
                   np.zeros(1, dtype=np.uint64))

    def extend(self, syn: np.ndarray, lm: np.ndarray, spent: list[int], budget: int) -> _Level:
        ncols = syn.shape[0]
        last = self.members[:, -1] if self.members.shape[1] else np.full(len(self.lm), -1)
        counts = ncols - 1 - last
        total = int(counts.sum())
        spent[0] += total
        if spent[0] > budget or total > LEVEL_LIMIT:
            raise DistanceInfeasible(
                f"weight search needs {total} subsets at one level ({spent[0]} in total); budget exceeded"
            )
        parent = np.repeat(np.arange(len(self.lm)), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        new_col = (np.arange(total) - starts + np.repeat(last + 1, counts)).astype(np.int32)
        members = np.concatenate([self.members[parent], new_col[:, None]], axis=1)
        return _Level(members, self.syn[parent] ^ syn[new_col], self.lm[parent] ^ lm[new_col])


def _collide(A: _Level, B: _Level) -> list[int] | None:
    """Members of some ``a`` in A and ``b`` in B with equal syndrome and different mask."""
    syn = np.concatenate([A.syn, B.syn])
    lm = np.concatenate([A.lm, B.lm])
    side = np.concatenate([np.zeros(len(A.lm), dtype=np.int8), np.ones(len(B.lm), dtype=np.int8)])
    order = np.lexsort([lm, side] + [syn[:, w] for w in range(syn.shape[1])])
    s_syn, s_lm, s_side = syn[order], lm[order], side[order]
    new_run = np.ones(len(order), dtype=bool)
    new_run[1:] = (s_syn[1:] != s_syn[:-1]).any(axis=1)
    run_id = np.cumsum(new_run) - 1
    nruns = int(run_id[-1]) + 1
    big = np.iinfo(np.uint64).max
    a_min = np.full(nruns, big, dtype=np.uint64)
    a_max = np.zeros(nruns, dtype=np.uint64)
    b_min = np.full(nruns, big, dtype=np.uint64)
    b_max = np.zeros(nruns, dtype=np.uint64)
    has_a = np.zeros(nruns, dtype=bool)
    has_b = np.zeros(nruns, dtype=bool)
    for flag, lo, hi, has in ((0, a_min, a_max, has_a), (1, b_min, b_max, has_b)):
        sel = s_side == flag
        np.minimum.at(lo, run_id[sel], s_lm[sel])
        np.maximum.at(hi, run_id[sel], s_lm[sel])
        has[run_id[sel]] = True
    uniform = (a_min == a_max) & (b_min == b_max) & (a_min == b_min)
    good = np.flatnonzero(has_a & has_b & ~uniform)
    if good.size == 0:
        return None
    rows = np.flatnonzero(run_id == good[0])
    a_rows = [order[i] for i in rows if s_side[i] == 0]
    b_rows = [order[i] - len(A.lm) for i in rows if s_side[i] == 1]
    for ia in a_rows:
        for ib in b_rows:
            if A.lm[ia] != B.lm[ib]:
                return list(A.members[ia]) + list(B.members[ib])
    return None


def weight_enumerator_oracle(code: StabilizerCode, max_weight: int) -> int | None:
    """Brute-force minimum logical weight up to ``max_weight`` (test oracle)."""
    n = code.n
    for w in range(1, max_weight + 1):
        for sites in itertools.combinations(range(n), w):
            for chars in itertools.product("XYZ", repeat=w):
                P = PauliOp.from_sparse(n, list(zip(sites, chars)))
                if code.is_logical(P):
                    return w
    return None


def translate_toric2d(code: StabilizerCode, P: PauliOp, dx: int, dy: int) -> PauliOp:
    """Translate a toric-2D operator by (dx, dy) lattice units."""
    L = code.metadata["L"]
    x = z = 0
    for q in range(code.n):
        bx, bz = P.x >> q & 1, P.z >> q & 1
        if not (bx or bz):
            continue
        horizontal = q < L * L
        qx, qy = (q % (L * L)) % L, (q % (L * L)) // L
        target = (toric2d_h if horizontal else toric2d_v)(L, qx + dx, qy + dy)
        x |= bx << target
        z |= bz << target
    return PauliOp(code.n, x, z, P.sign)


__all__ = [
    "CodeDistanceCertificate",
    "StabilizerCode",
    "build_code",
    "build_five_qubit",
    "build_repetition",
    "build_toric_2d",
    "build_toric_3d",
    "distance",
    "load_code",
    "logical_basis",
    "toric2d_h",
    "toric2d_v",
    "translate_toric2d",
]
