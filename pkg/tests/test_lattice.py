from __future__ import annotations

import itertools

import numpy as np
import pytest

from topobound.codes import build_toric_2d, toric2d_h, toric2d_v
from topobound.errors import ContractViolation
from topobound.lattice import Lattice, Region


def brute_distance(lat: Lattice, a: int, b: int) -> int:
    best = 0
    for axis, ext in enumerate(lat.extent):
        d = abs(int(lat.coords[a][axis]) - int(lat.coords[b][axis])) % ext
        best = max(best, min(d, ext - d))
    return best


@pytest.fixture(scope="module")
def torus4():
    return build_toric_2d(4).lattice


def test_distance_zero_inside(torus4):
    B = torus4.region([3, 7])
    assert torus4.distance(3, B) == 0


def test_ring_antipodal():
    L = 5
    ring = Lattice([(2 * i,) for i in range(L)], (2 * L,))
    # doubled extent 2L: sites i and i + L/2 ... use coordinates 0 and L in doubled units
    lat = Lattice([(0,), (L,)], (2 * L,))
    assert lat.site_distance(0, 1) == L
    assert ring.diameter == L


def test_distance_matches_brute_force(torus4):
    rng = np.random.default_rng(0)
    for _ in range(30):
        sites = rng.choice(torus4.n, size=int(rng.integers(1, 6)), replace=False)
        B = torus4.region(sites)
        x = int(rng.integers(torus4.n))
        assert torus4.distance(x, B) == min(brute_distance(torus4, x, b) for b in sites)


def test_empty_region_rejected(torus4):
    with pytest.raises(ContractViolation):
        torus4.distance(0, torus4.region([]))
    with pytest.raises(ContractViolation):
        torus4.region_distance(torus4.region([]), torus4.region([1]))


def test_neighborhood_basics(torus4):
    B = torus4.region([5])
    assert torus4.neighborhood(B, 0) == B
    assert len(torus4.neighborhood(B, torus4.diameter)) == torus4.n
    with pytest.raises(ContractViolation):
        torus4.neighborhood(B, -1)


def test_neighborhood_single_edge_by_hand():
    L = 4
    lat = build_toric_2d(L).lattice
    q = toric2d_h(L, 1, 1)  # coordinate (3, 2)
    got = lat.neighborhood(lat.region([q]), 1).sites
    # edges at L-inf distance 1: the four vertical edges touching its endpoints
    expected = {q, toric2d_v(L, 1, 1), toric2d_v(L, 2, 1), toric2d_v(L, 1, 0), toric2d_v(L, 2, 0)}
    assert got == expected
    assert got == {s for s in range(lat.n) if brute_distance(lat, q, s) <= 1}


def test_neighborhood_monotone_and_composes(torus4):
    rng = np.random.default_rng(1)
    for _ in range(10):
        B = torus4.region(rng.choice(torus4.n, size=3, replace=False))
        for r in range(4):
            assert torus4.neighborhood(B, r) <= torus4.neighborhood(B, r + 1)
            for s in range(3):
                nested = torus4.neighborhood(torus4.neighborhood(B, r), s)
                assert nested == torus4.neighborhood(B, r + s)


def test_triangle_inequality_exhaustive():
    for L in (2, 3, 4):
        lat = build_toric_2d(L).lattice
        D = lat.distance_matrix
        assert (D[:, :, None] <= D[:, None, :] + D.T[None, :, :]).all()
        for a, b in itertools.combinations(range(lat.n), 2):
            assert D[a, b] == brute_distance(lat, a, b)


def test_cube_r1_is_cell(torus4):
    cube = torus4.cube((1, 2), 1)
    assert cube.sites == {toric2d_h(4, 1, 2), toric2d_v(4, 1, 2)}


def test_cube_covers_torus(torus4):
    assert len(torus4.cube((0, 0), 4)) == torus4.n
    assert len(torus4.cube((2, 1), 9)) == torus4.n


def test_cube_matches_coordinate_filter(torus4):
    L, R = 4, 3
    for v in torus4.all_cells():
        expected = set()
        for s in range(torus4.n):
            cx, cy = (int(c) // 2 for c in torus4.coords[s])
            if all(((c - vc + 1) % L) < R for c, vc in ((cx, v[0]), (cy, v[1]))):
                expected.add(s)
        assert torus4.cube(v, R).sites == expected
    assert len(torus4.cube((0, 0), 3)) == 18


def test_cube_even_centering(torus4):
    cells = {torus4.cell_of(s) for s in torus4.cube((1, 1), 2).sites}
    assert cells == {(1, 1), (2, 1), (1, 2), (2, 2)}


def test_cube_monotone(torus4):
    for v in torus4.all_cells():
        for R in range(1, 5):
            assert torus4.cube(v, R) <= torus4.cube(v, R + 1)


def test_region_distance_strips():
    L = 6
    lat = build_toric_2d(L).lattice
    s1 = lat.region(toric2d_v(L, 0, y) for y in range(L))
    s2 = lat.region(toric2d_v(L, L // 2, y) for y in range(L))
    brute = min(brute_distance(lat, a, b) for a in s1 for b in s2)
    # width-1 strips: half the doubled extent minus the strip width of 0
    assert lat.region_distance(s1, s2) == brute == L
    assert lat.region_distance(s2, s1) == brute
    assert lat.region_distance(s1, s1 | s2) == 0


def test_region_text():
    lat = build_toric_2d(2).lattice
    R = Region.parse("5, 1,3", lat)
    assert str(R) == "1,3,5"
    assert Region.parse("", lat).sites == frozenset()
    with pytest.raises(ContractViolation):
        Region(frozenset({99}), lat)


def test_bad_lattice():
    with pytest.raises(ContractViolation):
        Lattice([(0, 0)], (4,))
