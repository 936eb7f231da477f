"""Grid construction, decomposition, and donor-map tests.

Donor maps are checked against a brute-force centroid-matching oracle: for every
ghost cell of every interface we locate the donor by comparing physical centroid
coordinates, independently of the index arithmetic in mesh.py.
"""

import numpy as np
import pytest

from schwarzrom.exceptions import ConfigurationError
from schwarzrom.mesh import (
    SIDES,
    build_donor_maps,
    build_grid,
    decompose,
    gather_fields,
    scatter_field,
)


def test_grid_spacing_and_counts():
    g = build_grid(300, 300, (-5.0, 5.0, -5.0, 5.0), n_vars=3)
    assert g.dx == pytest.approx(10.0 / 300)
    assert g.dy == pytest.approx(10.0 / 300)
    assert g.n_cells == 90000
    assert g.n_dof == 270000


def test_grid_single_cell_centroid():
    g = build_grid(1, 1, (0.0, 1.0, 0.0, 1.0))
    X, Y = g.centroids()
    assert X[0, 0] == pytest.approx(0.5)
    assert Y[0, 0] == pytest.approx(0.5)


def test_grid_anisotropic():
    g = build_grid(4, 2, (0.0, 4.0, 0.0, 1.0), n_vars=2)
    assert g.dx == pytest.approx(1.0)
    assert g.dy == pytest.approx(0.5)
    assert g.n_dof == 16
    assert np.allclose(g.x_centers(), [0.5, 1.5, 2.5, 3.5])
    assert np.allclose(g.y_centers(), [0.25, 0.75])


@pytest.mark.parametrize(
    "args",
    [
        (0, 4, (0.0, 1.0, 0.0, 1.0), 1),
        (4, 4, (1.0, 1.0, 0.0, 1.0), 1),
        (4, 4, (0.0, 1.0, 2.0, 1.0), 1),
        (4, 4, (0.0, 1.0, 0.0, 1.0), 0),
    ],
)
def test_grid_invalid(args):
    with pytest.raises(ConfigurationError):
        build_grid(*args)


def _cells(sub):
    return {
        (i, j)
        for i in range(sub.i0, sub.i1 + 1)
        for j in range(sub.j0, sub.j1 + 1)
    }


def test_decompose_2x2_no_overlap():
    g = build_grid(300, 300, (-5.0, 5.0, -5.0, 5.0), n_vars=3)
    subs = decompose(g, 2, 2, 0)
    assert len(subs) == 4
    for s in subs:
        assert (s.nx, s.ny) == (150, 150)
    allcells = [_cells(s) for s in subs]
    for a in range(4):
        for b in range(a + 1, 4):
            assert not (allcells[a] & allcells[b])
    assert set.union(*allcells) == {(i, j) for i in range(300) for j in range(300)}


def test_decompose_identity():
    g = build_grid(7, 5, (0.0, 1.0, 0.0, 1.0))
    (s,) = decompose(g, 1, 1, 0)
    assert (s.i0, s.i1, s.j0, s.j1) == (0, 6, 0, 4)
    assert s.interface_sides() == []


def test_decompose_2x2_overlap2():
    g = build_grid(8, 8, (0.0, 1.0, 0.0, 1.0))
    subs = decompose(g, 2, 2, 2)
    for s in subs:
        assert (s.nx, s.ny) == (5, 5)
    # horizontally adjacent pair shares exactly 2 columns
    a, b = subs[0], subs[1]
    shared = _cells(a) & _cells(b)
    assert {c[0] for c in shared} == {3, 4}
    assert len(shared) == 10


@pytest.mark.parametrize("nx,ny,px,py,n_o", [(12, 6, 3, 2, 0), (12, 6, 3, 2, 2), (20, 20, 4, 1, 4), (10, 10, 2, 5, 2)])
def test_decompose_partition_property(nx, ny, px, py, n_o):
    g = build_grid(nx, ny, (0.0, 1.0, 0.0, 2.0))
    subs = decompose(g, px, py, n_o)
    union = set()
    for s in subs:
        union |= _cells(s)
    assert union == {(i, j) for i in range(nx) for j in range(ny)}
    # neighbor symmetry
    for s in subs:
        for side in SIDES:
            n = s.neighbors[side]
            if n is not None:
                back = {"left": "right", "right": "left", "bottom": "top", "top": "bottom"}[side]
                assert subs[n].neighbors[back] == s.id


@pytest.mark.parametrize(
    "args",
    [
        (10, 10, 3, 2, 0),   # indivisible
        (10, 10, 2, 2, 3),   # odd overlap
        (10, 10, 2, 2, -2),  # negative overlap
        (8, 8, 4, 1, 4),     # overlap wider than nominal width
        (8, 8, 0, 2, 0),     # zero counts
    ],
)
def test_decompose_invalid(args):
    nx, ny, px, py, n_o = args
    g = build_grid(nx, ny, (0.0, 1.0, 0.0, 1.0))
    with pytest.raises(ConfigurationError):
        decompose(g, px, py, n_o)


def _oracle_donor_pairs(subs, grid):
    """Brute-force centroid matching: for each ghost cell centroid of each
    interface side, find the neighbor physical cell with the same centroid."""
    pairs = set()
    xc = grid.x_lo + (np.arange(-1, grid.nx + 1) + 0.5) * grid.dx
    yc = grid.y_lo + (np.arange(-1, grid.ny + 1) + 0.5) * grid.dy
    for s in subs:
        for side in SIDES:
            nid = s.neighbors[side]
            if nid is None:
                continue
            nbr = subs[nid]
            if side in ("left", "right"):
                gi = s.i0 - 1 if side == "left" else s.i1 + 1
                ghost = [(gi, j) for j in range(s.j0, s.j1 + 1)]
            else:
                gj = s.j0 - 1 if side == "bottom" else s.j1 + 1
                ghost = [(i, gj) for i in range(s.i0, s.i1 + 1)]
            for gi, gj in ghost:
                gx, gy = xc[gi + 1], yc[gj + 1]
                hit = None
                for i in range(nbr.i0, nbr.i1 + 1):
                    for j in range(nbr.j0, nbr.j1 + 1):
                        if abs(xc[i + 1] - gx) < 1e-12 and abs(yc[j + 1] - gy) < 1e-12:
                            hit = (i, j)
                assert hit is not None, f"no donor for ghost {(gi, gj)} of sub {s.id}"
                pairs.add((s.id, side, gi, gj, nid, *hit))
    return pairs


@pytest.mark.parametrize("nx,ny,px,py,n_o", [(8, 8, 2, 1, 0), (8, 8, 2, 1, 2), (8, 8, 2, 2, 2), (12, 12, 3, 2, 4)])
def test_donor_maps_match_centroid_oracle(nx, ny, px, py, n_o):
    g = build_grid(nx, ny, (-1.0, 1.0, 0.0, 3.0))
    subs = decompose(g, px, py, n_o)
    maps = build_donor_maps(subs)
    got = set()
    for m in maps:
        sub, nbr = subs[m.receiver], subs[m.donor]
        for k, (gi, gj) in enumerate(m.ghost_cells_ij):
            assert m.ghost_flat[k] == sub.frame_id(gi, gj)
            # decode donor frame id back to global coordinates
            fi, fj = divmod(int(m.donor_flat[k]), nbr.ny + 2)
            di, dj = fi - 1 + nbr.i0, fj - 1 + nbr.j0
            assert nbr.i0 <= di <= nbr.i1 and nbr.j0 <= dj <= nbr.j1
            got.add((m.receiver, m.side, int(gi), int(gj), m.donor, di, dj))
    assert got == _oracle_donor_pairs(subs, g)
    # injectivity: each (donor, side) map hits distinct donor cells
    for m in maps:
        assert len(np.unique(m.donor_flat)) == len(m.donor_flat)


def test_donor_maps_no_overlap_first_interior_column():
    g = build_grid(8, 8, (0.0, 1.0, 0.0, 1.0))
    subs = decompose(g, 2, 1, 0)
    maps = build_donor_maps(subs)
    right = next(m for m in maps if m.receiver == 0 and m.side == "right")
    nbr = subs[1]
    for k in range(len(right.donor_flat)):
        fi = int(right.donor_flat[k]) // (nbr.ny + 2)
        assert fi == 1  # first interior column of the neighbor


def test_donor_maps_single_subdomain_empty():
    g = build_grid(6, 6, (0.0, 1.0, 0.0, 1.0))
    subs = decompose(g, 1, 1, 0)
    assert build_donor_maps(subs) == []


@pytest.mark.parametrize("n_o", [0, 2])
def test_scatter_gather_roundtrip(n_o):
    rng = np.random.default_rng(7)
    g = build_grid(12, 8, (0.0, 1.0, 0.0, 1.0), n_vars=3)
    subs = decompose(g, 2, 2, n_o)
    u = rng.standard_normal(g.n_dof)
    parts = [scatter_field(u, s) for s in subs]
    assert np.array_equal(gather_fields(subs, parts), u)


def test_gather_ownership_lower_id_wins():
    g = build_grid(8, 4, (0.0, 1.0, 0.0, 1.0))
    subs = decompose(g, 2, 1, 2)
    parts = [np.full(s.n_dof, float(s.id)) for s in subs]
    out = gather_fields(subs, parts).reshape(8, 4)
    # shared columns 3,4 belong to subdomain 0
    assert np.all(out[:5] == 0.0)
    assert np.all(out[5:] == 1.0)
