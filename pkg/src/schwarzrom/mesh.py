"""Cartesian cell-centered grids, overlapping box decomposition, and ghost donor maps.

Cells are indexed (i, j) with i along x and j along y. Local/global flat cell ids
are C-ordered over (i, j); DOF ids are C-ordered over (cell, variable). Every
subdomain carries a one-cell ghost frame on all four sides; frame index
(fi, fj) = (i - i0 + 1, j - j0 + 1) for a global cell (i, j).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, InternalError

SIDES = ("left", "right", "bottom", "top")
# (axis, outward direction) per side; axis 0 is x, axis 1 is y.
SIDE_AXIS = {"left": 0, "right": 0, "bottom": 1, "top": 1}
OPPOSITE = {"left": "right", "right": "left", "bottom": "top", "top": "bottom"}


@dataclass(frozen=True)
class CartesianGrid:
    """Uniform cell-centered grid on [x_lo, x_hi] x [y_lo, y_hi]."""

    nx: int
    ny: int
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    n_vars: int = 1

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_hi - self.y_lo) / self.ny

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_dof(self) -> int:
        return self.n_cells * self.n_vars

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def x_centers(self) -> np.ndarray:
        return self.x_lo + (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return self.y_lo + (np.arange(self.ny) + 0.5) * self.dy

    def centroids(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (X, Y) arrays of shape (nx, ny) with cell centroids."""
        return np.meshgrid(self.x_centers(), self.y_centers(), indexing="ij")


def build_grid(nx: int, ny: int, bounds, n_vars: int = 1) -> CartesianGrid:
    """Validate and build a grid; bounds = (x_lo, x_hi, y_lo, y_hi)."""
    x_lo, x_hi, y_lo, y_hi = (float(b) for b in bounds)
    if nx < 1 or ny < 1:
        raise ConfigurationError(f"cell counts must be positive, got nx={nx}, ny={ny}")
    if not (x_hi > x_lo and y_hi > y_lo):
        raise ConfigurationError(f"degenerate domain bounds {bounds}")
    if n_vars < 1:
        raise ConfigurationError(f"n_vars must be positive, got {n_vars}")
    return CartesianGrid(int(nx), int(ny), x_lo, x_hi, y_lo, y_hi, int(n_vars))


@dataclass(eq=False)
class Subdomain:
    """Axis-aligned box of cells [i0, i1] x [j0, j1]; immutable after construction."""

    id: int
    grid: CartesianGrid
    i0: int
    i1: int
    j0: int
    j1: int
    n_overlap: int = 0
    neighbors: dict = field(default_factory=lambda: {s: None for s in SIDES})

    @property
    def nx(self) -> int:
        return self.i1 - self.i0 + 1

    @property
    def ny(self) -> int:
        return self.j1 - self.j0 + 1

    @property
    def n_vars(self) -> int:
        return self.grid.n_vars

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_dof(self) -> int:
        return self.n_cells * self.grid.n_vars

    @property
    def dx(self) -> float:
        return self.grid.dx

    @property
    def dy(self) -> float:
        return self.grid.dy

    @property
    def frame_shape(self) -> tuple[int, int, int]:
        """Shape of the ghosted state array."""
        return (self.nx + 2, self.ny + 2, self.grid.n_vars)

    def x_centers(self) -> np.ndarray:
        return self.grid.x_lo + (np.arange(self.i0, self.i1 + 1) + 0.5) * self.grid.dx

    def y_centers(self) -> np.ndarray:
        return self.grid.y_lo + (np.arange(self.j0, self.j1 + 1) + 0.5) * self.grid.dy

    def centroids(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x_centers(), self.y_centers(), indexing="ij")

    def interface_sides(self) -> list[str]:
        return [s for s in SIDES if self.neighbors[s] is not None]

    def cell_id(self, i: int, j: int) -> int:
        """Local flat cell id of global cell (i, j)."""
        if not (self.i0 <= i <= self.i1 and self.j0 <= j <= self.j1):
            raise InternalError(f"global cell ({i}, {j}) outside subdomain {self.id}")
        return (i - self.i0) * self.ny + (j - self.j0)

    def frame_id(self, i: int, j: int) -> int:
        """Flat id into the ghosted frame of global cell (i, j); ghosts allowed."""
        fi, fj = i - self.i0 + 1, j - self.j0 + 1
        if not (0 <= fi < self.nx + 2 and 0 <= fj < self.ny + 2):
            raise InternalError(f"global cell ({i}, {j}) outside frame of subdomain {self.id}")
        return fi * (self.ny + 2) + fj

    def row_map(self) -> np.ndarray:
        """Global DOF index per local physical DOF, in local C order (cached)."""
        cached = getattr(self, "_row_map", None)
        if cached is None:
            gi = np.arange(self.i0, self.i1 + 1)
            gj = np.arange(self.j0, self.j1 + 1)
            gcell = gi[:, None] * self.grid.ny + gj[None, :]
            nv = self.grid.n_vars
            cached = (gcell.reshape(-1, 1) * nv + np.arange(nv)).reshape(-1)
            self._row_map = cached
        return cached


def decompose(grid: CartesianGrid, px: int, py: int, n_overlap: int = 0) -> list[Subdomain]:
    """Split the grid into px*py boxes; each interior split is widened by n_overlap/2
    cells on both sides so neighbors share n_overlap columns/rows in total."""
    if px < 1 or py < 1:
        raise ConfigurationError(f"subdomain counts must be positive, got {px}x{py}")
    if grid.nx % px or grid.ny % py:
        raise ConfigurationError(
            f"grid {grid.nx}x{grid.ny} not divisible into {px}x{py} equal parts"
        )
    if n_overlap < 0 or n_overlap % 2:
        raise ConfigurationError(f"overlap must be an even non-negative count, got {n_overlap}")
    half = n_overlap // 2
    wx, wy = grid.nx // px, grid.ny // py
    if half >= wx and px > 1 or half >= wy and py > 1:
        raise ConfigurationError(
            f"overlap {n_overlap} too wide for {wx}x{wy} nominal subdomains"
        )

    subs = []
    for sy in range(py):
        for sx in range(px):
            i0 = sx * wx - (half if sx > 0 else 0)
            i1 = (sx + 1) * wx - 1 + (half if sx < px - 1 else 0)
            j0 = sy * wy - (half if sy > 0 else 0)
            j1 = (sy + 1) * wy - 1 + (half if sy < py - 1 else 0)
            sid = sy * px + sx
            nbrs = {
                "left": sid - 1 if sx > 0 else None,
                "right": sid + 1 if sx < px - 1 else None,
                "bottom": sid - px if sy > 0 else None,
                "top": sid + px if sy < py - 1 else None,
            }
            subs.append(Subdomain(sid, grid, i0, i1, j0, j1, n_overlap, nbrs))
    return subs


@dataclass(frozen=True)
class DonorMap:
    """Ghost-to-donor index pairs for one (receiver, side) Schwarz interface.

    ghost_flat indexes the receiver's ghost frame; donor_flat indexes the donor's
    ghost frame but always points at donor physical cells. Entry k pairs cells at
    the identical global (i, j).
    """

    receiver: int
    side: str
    donor: int
    ghost_flat: np.ndarray
    donor_flat: np.ndarray
    ghost_cells_ij: np.ndarray  # (n, 2) global (i, j) per entry, for diagnostics


def _ghost_line(sub: Subdomain, side: str) -> np.ndarray:
    """Global (i, j) coordinates of the ghost cells along one side (no corners)."""
    if side == "left":
        i = np.full(sub.ny, sub.i0 - 1)
        j = np.arange(sub.j0, sub.j1 + 1)
    elif side == "right":
        i = np.full(sub.ny, sub.i1 + 1)
        j = np.arange(sub.j0, sub.j1 + 1)
    elif side == "bottom":
        i = np.arange(sub.i0, sub.i1 + 1)
        j = np.full(sub.nx, sub.j0 - 1)
    elif side == "top":
        i = np.arange(sub.i0, sub.i1 + 1)
        j = np.full(sub.nx, sub.j1 + 1)
    else:
        raise InternalError(f"unknown side {side!r}")
    return np.stack([i, j], axis=1)


def build_donor_maps(subs: list[Subdomain]) -> list[DonorMap]:
    """Donor maps for every Schwarz interface; corners are never exchanged."""
    by_id = {s.id: s for s in subs}
    maps = []
    for sub in subs:
        for side in SIDES:
            nbr_id = sub.neighbors[side]
            if nbr_id is None:
                continue
            nbr = by_id[nbr_id]
            ij = _ghost_line(sub, side)
            ghost_flat = np.empty(len(ij), dtype=np.int64)
            donor_flat = np.empty(len(ij), dtype=np.int64)
            for k, (gi, gj) in enumerate(ij):
                if not (nbr.i0 <= gi <= nbr.i1 and nbr.j0 <= gj <= nbr.j1):
                    raise InternalError(
                        f"ghost cell ({gi}, {gj}) of subdomain {sub.id} has no physical "
                        f"donor in neighbor {nbr.id}"
                    )
                ghost_flat[k] = sub.frame_id(gi, gj)
                donor_flat[k] = nbr.frame_id(gi, gj)
            maps.append(DonorMap(sub.id, side, nbr.id, ghost_flat, donor_flat, ij))
    return maps


def scatter_field(global_vec: np.ndarray, sub: Subdomain) -> np.ndarray:
    """Restrict a global DOF vector to one subdomain's physical DOFs (local order)."""
    if global_vec.shape[-1] != sub.grid.n_dof:
        raise ConfigurationError(
            f"global vector length {global_vec.shape[-1]} != grid DOF count {sub.grid.n_dof}"
        )
    return np.ascontiguousarray(global_vec[..., sub.row_map()])

def gather_fields(subs: list[Subdomain], locals_: list[np.ndarray]) -> np.ndarray:
    """Assemble subdomain DOF vectors into a global one.

    Overlapped cells are owned by the lower-indexed subdomain (it is written last).
    """
    if len(subs) != len(locals_):
        raise ConfigurationError("one local vector required per subdomain")
    grid = subs[0].grid
    out = np.full(grid.n_dof, np.nan)
    order = np.argsort([-s.id for s in subs], kind="stable")
    for k in order:
        sub, vec = subs[k], np.asarray(locals_[k]).reshape(-1)
        if vec.size != sub.n_dof:
            raise ConfigurationError(
                f"subdomain {sub.id} vector has {vec.size} DOFs, expected {sub.n_dof}"
            )
        out[sub.row_map()] = vec
    if np.isnan(out).any():
        raise InternalError("gathered field has uncovered cells")
    return out
