"""Cell-centered finite-volume residuals and Jacobians on ghosted subdomain frames.

The working array ("frame") has shape (nx+2, ny+2, n_vars): one ghost layer on
every side. Physical-boundary ghosts are re-derived from the interior on every
residual evaluation; Schwarz interface ghosts are left untouched so they stay
frozen at the transmitted values during a solve. Corners are never read.

Sign convention: du/dt + spatial_residual(u) = 0, so
    spatial_residual = (sum of outward face fluxes * face length) / cell area - source
and the implicit-Euler time residual is (u - u_prev)/dt + spatial_residual(u).

Jacobians are assembled by colored forward differences: cells are 5-colored with
color (i + 2j) mod 5, which separates same-color cells by Manhattan distance >= 3
so the 5-point stencil attribution is unique; each probe perturbs one variable on
all cells of one color (5 * n_vars residual evaluations per Jacobian). Ghost-cell
dependence on the boundary cell itself is picked up automatically because ghosts
are re-derived inside the residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from .exceptions import ConfigurationError, InternalError
from .mesh import SIDES, Subdomain
from .physics import INTERFACE, FluxModel, ParamSet, ghost_state

N_COLORS = 5
FD_STEP = float(np.sqrt(np.finfo(float).eps))
_OFFSETS = ((0, 0), (-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass
class StateField:
    """Ghosted state array for one subdomain with its time stamp."""

    sub: Subdomain
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.values.shape != self.sub.frame_shape:
            raise InternalError(
                f"frame shape {self.values.shape} != expected {self.sub.frame_shape}"
            )

    @classmethod
    def from_physical(cls, sub: Subdomain, phys: np.ndarray, t: float = 0.0) -> "StateField":
        values = np.zeros(sub.frame_shape)
        values[1:-1, 1:-1] = np.asarray(phys).reshape(sub.nx, sub.ny, sub.n_vars)
        return cls(sub, values, t)

    def physical(self) -> np.ndarray:
        """View of the physical block, shape (nx, ny, n_vars)."""
        return self.values[1:-1, 1:-1]

    def flat(self) -> np.ndarray:
        """Copy of the physical DOFs as a flat vector."""
        return self.physical().reshape(-1).copy()

    def copy(self) -> "StateField":
        return StateField(self.sub, self.values.copy(), self.t)


@dataclass
class ResidualContext:
    """Everything a residual evaluation needs for one subdomain and time step."""

    sub: Subdomain
    model: FluxModel
    bcs: dict
    params: ParamSet
    dt: float
    prev: np.ndarray = None  # (nx, ny, n_vars) state at t_n

    _caches: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        missing = [s for s in SIDES if s not in self.bcs]
        if missing:
            raise ConfigurationError(f"boundary tags missing for sides {missing}")
        for side in self.sub.interface_sides():
            if self.bcs[side] != INTERFACE:
                raise ConfigurationError(
                    f"side {side!r} of subdomain {self.sub.id} has a neighbor but "
                    f"tag {self.bcs[side]!r}"
                )
        if self.dt <= 0.0:
            raise ConfigurationError(f"time step must be positive, got {self.dt}")
        if self.prev is None:
            self.prev = np.zeros((self.sub.nx, self.sub.ny, self.sub.n_vars))


def default_context(sub, model, params, dt, prev=None) -> ResidualContext:
    """Context with the model's physical BCs on exterior sides and interface
    tags wherever the subdomain has a neighbor."""
    bcs = model.default_bcs()
    for side in sub.interface_sides():
        bcs[side] = INTERFACE
    return ResidualContext(sub, model, bcs, params, dt, prev)


def fill_boundary_ghosts(ctx: ResidualContext, frame: np.ndarray) -> None:
    """Refresh ghosts on physical-boundary sides only (interface ghosts frozen)."""
    nx, ny = ctx.sub.nx, ctx.sub.ny
    for side, tag in ctx.bcs.items():
        if tag == INTERFACE:
            continue
        if side == "left":
            frame[0, 1:ny + 1] = ghost_state(tag, frame[1, 1:ny + 1], 0, ctx.model)
        elif side == "right":
            frame[nx + 1, 1:ny + 1] = ghost_state(tag, frame[nx, 1:ny + 1], 0, ctx.model)
        elif side == "bottom":
            frame[1:nx + 1, 0] = ghost_state(tag, frame[1:nx + 1, 1], 1, ctx.model)
        elif side == "top":
            frame[1:nx + 1, ny + 1] = ghost_state(tag, frame[1:nx + 1, ny], 1, ctx.model)


def _face_flux(ctx, UL, UR, axis):
    F = ctx.model.roe_flux(UL, UR, axis)
    if ctx.model.has_diffusion and ctx.params.diffusion != 0.0:
        spacing = ctx.sub.dx if axis == 0 else ctx.sub.dy
        F = F + ctx.model.diffusive_flux(UL, UR, spacing, ctx.params)
    return F


def spatial_residual(ctx: ResidualContext, frame: np.ndarray) -> np.ndarray:
    """Flux divergence minus source on the physical block, shape (nx, ny, n_vars)."""
    sub = ctx.sub
    ctx.model.check_state(frame[1:-1, 1:-1])
    fill_boundary_ghosts(ctx, frame)
    Fx = _face_flux(ctx, frame[:-1, 1:-1], frame[1:, 1:-1], 0)
    Fy = _face_flux(ctx, frame[1:-1, :-1], frame[1:-1, 1:], 1)
    res = (Fx[1:] - Fx[:-1]) / sub.dx + (Fy[:, 1:] - Fy[:, :-1]) / sub.dy
    res -= ctx.model.source(frame[1:-1, 1:-1], ctx.params)
    return res


def time_residual(ctx: ResidualContext, frame: np.ndarray) -> np.ndarray:
    """Implicit-Euler residual over physical DOFs, flat vector of length n_dof."""
    res = (frame[1:-1, 1:-1] - ctx.prev) / ctx.dt + spatial_residual(ctx, frame)
    return res.reshape(-1)


# ---------------------------------------------------------------------------
# colored finite-difference Jacobians
# ---------------------------------------------------------------------------

def _cell_colors(sub: Subdomain) -> np.ndarray:
    i, j = np.meshgrid(np.arange(sub.nx), np.arange(sub.ny), indexing="ij")
    return ((i + 2 * j) % N_COLORS).reshape(-1)


def _color_cache(ctx: ResidualContext):
    """Per-color physical cell ids and their frame coordinates (cached)."""
    cache = ctx._caches.get("colors")
    if cache is None:
        sub = ctx.sub
        colors = _cell_colors(sub)
        per_color = []
        for c in range(N_COLORS):
            cells = np.flatnonzero(colors == c)
            fi = cells // sub.ny + 1
            fj = cells % sub.ny + 1
            per_color.append((cells, fi, fj))
        cache = (colors, per_color)
        ctx._caches["colors"] = cache
    return cache


class _StencilStructure:
    """Sparse structure and fill indices for a set of residual rows.

    Rows are the DOFs of `row_cells` (in that order); columns are all physical
    DOFs of the subdomain. Entry blocks exist for every (row cell, stencil
    neighbor) pair whose neighbor is physical.
    """

    def __init__(self, ctx: ResidualContext, row_cells: np.ndarray):
        sub, nv = ctx.sub, ctx.sub.n_vars
        nx, ny = sub.nx, sub.ny
        colors, _ = _color_cache(ctx)

        ri = row_cells // ny
        rj = row_cells % ny
        pair_r_pos, pair_p = [], []
        for di, dj in _OFFSETS:
            pi, pj = ri + di, rj + dj
            ok = (pi >= 0) & (pi < nx) & (pj >= 0) & (pj < ny)
            pair_r_pos.append(np.flatnonzero(ok))
            pair_p.append(pi[ok] * ny + pj[ok])
        self.pair_r_pos = np.concatenate(pair_r_pos)      # index into row_cells
        self.pair_p = np.concatenate(pair_p)              # physical cell id
        n_pairs = len(self.pair_p)

        self.by_color = [np.flatnonzero(colors[self.pair_p] == c) for c in range(N_COLORS)]
        self.data = np.zeros((n_pairs, nv, nv))

        rows = (self.pair_r_pos[:, None, None] * nv + np.arange(nv)[None, :, None])
        cols = (self.pair_p[:, None, None] * nv + np.arange(nv)[None, None, :])
        rows = np.broadcast_to(rows, (n_pairs, nv, nv)).reshape(-1)
        cols = np.broadcast_to(cols, (n_pairs, nv, nv)).reshape(-1)
        shape = (len(row_cells) * nv, sub.n_dof)

        template = coo_matrix((np.arange(rows.size) + 1.0, (rows, cols)), shape=shape).tocsr()
        if template.nnz != rows.size:
            raise InternalError("duplicate entries in Jacobian structure")
        self._perm = template.data.astype(np.int64) - 1
        self._indices = template.indices
        self._indptr = template.indptr
        self._shape = shape

    def assemble(self) -> csr_matrix:
        return csr_matrix(
            (self.data.reshape(-1)[self._perm], self._indices, self._indptr),
            shape=self._shape,
        )


def _colored_fd(ctx, frame, structure, residual_fn, r0):
    """Fill structure.data with forward differences of residual_fn."""
    sub, nv = ctx.sub, ctx.sub.n_vars
    _, per_color = _color_cache(ctx)
    data = structure.data
    for c in range(N_COLORS):
        cells, fi, fj = per_color[c]
        pairs = structure.by_color[c]
        if len(cells) == 0 or len(pairs) == 0:
            continue
        # positions of each pair's column cell within this color's cell list
        pos = np.searchsorted(cells, structure.pair_p[pairs])
        rp = structure.pair_r_pos[pairs]
        for vc in range(nv):
            saved = frame[fi, fj, vc].copy()
            dh = FD_STEP * (1.0 + np.abs(saved))
            frame[fi, fj, vc] = saved + dh
            dh_actual = frame[fi, fj, vc] - saved
            r1 = residual_fn(frame)
            frame[fi, fj, vc] = saved
            data[pairs, :, vc] = (r1[rp] - r0[rp]) / dh_actual[pos][:, None]


def residual_jacobian(ctx: ResidualContext, frame: np.ndarray) -> csr_matrix:
    """Jacobian of the implicit-Euler time residual, CSR (n_dof x n_dof)."""
    structure = ctx._caches.get("full_structure")
    if structure is None:
        structure = _StencilStructure(ctx, np.arange(ctx.sub.n_cells))
        ctx._caches["full_structure"] = structure

    nv = ctx.sub.n_vars

    def rows_fn(fr):
        return time_residual(ctx, fr).reshape(-1, nv)

    r0 = rows_fn(frame)
    _colored_fd(ctx, frame, structure, rows_fn, r0)
    return structure.assemble()


# ---------------------------------------------------------------------------
# collocation (sampled) assembly
# ---------------------------------------------------------------------------

class CollocationPlan:
    """Residual rows and Jacobian rows restricted to a set of sampled cells.

    Evaluation touches only the sampled cells, their face neighbors, and the
    boundary ghost lines, so cost scales with the sample count.
    """

    def __init__(self, ctx: ResidualContext, sample_cells: np.ndarray):
        sub = ctx.sub
        cells = np.unique(np.asarray(sample_cells, dtype=np.int64))
        if cells.size == 0:
            raise ConfigurationError("empty sample set")
        if cells[0] < 0 or cells[-1] >= sub.n_cells:
            raise ConfigurationError("sample cell ids outside the subdomain")
        self.ctx = ctx
        self.cells = cells
        self.n_rows = cells.size * sub.n_vars

        ci = cells // sub.ny
        cj = cells % sub.ny
        nyf = sub.ny + 2
        # frame flat ids for center and the four face neighbors of each sampled cell
        self._gather = [((ci + 1 + di) * nyf + (cj + 1 + dj)) for di, dj in _OFFSETS]
        self._prev_rows = None
        self._prev_rows_src = None

        neighbors = []
        for di, dj in _OFFSETS[1:]:
            pi, pj = ci + di, cj + dj
            ok = (pi >= 0) & (pi < sub.nx) & (pj >= 0) & (pj < sub.ny)
            neighbors.append(pi[ok] * sub.ny + pj[ok])
        closure = np.setdiff1d(np.unique(np.concatenate(neighbors)), cells)
        self.closure = closure

        self.structure = _StencilStructure(ctx, cells)

    def needed_cells(self) -> np.ndarray:
        """Sampled cells plus stencil closure (all physical)."""
        return np.union1d(self.cells, self.closure)

    def interface_ghosts(self) -> np.ndarray:
        """Frame flat ids of interface ghost cells read by the sampled stencils."""
        sub = self.ctx.sub
        nyf = sub.ny + 2
        ci = self.cells // sub.ny
        cj = self.cells % sub.ny
        out = []
        for side, (di, dj) in zip(("left", "right", "bottom", "top"),
                                  _OFFSETS[1:]):
            if self.ctx.bcs[side] != INTERFACE:
                continue
            pi, pj = ci + di, cj + dj
            outside = (pi < 0) | (pi >= sub.nx) | (pj < 0) | (pj >= sub.ny)
            out.append((pi[outside] + 1) * nyf + (pj[outside] + 1))
        return np.unique(np.concatenate(out)) if out else np.empty(0, dtype=np.int64)

    def residual_rows(self, frame: np.ndarray) -> np.ndarray:
        """Sampled time-residual rows, shape (n_sample_cells, n_vars)."""
        ctx, sub = self.ctx, self.ctx.sub
        fill_boundary_ghosts(ctx, frame)
        flat = frame.reshape(-1, sub.n_vars)
        UC, UL, UR, UD, UU = (flat[g] for g in self._gather)
        ctx.model.check_state(UC)
        rows = (_face_flux(ctx, UC, UR, 0) - _face_flux(ctx, UL, UC, 0)) / sub.dx
        rows += (_face_flux(ctx, UC, UU, 1) - _face_flux(ctx, UD, UC, 1)) / sub.dy
        rows -= ctx.model.source(UC, ctx.params)
        if self._prev_rows is None or self._prev_rows_src is not ctx.prev:
            self._prev_rows = ctx.prev.reshape(-1, sub.n_vars)[self.cells]
            self._prev_rows_src = ctx.prev
        rows += (UC - self._prev_rows) / ctx.dt
        return rows

    def residual_and_jacobian(self, frame: np.ndarray):
        """(rows flat, sampled Jacobian CSR of shape (n_rows, n_dof))."""
        r0 = self.residual_rows(frame)
        _colored_fd(self.ctx, frame, self.structure, self.residual_rows, r0)
        return r0.reshape(-1), self.structure.assemble()


def sampled_residual_and_jacobian(ctx: ResidualContext, frame: np.ndarray,
                                  sample_cells: np.ndarray):
    """One-shot sampled rows + Jacobian (builds a plan; solvers should hold one)."""
    return CollocationPlan(ctx, sample_cells).residual_and_jacobian(frame)
