"""Offline reduced-order pipeline.

Snapshot collection and splitting, POD trial bases, QDEIM index selection,
and sample-mesh construction with interface seeding.  All state columns use
the cell-major DOF layout of :mod:`schwarzrom.mesh` (cell id times n_vars,
variable fastest).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr

from .exceptions import ConfigurationError, IngestionError
from .mesh import SIDE_AXIS, Subdomain


@dataclass
class SnapshotMatrix:
    """Column store of state snapshots plus per-column metadata."""

    data: np.ndarray          # (n_dof, n_cols)
    nx: int
    ny: int
    n_vars: int
    params: np.ndarray        # (n_cols,) parameter value per column
    times: np.ndarray         # (n_cols,) time stamp per column
    run_ids: tuple            # (n_cols,) originating run per column
    dt: float

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=float)
        self.params = np.asarray(self.params, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        self.run_ids = tuple(self.run_ids)
        if self.data.ndim != 2:
            raise IngestionError("snapshot data must be a 2-D matrix")
        if self.data.shape[0] != self.nx * self.ny * self.n_vars:
            raise IngestionError(
                f"snapshot rows {self.data.shape[0]} do not match layout "
                f"{self.nx}x{self.ny}x{self.n_vars}")
        n = self.data.shape[1]
        if not (len(self.params) == len(self.times) == len(self.run_ids) == n):
            raise IngestionError("snapshot metadata length does not match "
                                 "column count")

    @property
    def n_dof(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]


def snapshots_from_run(states, times, param, dt, run_id="run0", *,
                       nx=None, ny=None, n_vars=None) -> SnapshotMatrix:
    """Pack a trajectory (sequence of (nx, ny, n_vars) arrays) into a matrix."""
    states = list(states)
    if not states:
        raise IngestionError(f"run '{run_id}' produced no snapshots")
    first = np.asarray(states[0])
    if first.ndim != 3:
        raise IngestionError(f"run '{run_id}' states must be (nx, ny, n_vars)")
    nx = first.shape[0] if nx is None else nx
    ny = first.shape[1] if ny is None else ny
    n_vars = first.shape[2] if n_vars is None else n_vars
    cols = []
    for s in states:
        s = np.asarray(s)
        if s.shape != (nx, ny, n_vars):
            raise IngestionError(
                f"run '{run_id}' snapshot shape {s.shape} does not match "
                f"({nx}, {ny}, {n_vars})")
        cols.append(s.reshape(-1))
    data = np.stack(cols, axis=1)
    n = data.shape[1]
    return SnapshotMatrix(data, nx, ny, n_vars,
                          np.full(n, float(param)), np.asarray(times, float),
                          (run_id,) * n, float(dt))


def assemble_snapshots(runs, subdomains=None):
    """Concatenate run matrices; optionally split rows per subdomain.

    Columns are ordered by (run, time).  With ``subdomains`` given, returns a
    list of per-subdomain matrices; each receives the rows of its own cells,
    overlap copies included.
    """
    runs = list(runs)
    if not runs:
        raise IngestionError("no snapshot runs to assemble")
    ref = runs[0]
    for r in runs:
        if (r.nx, r.ny, r.n_vars) != (ref.nx, ref.ny, ref.n_vars):
            raise IngestionError(
                f"run '{r.run_ids[0] if r.run_ids else '?'}' layout "
                f"{(r.nx, r.ny, r.n_vars)} does not match "
                f"{(ref.nx, ref.ny, ref.n_vars)}")
    data = np.concatenate([r.data for r in runs], axis=1)
    params = np.concatenate([r.params for r in runs])
    times = np.concatenate([r.times for r in runs])
    run_ids = tuple(rid for r in runs for rid in r.run_ids)
    whole = SnapshotMatrix(data, ref.nx, ref.ny, ref.n_vars, params, times,
                           run_ids, ref.dt)
    if subdomains is None:
        return whole
    out = []
    for sub in subdomains:
        rows = sub.row_map()
        out.append(SnapshotMatrix(whole.data[rows], sub.nx, sub.ny,
                                  sub.n_vars, params, times, run_ids, ref.dt))
    return out


@dataclass
class TrialBasis:
    """Orthonormal trial basis with centering vector and retained spectrum."""

    phi: np.ndarray              # (n_dof, M)
    center: np.ndarray           # (n_dof,)
    singular_values: np.ndarray  # (M,)
    nx: int
    ny: int
    n_vars: int

    def __post_init__(self):
        self.phi = np.ascontiguousarray(self.phi, dtype=float)
        self.center = np.asarray(self.center, dtype=float)
        self.singular_values = np.asarray(self.singular_values, dtype=float)
        n, m = self.phi.shape
        if n != self.nx * self.ny * self.n_vars:
            raise ConfigurationError(
                f"basis rows {n} do not match layout "
                f"{self.nx}x{self.ny}x{self.n_vars}")
        if self.center.shape != (n,):
            raise ConfigurationError("centering vector length mismatch")
        if self.singular_values.shape != (m,):
            raise ConfigurationError("singular value count must equal mode count")
        gram_err = np.abs(self.phi.T @ self.phi - np.eye(m)).max()
        if gram_err > 1e-12:
            raise ConfigurationError(
                f"basis columns are not orthonormal (deviation {gram_err:.2e})")
        if np.any(np.diff(self.singular_values) > 0) or \
                np.any(self.singular_values < 0):
            raise ConfigurationError("singular values must be non-negative "
                                     "and non-increasing")

    @property
    def n_modes(self) -> int:
        return self.phi.shape[1]

    @property
    def n_dof(self) -> int:
        return self.phi.shape[0]


def compute_pod(snapshots: SnapshotMatrix, n_modes: int,
                center: bool = True) -> TrialBasis:
    """Leading left singular vectors of the (optionally centered) snapshots.

    The centering vector is the snapshot column mean; ``center=False`` forces
    it to zero for controlled experiments.
    """
    limit = min(snapshots.n_dof, snapshots.n_cols)
    if not 1 <= n_modes <= limit:
        raise ConfigurationError(
            f"mode count {n_modes} outside valid range [1, {limit}]")
    xbar = snapshots.data.mean(axis=1) if center \
        else np.zeros(snapshots.n_dof)
    u, s, _ = np.linalg.svd(snapshots.data - xbar[:, None],
                            full_matrices=False)
    return TrialBasis(u[:, :n_modes], xbar, s[:n_modes],
                      snapshots.nx, snapshots.ny, snapshots.n_vars)


def projection_error(basis: TrialBasis, snapshots: SnapshotMatrix):
    """Relative space-time projection error of the snapshots onto the basis.

    Returns ``(per_variable, aggregate)`` where each entry is the ratio of
    summed squared error norms to summed squared snapshot norms (no square
    root is taken).
    """
    if snapshots.n_dof != basis.n_dof or snapshots.n_vars != basis.n_vars:
        raise ConfigurationError("basis and snapshots have different layouts")
    d = snapshots.data - basis.center[:, None]
    err = d - basis.phi @ (basis.phi.T @ d)
    nv = basis.n_vars
    per_var = np.empty(nv)
    for v in range(nv):
        num = np.sum(err[v::nv] ** 2)
        den = np.sum(snapshots.data[v::nv] ** 2)
        per_var[v] = num / den if den > 0.0 else (0.0 if num == 0.0 else np.inf)
    den = np.sum(snapshots.data ** 2)
    total = np.sum(err ** 2) / den if den > 0.0 else 0.0
    return per_var, total


def qdeim_indices(basis) -> np.ndarray:
    """DOF indices from column-pivoted QR of the basis transpose.

    Returns the first M pivot rows of the basis, in pivot order.
    """
    phi = basis.phi if isinstance(basis, TrialBasis) else np.asarray(basis)
    m = phi.shape[1]
    _, _, piv = qr(phi.T, pivoting=True, mode="economic")
    return piv[:m].astype(np.int64)


@dataclass
class SampleMesh:
    """Sampled cells plus the bookkeeping needed to evaluate their residuals."""

    cells: np.ndarray             # sorted sampled cell ids (S)
    closure: np.ndarray           # in-domain face neighbors of S not in S
    interface_seeds: np.ndarray   # subset of S seeded on Schwarz interfaces
    qdeim_cells: np.ndarray       # subset of S seeded from QDEIM indices
    ghost_cells: np.ndarray       # frame ids of interface ghosts read by S
    n_b: int

    @property
    def n_s(self) -> int:
        return self.cells.size


# local (di, dj) face-neighbor offsets, matching the residual stencil
_FACE_OFFSETS = ((-1, 0), (1, 0), (0, -1), (0, 1))


def interface_seed_cells(sub: Subdomain, n_b: int) -> np.ndarray:
    """Cells at positions 0, n_b, 2*n_b, ... along each Schwarz interface."""
    if n_b < 1:
        raise ConfigurationError(f"interface sampling interval {n_b} must be "
                                 "at least 1")
    seeds = []
    for side in sub.interface_sides():
        axis = SIDE_AXIS[side]
        edge_len = sub.ny if axis == 0 else sub.nx
        pos = np.arange(0, edge_len, n_b)
        if axis == 0:
            i = 0 if side == "left" else sub.nx - 1
            seeds.append(i * sub.ny + pos)
        else:
            j = 0 if side == "bottom" else sub.ny - 1
            seeds.append(pos * sub.ny + j)
    if not seeds:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(seeds)).astype(np.int64)


def _closure_and_ghosts(sub: Subdomain, cells: np.ndarray):
    ci, cj = cells // sub.ny, cells % sub.ny
    nyf = sub.ny + 2
    interior, ghosts = [], []
    side_of = {(-1, 0): "left", (1, 0): "right", (0, -1): "bottom",
               (0, 1): "top"}
    for di, dj in _FACE_OFFSETS:
        pi, pj = ci + di, cj + dj
        inside = (pi >= 0) & (pi < sub.nx) & (pj >= 0) & (pj < sub.ny)
        interior.append(pi[inside] * sub.ny + pj[inside])
        if sub.neighbors[side_of[(di, dj)]] is not None:
            out = ~inside
            ghosts.append((pi[out] + 1) * nyf + (pj[out] + 1))
    closure = np.setdiff1d(np.unique(np.concatenate(interior)), cells)
    ghost = (np.unique(np.concatenate(ghosts)).astype(np.int64)
             if ghosts else np.empty(0, dtype=np.int64))
    return closure.astype(np.int64), ghost


def build_sample_mesh(sub: Subdomain, n_s_target: int, n_b: int, rng_seed, *,
                      qdeim_cells=None, seed_interfaces=True) -> SampleMesh:
    """Assemble the sampled cell set for one subdomain.

    Seeds (interface cells every ``n_b`` positions, plus any QDEIM cells)
    count toward ``n_s_target``; the remainder is a uniform random draw
    without replacement.  The random fill is a permutation prefix, so a
    larger target with the same seed yields a superset.
    """
    if n_s_target < 1:
        raise ConfigurationError(f"sample target {n_s_target} must be positive")
    if n_s_target > sub.n_cells:
        raise ConfigurationError(
            f"sample target {n_s_target} exceeds the {sub.n_cells} cells of "
            f"subdomain {sub.id}")
    iface = (interface_seed_cells(sub, n_b) if seed_interfaces
             else np.empty(0, dtype=np.int64))
    if qdeim_cells is None:
        qdeim_cells = np.empty(0, dtype=np.int64)
    else:
        qdeim_cells = np.unique(np.asarray(qdeim_cells, dtype=np.int64))
        if qdeim_cells.size and (qdeim_cells[0] < 0
                                 or qdeim_cells[-1] >= sub.n_cells):
            raise ConfigurationError("QDEIM seed cells outside the subdomain")
    seeds = np.union1d(iface, qdeim_cells)
    if seeds.size > n_s_target:
        raise ConfigurationError(
            f"{seeds.size} seed cells exceed the sample target {n_s_target} "
            f"on subdomain {sub.id}")
    pool = np.setdiff1d(np.arange(sub.n_cells, dtype=np.int64), seeds)
    rng = np.random.default_rng(rng_seed)
    fill = rng.permutation(pool)[:n_s_target - seeds.size]
    cells = np.union1d(seeds, fill)
    closure, ghost = _closure_and_ghosts(sub, cells)
    return SampleMesh(cells, closure, iface, qdeim_cells, ghost, n_b)


def qdeim_seed_cells(basis: TrialBasis, n_seed_modes: int) -> np.ndarray:
    """Cells containing the QDEIM-selected DOFs of the leading modes."""
    if n_seed_modes < 1 or n_seed_modes > basis.n_modes:
        raise ConfigurationError(
            f"QDEIM seed mode count {n_seed_modes} outside [1, {basis.n_modes}]")
    trimmed = TrialBasis(basis.phi[:, :n_seed_modes], basis.center,
                         basis.singular_values[:n_seed_modes],
                         basis.nx, basis.ny, basis.n_vars)
    dofs = qdeim_indices(trimmed)
    return np.unique(dofs // basis.n_vars)
