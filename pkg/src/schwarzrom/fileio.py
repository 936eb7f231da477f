"""Binary containers for snapshot and basis matrices, plus small text formats.

Snapshot container layout (little-endian):
  bytes 0-7    magic ``b"SNAPMAT\\x00"``
  5 x uint32   version, nx, ny, n_vars, n_cols
  payload      float64 matrix, column-major, (nx*ny*n_vars) x n_cols
A text sidecar ``<file>.meta`` carries parameter, dt, and time stamps.

Basis container layout:
  bytes 0-7    magic ``b"BASISMT\\x00"``
  5 x uint32   version, nx, ny, n_vars, n_modes
  payload      float64: center (n_dof), singular values (n_modes), then the
               basis matrix column-major.

Sample meshes are plain text: comment headers, then one sampled cell id per
line.
"""

import configparser
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError, IngestionError
from .rom import SampleMesh, SnapshotMatrix, TrialBasis, _closure_and_ghosts

SNAPSHOT_MAGIC = b"SNAPMAT\x00"
BASIS_MAGIC = b"BASISMT\x00"
FORMAT_VERSION = 1
_HEADER_DTYPE = np.dtype("<u4")


def _write_container(path, magic, dims, payloads):
    path = Path(path)
    header = np.asarray(dims, dtype=_HEADER_DTYPE)
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(header.tobytes())
        for block in payloads:
            fh.write(np.asarray(block, dtype="<f8").tobytes(order="F"))


def _read_container(path, magic, n_dims):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IngestionError(f"cannot read '{path}': {exc}") from exc
    if len(raw) < len(magic) + n_dims * 4:
        raise IngestionError(f"'{path}' is too short to be a valid container")
    if raw[:len(magic)] != magic:
        raise IngestionError(f"'{path}' has wrong magic bytes "
                             f"{raw[:len(magic)]!r}")
    dims = np.frombuffer(raw, dtype=_HEADER_DTYPE, count=n_dims,
                         offset=len(magic))
    version = int(dims[0])
    if version != FORMAT_VERSION:
        raise IngestionError(f"'{path}' has unsupported format version "
                             f"{version}")
    payload = raw[len(magic) + n_dims * 4:]
    return dims, payload


def _payload_floats(path, payload, count):
    if len(payload) != count * 8:
        raise IngestionError(f"'{path}' payload has {len(payload)} bytes, "
                             f"expected {count * 8}")
    return np.frombuffer(payload, dtype="<f8")


def sidecar_path(path) -> Path:
    return Path(str(path) + ".meta")


def save_snapshots(path, snaps: SnapshotMatrix) -> None:
    """Write the binary container and its text sidecar.

    The sidecar records one parameter value, so the matrix must come from a
    single run (or at least a single parameter).
    """
    params = np.unique(snaps.params)
    if params.size > 1:
        raise ConfigurationError(
            "snapshot files hold a single parameter per file; got "
            f"{params.size} distinct values")
    _write_container(path, SNAPSHOT_MAGIC,
                     [FORMAT_VERSION, snaps.nx, snaps.ny, snaps.n_vars,
                      snaps.n_cols],
                     [snaps.data])
    meta = configparser.ConfigParser()
    meta["snapshots"] = {
        "param": format(float(params[0]), ".17g"),
        "dt": format(snaps.dt, ".17g"),
        "run_id": snaps.run_ids[0] if snaps.run_ids else "run0",
        "times": " ".join(format(t, ".17g") for t in snaps.times),
    }
    with open(sidecar_path(path), "w") as fh:
        meta.write(fh)


def load_snapshots(path) -> SnapshotMatrix:
    dims, payload = _read_container(path, SNAPSHOT_MAGIC, 5)
    _, nx, ny, n_vars, n_cols = (int(d) for d in dims)
    if min(nx, ny, n_vars) < 1:
        raise IngestionError(f"'{path}' header has non-positive dimensions")
    n_dof = nx * ny * n_vars
    flat = _payload_floats(path, payload, n_dof * n_cols)
    data = flat.reshape((n_dof, n_cols), order="F")

    meta_file = sidecar_path(path)
    if not meta_file.exists():
        raise IngestionError(f"missing snapshot sidecar '{meta_file}'")
    meta = configparser.ConfigParser()
    meta.read(meta_file)
    try:
        sec = meta["snapshots"]
        param = float(sec["param"])
        dt = float(sec["dt"])
        run_id = sec.get("run_id", "run0")
        times = np.array([float(t) for t in sec["times"].split()])
    except (KeyError, ValueError) as exc:
        raise IngestionError(f"malformed sidecar '{meta_file}': {exc}") from exc
    if times.size != n_cols:
        raise IngestionError(f"sidecar '{meta_file}' lists {times.size} times "
                             f"for {n_cols} columns")
    return SnapshotMatrix(data, nx, ny, n_vars, np.full(n_cols, param), times,
                          (run_id,) * n_cols, dt)


def save_basis(path, basis: TrialBasis) -> None:
    _write_container(path, BASIS_MAGIC,
                     [FORMAT_VERSION, basis.nx, basis.ny, basis.n_vars,
                      basis.n_modes],
                     [basis.center, basis.singular_values, basis.phi])


def load_basis(path) -> TrialBasis:
    dims, payload = _read_container(path, BASIS_MAGIC, 5)
    _, nx, ny, n_vars, m = (int(d) for d in dims)
    if min(nx, ny, n_vars, m) < 1:
        raise IngestionError(f"'{path}' header has non-positive dimensions")
    n_dof = nx * ny * n_vars
    flat = _payload_floats(path, payload, n_dof + m + n_dof * m)
    center = flat[:n_dof]
    sigma = flat[n_dof:n_dof + m]
    phi = flat[n_dof + m:].reshape((n_dof, m), order="F")
    try:
        return TrialBasis(phi, center, sigma, nx, ny, n_vars)
    except ConfigurationError as exc:
        raise IngestionError(f"'{path}' holds an invalid basis: {exc}") from exc


def save_sample_mesh(path, mesh: SampleMesh, n_subdomain_cells: int) -> None:
    header = (f"sample mesh: n_s={mesh.n_s} of {n_subdomain_cells} cells, "
              f"n_b={mesh.n_b}\n"
              f"interface seeds: {' '.join(map(str, mesh.interface_seeds))}\n"
              f"qdeim cells: {' '.join(map(str, mesh.qdeim_cells))}")
    np.savetxt(path, mesh.cells, fmt="%d", header=header)


def load_sample_mesh(path, sub) -> SampleMesh:
    """Rebuild a sample mesh from its text file for the given subdomain."""
    try:
        cells = np.atleast_1d(np.loadtxt(path, dtype=np.int64))
    except (OSError, ValueError) as exc:
        raise IngestionError(f"cannot parse sample mesh '{path}': {exc}") from exc
    if cells.size == 0:
        raise IngestionError(f"sample mesh '{path}' lists no cells")
    if cells.min() < 0 or cells.max() >= sub.n_cells:
        raise IngestionError(f"sample mesh '{path}' has cell ids outside the "
                             f"{sub.n_cells}-cell subdomain")
    n_b = 0
    seeds = np.empty(0, dtype=np.int64)
    qdeim = np.empty(0, dtype=np.int64)
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            text = line[1:].strip()
            if text.startswith("sample mesh:"):
                n_b = int(text.rsplit("n_b=", 1)[1])
            elif text.startswith("interface seeds:"):
                vals = text.split(":", 1)[1].split()
                seeds = np.array([int(v) for v in vals], dtype=np.int64)
            elif text.startswith("qdeim cells:"):
                vals = text.split(":", 1)[1].split()
                qdeim = np.array([int(v) for v in vals], dtype=np.int64)
    cells = np.unique(cells)
    closure, ghost = _closure_and_ghosts(sub, cells)
    return SampleMesh(cells, closure, seeds, qdeim, ghost, n_b)
