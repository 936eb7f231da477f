"""Standalone readers for the solver's on-disk artifacts.

This package deliberately re-implements the readers from the documented
byte/text layouts instead of importing the solver, so the two sides can
only communicate through the published formats:

- field/snapshot container: magic ``SNAPMAT\\x00``, five little-endian
  uint32 words (version, nx, ny, n_vars, n_cols), then the column-major
  float64 matrix of shape (nx*ny*n_vars, n_cols); an INI sidecar
  ``<file>.meta`` holds the parameter, dt, and per-column times.
- results/pareto CSV tables with the fixed seven-column header.

All malformed-input errors carry the file name and, for text inputs, the
line number.
"""

import configparser
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SNAPSHOT_MAGIC = b"SNAPMAT\x00"
FORMAT_VERSION = 1

CSV_HEADER = ("param", "variable", "error", "mean_schwarz_iters",
              "wall_time_s", "speedup_vs_mono", "speedup_vs_decomp")


class PlotInputError(Exception):
    """An input file is missing, malformed, or inconsistent."""


@dataclass(frozen=True)
class Field:
    """One field container: (nx, ny, n_vars, n_cols) data plus metadata."""

    data: np.ndarray
    nx: int
    ny: int
    n_vars: int
    times: np.ndarray
    param: float
    run_id: str

    @property
    def n_cols(self) -> int:
        return self.data.shape[3]

    def frame(self, column: int = -1) -> np.ndarray:
        """One saved snapshot as (nx, ny, n_vars)."""
        return self.data[..., column]


def read_field(path) -> Field:
    """Parse a snapshot/field binary container and its sidecar."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise PlotInputError(f"cannot read '{path}': {exc}") from exc
    if len(raw) < len(SNAPSHOT_MAGIC) + 5 * 4:
        raise PlotInputError(f"'{path}' is too short to be a field container")
    if raw[:len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
        raise PlotInputError(
            f"'{path}' has wrong magic bytes {raw[:len(SNAPSHOT_MAGIC)]!r}")
    dims = np.frombuffer(raw, dtype="<u4", count=5,
                         offset=len(SNAPSHOT_MAGIC))
    version, nx, ny, n_vars, n_cols = (int(d) for d in dims)
    if version != FORMAT_VERSION:
        raise PlotInputError(f"'{path}' has unsupported format version "
                             f"{version}")
    if min(nx, ny, n_vars) < 1 or n_cols < 1:
        raise PlotInputError(f"'{path}' header has non-positive dimensions")
    n_dof = nx * ny * n_vars
    payload = raw[len(SNAPSHOT_MAGIC) + 5 * 4:]
    if len(payload) != n_dof * n_cols * 8:
        raise PlotInputError(f"'{path}' payload has {len(payload)} bytes, "
                             f"expected {n_dof * n_cols * 8}")
    flat = np.frombuffer(payload, dtype="<f8").reshape((n_dof, n_cols),
                                                       order="F")
    # DOF ordering: cell-major with the variable index fastest
    data = flat.reshape((nx, ny, n_vars, n_cols))

    meta_path = Path(str(path) + ".meta")
    if not meta_path.exists():
        raise PlotInputError(f"missing field sidecar '{meta_path}'")
    meta = configparser.ConfigParser()
    meta.read(meta_path)
    try:
        sec = meta["snapshots"]
        param = float(sec["param"])
        run_id = sec.get("run_id", "run0")
        times = np.array([float(t) for t in sec["times"].split()])
    except (KeyError, ValueError) as exc:
        raise PlotInputError(f"malformed sidecar '{meta_path}': {exc}") \
            from exc
    if times.size != n_cols:
        raise PlotInputError(f"sidecar '{meta_path}' lists {times.size} "
                             f"times for {n_cols} columns")
    return Field(data, nx, ny, n_vars, times, param, run_id)


@dataclass(frozen=True)
class ResultRow:
    """One CSV row; failed runs have variable == "status" and error None."""

    param: float
    variable: str
    error: float | None
    mean_schwarz_iters: float | None
    wall_time_s: float | None
    speedup_vs_mono: float | None
    speedup_vs_decomp: float | None

    @property
    def failed(self) -> bool:
        return self.variable == "status"


@dataclass(frozen=True)
class ResultTable:
    """Parsed results/pareto CSV."""

    path: Path
    rows: tuple

    @property
    def empty(self) -> bool:
        return not self.rows

    def completed(self) -> list:
        return [r for r in self.rows if not r.failed]

    def params(self) -> list:
        seen = []
        for r in self.rows:
            if r.param not in seen:
                seen.append(r.param)
        return seen

    def variables(self) -> list:
        seen = []
        for r in self.completed():
            if r.variable not in seen:
                seen.append(r.variable)
        return seen

    def series(self, variable: str):
        """(params, errors) for one variable, ordered by parameter."""
        rows = sorted((r for r in self.completed() if r.variable == variable),
                      key=lambda r: r.param)
        return ([r.param for r in rows], [r.error for r in rows])


def _parse_float(text, path, line_no, column):
    text = text.strip()
    if text == "":
        return None
    try:
        return float(text)
    except ValueError as exc:
        raise PlotInputError(f"'{path}' line {line_no}: column "
                             f"'{column}' has non-numeric value "
                             f"{text!r}") from exc


def read_results(path) -> ResultTable:
    """Parse a results or pareto CSV table.

    A file with no data rows (or no content at all) yields an empty table;
    structural problems raise with the file name and line number.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            raw_rows = list(csv.reader(fh))
    except OSError as exc:
        raise PlotInputError(f"cannot read '{path}': {exc}") from exc
    if not raw_rows:
        return ResultTable(path, ())
    header = tuple(c.strip() for c in raw_rows[0])
    if header != CSV_HEADER:
        raise PlotInputError(f"'{path}' line 1: header {header} does not "
                             f"match {CSV_HEADER}")
    rows = []
    for idx, raw in enumerate(raw_rows[1:], start=2):
        if not raw:
            continue
        if len(raw) != len(CSV_HEADER):
            raise PlotInputError(f"'{path}' line {idx}: expected "
                                 f"{len(CSV_HEADER)} columns, got {len(raw)}")
        param = _parse_float(raw[0], path, idx, "param")
        if param is None:
            raise PlotInputError(f"'{path}' line {idx}: column 'param' is "
                                 "empty")
        variable = raw[1].strip()
        if variable == "status":
            rows.append(ResultRow(param, variable, None, None, None, None,
                                  None))
            continue
        rows.append(ResultRow(
            param, variable,
            _parse_float(raw[2], path, idx, "error"),
            _parse_float(raw[3], path, idx, "mean_schwarz_iters"),
            _parse_float(raw[4], path, idx, "wall_time_s"),
            _parse_float(raw[5], path, idx, "speedup_vs_mono"),
            _parse_float(raw[6], path, idx, "speedup_vs_decomp"),
        ))
    return ResultTable(path, tuple(rows))
