"""Shared fixtures: hand-written artifacts and a real campaign run.

The artifact writers here are independent of the solver package on
purpose — they emit the documented byte/text layouts directly so the
readers are tested against the format, not against a shared codepath.
"""

import configparser
import csv
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

CSV_HEADER = ("param", "variable", "error", "mean_schwarz_iters",
              "wall_time_s", "speedup_vs_mono", "speedup_vs_decomp")


def write_field_file(path, data, times, param=0.0, run_id="run0", dt=0.01):
    """Write a snapshot/field container plus sidecar; data (nx,ny,nv,nc)."""
    path = Path(path)
    nx, ny, nv, nc = data.shape
    flat = np.asarray(data, dtype="<f8").reshape(nx * ny * nv, nc)
    with open(path, "wb") as fh:
        fh.write(b"SNAPMAT\x00")
        fh.write(np.asarray([1, nx, ny, nv, nc], dtype="<u4").tobytes())
        fh.write(flat.tobytes(order="F"))
    meta = configparser.ConfigParser()
    meta["snapshots"] = {
        "param": format(float(param), ".17g"),
        "dt": format(float(dt), ".17g"),
        "run_id": run_id,
        "times": " ".join(format(float(t), ".17g") for t in times),
    }
    with open(str(path) + ".meta", "w") as fh:
        meta.write(fh)
    return path


def write_results_file(path, rows, header=CSV_HEADER):
    """Write a results/pareto CSV from row tuples."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


@pytest.fixture
def field_file(tmp_path):
    rng = np.random.default_rng(42)
    data = rng.standard_normal((6, 4, 3, 5))
    times = 0.01 * np.arange(5)
    return write_field_file(tmp_path / "field.snap", data, times,
                            param=-0.5, run_id="demo"), data, times


@pytest.fixture
def results_file(tmp_path):
    rows = [
        (-0.5, "h", 1.2e-9, 3.5, 0.8, 2.0, 0.5),
        (-0.5, "hu", 4.0e-8, 3.5, 0.8, 2.0, 0.5),
        (-1.5, "h", 2.5e-9, 4.0, 0.9, 1.8, 0.45),
        (-1.5, "hu", 8.0e-8, 4.0, 0.9, 1.8, 0.45),
    ]
    return write_results_file(tmp_path / "results.csv", rows), rows


CAMPAIGN_INI = """\
[system]
name = swe
[grid]
nx = 12
ny = 12
[time]
dt = 0.01
t_final = 0.05
[decomposition]
px = 2
py = 2
overlap = 0
[rom]
modes = 5
[parameters]
train = -4.0 -2.0
test = -0.5
[runs]
decomposed_fom = true
monolithic_rom = prom
decomposed_rom = prom
[output]
directory = {out}
seed = 1234
"""


def _solver_cli_command():
    exe = shutil.which("schwarzrom")
    if exe is not None:
        return [exe]
    return [sys.executable, "-m", "schwarzrom.cli"]


@pytest.fixture(scope="session")
def campaign_dir(tmp_path_factory):
    """Artifacts of a small real campaign, produced via the solver CLI."""
    root = tmp_path_factory.mktemp("campaign")
    out = root / "out"
    config = root / "campaign.ini"
    config.write_text(CAMPAIGN_INI.format(out=out))
    base = _solver_cli_command()
    for stage in ("train", "basis", "run", "report"):
        proc = subprocess.run(base + [stage, "--config", str(config)],
                              capture_output=True, text=True)
        if proc.returncode != 0:
            pytest.fail(f"solver CLI stage '{stage}' failed:\n{proc.stderr}")
    return out
