"""Campaign driver.

Turns one INI config into the full study pipeline: monolithic FOM training
runs, POD bases (monolithic and per subdomain), sample meshes, coupled test
runs for every requested model mix, error metrics against the monolithic FOM
reference, and CSV/field artifacts.

Directory layout under the configured output directory:

  config.ini                      canonical config actually used
  snapshots/train_<k>.snap        training trajectories (+ .meta sidecars)
  bases/{mono,sub<j>}.basis       POD bases
  sample_meshes/{mono,sub<j>}.txt sampled cells (HPROM runs only)
  fields/<run>_final.snap         gathered state at t = T
  fields/<run>_errfield.snap      time-averaged |error| field
  records.json                    one record per executed run
  tables/results_<runtype>.csv    param/error/iterations/speedup table
  tables/pareto.csv               all ROM runs against both FOM baselines
  tables/projection_errors.csv    training projection errors per basis
"""

import configparser
import csv
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import (
    ConfigurationError,
    CouplingError,
    IngestionError,
    MetricError,
    SolverError,
    StateError,
)
from .fileio import (
    load_basis,
    load_sample_mesh,
    load_snapshots,
    save_basis,
    save_sample_mesh,
    save_snapshots,
)
from .mesh import build_grid, decompose, gather_fields
from .physics import MODELS, get_model, initial_condition, make_params
from .rom import (
    TrialBasis,
    assemble_snapshots,
    build_sample_mesh,
    compute_pod,
    projection_error,
    qdeim_seed_cells,
    snapshots_from_run,
)
from .schwarz import (
    DELTA_ABS_DEFAULT,
    DELTA_REL_DEFAULT,
    MAX_SCHWARZ_ITERS,
    SchwarzController,
    SubdomainModel,
    run_transient,
)

CSV_HEADER = ("param", "variable", "error", "mean_schwarz_iters",
              "wall_time_s", "speedup_vs_mono", "speedup_vs_decomp")

_PARAM_DEFAULTS = {
    "swe": ("-4.0 -3.0 -2.0 -1.0 0.0", "-3.5 -2.5 -1.5 -0.5"),
    "burgers": ("1e-4 1.75e-4 3.25e-4 5.5e-4 1e-3",
                "1.35e-4 2.5e-4 4.25e-4 7.5e-4"),
    "euler": ("0.5 0.75 1.0 1.25 1.5", "0.625 0.875 1.125 1.375"),
}

_ROM_KINDS = ("prom", "hprom")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class CampaignConfig:
    """Fully-resolved campaign settings (defaults applied, values validated)."""

    system: str
    nx: int
    ny: int
    bounds: tuple           # (x_lo, x_hi, y_lo, y_hi)
    dt: float
    t_final: float
    warm_start: float
    save_every: int
    px: int
    py: int
    overlap: int
    delta_abs: float
    delta_rel: float
    max_iters: int
    modes: tuple            # one entry (global M) or one per subdomain
    qdeim_modes: int
    ns_pct: float
    n_b: int
    interface_seeding: bool
    train: tuple
    test: tuple
    run_decomposed_fom: bool
    run_monolithic_rom: str     # "", "prom", or "hprom"
    run_decomposed_rom: tuple   # () or one kind per subdomain
    out_dir: str
    seed: int

    def __post_init__(self):
        if self.system not in MODELS:
            raise ConfigurationError(f"unknown system {self.system!r}; choose "
                                     f"from {sorted(MODELS)}")
        n_subs = self.px * self.py
        if len(self.modes) not in (1, n_subs):
            raise ConfigurationError(
                f"modes must be one global value or {n_subs} per-subdomain "
                f"values, got {len(self.modes)}")
        if any(m < 1 for m in self.modes):
            raise ConfigurationError("mode counts must be positive")
        if set(self.train) & set(self.test):
            raise ConfigurationError(
                "training and testing parameter lists must be disjoint; both "
                f"contain {sorted(set(self.train) & set(self.test))}")
        if self.run_monolithic_rom not in ("",) + _ROM_KINDS:
            raise ConfigurationError(
                f"monolithic_rom must be false or one of {_ROM_KINDS}")
        if self.run_decomposed_rom:
            if len(self.run_decomposed_rom) == 1:
                self.run_decomposed_rom = self.run_decomposed_rom * n_subs
            if len(self.run_decomposed_rom) != n_subs:
                raise ConfigurationError(
                    f"decomposed_rom lists {len(self.run_decomposed_rom)} "
                    f"kinds for {n_subs} subdomains")
            bad = set(self.run_decomposed_rom) - {"fom", "prom", "hprom"}
            if bad:
                raise ConfigurationError(f"unknown subdomain kinds {sorted(bad)}")
        if self.dt <= 0 or self.t_final <= 0:
            raise ConfigurationError("dt and t_final must be positive")
        if not 0 <= self.warm_start < self.t_final:
            raise ConfigurationError("warm_start must lie in [0, t_final)")
        stride = self.dt * self.save_every
        if abs(self.warm_start / stride - round(self.warm_start / stride)) > 1e-9:
            raise ConfigurationError(
                "warm_start must be a multiple of dt * save_every so the "
                "reference trajectory has a matching saved state")
        if self.save_every < 1:
            raise ConfigurationError("save_every must be at least 1")
        if self.n_b < 1:
            raise ConfigurationError("n_b must be at least 1")
        if self.ns_pct <= 0 and self._any_hprom():
            raise ConfigurationError("ns_pct must be positive for hprom runs")
        if self.qdeim_modes < 0:
            raise ConfigurationError("qdeim_modes cannot be negative")

    def _any_hprom(self) -> bool:
        return (self.run_monolithic_rom == "hprom"
                or "hprom" in self.run_decomposed_rom)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def modes_for(self, sub_index: int) -> int:
        return self.modes[0] if len(self.modes) == 1 else self.modes[sub_index]

    @property
    def mono_modes(self) -> int:
        return max(self.modes)

    def to_ini(self) -> str:
        """Canonical serialization; parsing it back reproduces this config."""
        cp = configparser.ConfigParser()
        cp["system"] = {"name": self.system}
        cp["grid"] = {"nx": str(self.nx), "ny": str(self.ny),
                      "x_lo": _fmt(self.bounds[0]), "x_hi": _fmt(self.bounds[1]),
                      "y_lo": _fmt(self.bounds[2]), "y_hi": _fmt(self.bounds[3])}
        cp["time"] = {"dt": _fmt(self.dt), "t_final": _fmt(self.t_final),
                      "warm_start": _fmt(self.warm_start),
                      "save_every": str(self.save_every)}
        cp["decomposition"] = {"px": str(self.px), "py": str(self.py),
                               "overlap": str(self.overlap)}
        cp["schwarz"] = {"delta_abs": _fmt(self.delta_abs),
                         "delta_rel": _fmt(self.delta_rel),
                         "max_iters": str(self.max_iters)}
        cp["rom"] = {"modes": " ".join(str(m) for m in self.modes),
                     "qdeim_modes": str(self.qdeim_modes)}
        cp["sampling"] = {"ns_pct": _fmt(self.ns_pct), "n_b": str(self.n_b),
                          "interface_seeding":
                              "true" if self.interface_seeding else "false"}
        cp["parameters"] = {"train": " ".join(_fmt(p) for p in self.train),
                            "test": " ".join(_fmt(p) for p in self.test)}
        cp["runs"] = {
            "decomposed_fom": "true" if self.run_decomposed_fom else "false",
            "monolithic_rom": self.run_monolithic_rom or "false",
            "decomposed_rom": (" ".join(self.run_decomposed_rom)
                               if self.run_decomposed_rom else "false"),
        }
        cp["output"] = {"directory": self.out_dir, "seed": str(self.seed)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def hash(self) -> str:
        return hashlib.sha256(self.to_ini().encode()).hexdigest()


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ConfigurationError(f"expected a boolean, got {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _ints(text: str) -> tuple:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def parse_config(text: str, overrides=None) -> CampaignConfig:
    """Build a config from INI text, applying ``section.key=value`` overrides."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse failure: {exc}") from exc
    for ov in overrides or ():
        key, _, value = ov.partition("=")
        section, _, name = key.strip().partition(".")
        if not (section and name and _):
            raise ConfigurationError(
                f"override {ov!r} must look like section.key=value")
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, name, value.strip())

    def get(section, key, fallback):
        return cp.get(section, key, fallback=fallback)

    try:
        system = cp.get("system", "name").strip().lower()
    except (configparser.NoSectionError, configparser.NoOptionError) as exc:
        raise ConfigurationError(f"config needs [system] name: {exc}") from exc
    if system not in MODELS:
        raise ConfigurationError(f"unknown system {system!r}; choose from "
                                 f"{sorted(MODELS)}")
    model = get_model(system)
    d = model.defaults
    train_default, test_default = _PARAM_DEFAULTS[system]

    rom_mono = get("runs", "monolithic_rom", "false").strip().lower()
    rom_dec = get("runs", "decomposed_rom", "false").strip().lower()
    return CampaignConfig(
        system=system,
        nx=int(get("grid", "nx", "50")),
        ny=int(get("grid", "ny", "50")),
        bounds=(float(get("grid", "x_lo", _fmt(d.bounds[0]))),
                float(get("grid", "x_hi", _fmt(d.bounds[1]))),
                float(get("grid", "y_lo", _fmt(d.bounds[2]))),
                float(get("grid", "y_hi", _fmt(d.bounds[3])))),
        dt=float(get("time", "dt", _fmt(d.dt))),
        t_final=float(get("time", "t_final", _fmt(d.t_final))),
        warm_start=float(get("time", "warm_start", _fmt(d.warm_start))),
        save_every=int(get("time", "save_every", "1")),
        px=int(get("decomposition", "px", "2")),
        py=int(get("decomposition", "py", "2")),
        overlap=int(get("decomposition", "overlap", "0")),
        delta_abs=float(get("schwarz", "delta_abs", _fmt(DELTA_ABS_DEFAULT))),
        delta_rel=float(get("schwarz", "delta_rel", _fmt(DELTA_REL_DEFAULT))),
        max_iters=int(get("schwarz", "max_iters", str(MAX_SCHWARZ_ITERS))),
        modes=_ints(get("rom", "modes", "20")),
        qdeim_modes=int(get("rom", "qdeim_modes", "0")),
        ns_pct=float(get("sampling", "ns_pct", "1.0")),
        n_b=int(get("sampling", "n_b", "10")),
        interface_seeding=_parse_bool(get("sampling", "interface_seeding",
                                          "true")),
        train=_floats(get("parameters", "train", train_default)),
        test=_floats(get("parameters", "test", test_default)),
        run_decomposed_fom=_parse_bool(get("runs", "decomposed_fom", "true")),
        run_monolithic_rom="" if rom_mono == "false" else rom_mono,
        run_decomposed_rom=(() if rom_dec == "false"
                            else tuple(rom_dec.replace(",", " ").split())),
        out_dir=get("output", "directory", "campaign_out"),
        seed=int(get("output", "seed", "1234")),
    )


def load_config(path, overrides=None) -> CampaignConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config '{path}': {exc}") from exc
    return parse_config(text, overrides)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def space_time_error(reference: np.ndarray, test: np.ndarray,
                     ref_times=None, test_times=None) -> np.ndarray:
    """Per-variable relative space-time error (ratio of squared norms).

    Both trajectories are (n_saved, nx, ny, n_vars) on the same grid and
    cadence; mismatches raise :class:`MetricError`.
    """
    reference = np.asarray(reference, dtype=float)
    test = np.asarray(test, dtype=float)
    if reference.shape != test.shape:
        raise MetricError(f"trajectory shapes differ: {reference.shape} vs "
                          f"{test.shape}")
    if ref_times is not None and test_times is not None:
        ref_times = np.asarray(ref_times)
        test_times = np.asarray(test_times)
        if ref_times.shape != test_times.shape or \
                not np.allclose(ref_times, test_times, atol=1e-12, rtol=0.0):
            raise MetricError("trajectory cadences differ")
    nv = reference.shape[-1]
    out = np.empty(nv)
    for v in range(nv):
        num = np.sum((reference[..., v] - test[..., v]) ** 2)
        den = np.sum(reference[..., v] ** 2)
        out[v] = num / den if den > 0.0 else (0.0 if num == 0.0 else np.inf)
    return out


@dataclass
class RunRecord:
    """Outcome of one campaign run."""

    run_id: str
    run_type: str           # reference | decomposed_fom | monolithic_rom | ...
    param: float
    config_hash: str
    status: str = "completed"
    errors: tuple = ()      # per-variable space-time errors (if referenced)
    mean_schwarz_iters: float = 0.0
    wall_time_s: float = 0.0
    speedup_vs_mono: float = float("nan")
    speedup_vs_decomp: float = float("nan")

    def to_dict(self):
        d = dict(self.__dict__)
        d["errors"] = list(self.errors)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["errors"] = tuple(d.get("errors", ()))
        return cls(**d)


def speedup_report(records) -> list:
    """Pareto rows (record, speedup_vs_mono, speedup_vs_decomp) for ROM runs.

    Raises :class:`MetricError` naming any missing FOM baseline.
    """
    mono = {r.param: r for r in records
            if r.run_type == "reference" and r.status == "completed"}
    dec = {r.param: r for r in records
           if r.run_type == "decomposed_fom" and r.status == "completed"}
    rows = []
    for r in records:
        if "rom" not in r.run_type or r.status != "completed":
            continue
        if r.param not in mono:
            raise MetricError(f"no monolithic FOM baseline at parameter "
                              f"{r.param:g}")
        if r.param not in dec:
            raise MetricError(f"no decomposed FOM baseline at parameter "
                              f"{r.param:g}")
        rows.append((r, mono[r.param].wall_time_s / r.wall_time_s,
                     dec[r.param].wall_time_s / r.wall_time_s))
    return rows


# ---------------------------------------------------------------------------
# campaign stages
# ---------------------------------------------------------------------------

class Campaign:
    """Stage-by-stage campaign execution rooted at the config's output dir.

    Stages may run in one process (``run_campaign``) or as separate CLI
    invocations; later stages load earlier artifacts from disk when not in
    memory.
    """

    def __init__(self, cfg: CampaignConfig):
        self.cfg = cfg
        self.model = get_model(cfg.system)
        self.grid = build_grid(cfg.nx, cfg.ny, cfg.bounds, self.model.n_vars)
        self.subs = decompose(self.grid, cfg.px, cfg.py, cfg.overlap)
        self.mono_sub = decompose(self.grid, 1, 1, 0)[0]
        self.out = Path(cfg.out_dir)
        self.training: list = []      # SnapshotMatrix per training run
        self.mono_basis = None
        self.sub_bases: list = []
        self.sample_meshes: dict = {}  # "mono" or sub index -> SampleMesh
        self.records: list = []
        self.projection: dict = {}

    # -- paths --------------------------------------------------------------
    def _snap_path(self, k):
        return self.out / "snapshots" / f"train_{k}.snap"

    def _basis_path(self, tag):
        return self.out / "bases" / f"{tag}.basis"

    def _mesh_path(self, tag):
        return self.out / "sample_meshes" / f"{tag}.txt"

    def _write_config(self):
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "config.ini").write_text(self.cfg.to_ini())

    # -- run helpers ----------------------------------------------------------
    def _controller(self, kinds, param, bases=None, meshes=None, mono=False):
        cfg = self.cfg
        subs = [self.mono_sub] if mono else self.subs
        params = make_params(cfg.system, param)
        models = []
        for i, sub in enumerate(subs):
            kind = kinds if isinstance(kinds, str) else kinds[i]
            basis = None if bases is None else bases[i]
            mesh = None if meshes is None else meshes[i]
            models.append(SubdomainModel(
                sub, self.model, params, cfg.dt, kind=kind,
                basis=basis, sample_mesh=mesh if kind == "hprom" else None))
        return SchwarzController(models, delta_abs=cfg.delta_abs,
                                 delta_rel=cfg.delta_rel,
                                 max_iters=cfg.max_iters)

    def _initial_states(self, subs, param):
        params = make_params(self.cfg.system, param)
        return [initial_condition(self.model, s, params) for s in subs]

    def _gathered(self, controller, result):
        subs = [m.sub for m in controller.models]
        out = np.empty((result.states[0].shape[0], self.grid.nx, self.grid.ny,
                        self.grid.n_vars))
        for k in range(out.shape[0]):
            vecs = [states[k] for states in result.states]
            out[k] = gather_fields(subs, vecs).reshape(out.shape[1:])
        return out

    # -- stage: training ------------------------------------------------------
    def stage_train(self):
        cfg = self.cfg
        self._write_config()
        (self.out / "snapshots").mkdir(parents=True, exist_ok=True)
        self.training = []
        for k, p in enumerate(cfg.train):
            ctl = self._controller("fom", p, mono=True)
            ctl.initialize(self._initial_states([self.mono_sub], p))
            res = run_transient(ctl, cfg.t_final, cfg.save_every)
            snaps = snapshots_from_run(res.states[0], res.times, p, cfg.dt,
                                       run_id=f"train_{k}")
            save_snapshots(self._snap_path(k), snaps)
            self.training.append(snaps)
        return self.training

    def _load_training(self):
        if not self.training:
            paths = sorted((self.out / "snapshots").glob("train_*.snap"),
                           key=lambda p: int(p.stem.split("_")[-1]))
            if not paths:
                raise IngestionError(
                    f"no training snapshots under {self.out / 'snapshots'}; "
                    "run the train stage first")
            self.training = [load_snapshots(p) for p in paths]
        return self.training

    # -- stage: bases ----------------------------------------------------------
    def stage_basis(self):
        cfg = self.cfg
        runs = self._load_training()
        (self.out / "bases").mkdir(parents=True, exist_ok=True)
        mono_snaps = assemble_snapshots(runs)
        split_snaps = assemble_snapshots(runs, subdomains=self.subs)
        # one extra-rank basis serves both the online modes and QDEIM seeding
        mono_rank = min(max(cfg.mono_modes, cfg.qdeim_modes),
                        mono_snaps.n_cols)
        self.mono_basis = compute_pod(mono_snaps, mono_rank)
        save_basis(self._basis_path("mono"), self.mono_basis)
        self.sub_bases = []
        for i, (sub, snaps) in enumerate(zip(self.subs, split_snaps)):
            rank = min(max(cfg.modes_for(i), cfg.qdeim_modes), snaps.n_cols)
            basis = compute_pod(snaps, rank)
            save_basis(self._basis_path(f"sub{sub.id}"), basis)
            self.sub_bases.append(basis)
        self.projection = self._projection_errors(mono_snaps, split_snaps)
        self._write_projection_table()
        return self.mono_basis, self.sub_bases

    def _projection_errors(self, mono_snaps, split_snaps):
        cfg = self.cfg
        out = {}
        mono = truncate_basis(self.mono_basis, min(cfg.mono_modes,
                                                   self.mono_basis.n_modes))
        per_var, total = projection_error(mono, mono_snaps)
        out["mono"] = {"per_var": per_var, "total": total,
                       "modes": mono.n_modes}
        num_sum = 0.0
        den_sum = 0.0
        for i, (basis, snaps) in enumerate(zip(self.sub_bases, split_snaps)):
            b = truncate_basis(basis, min(cfg.modes_for(i), basis.n_modes))
            per_var, total = projection_error(b, snaps)
            den = float(np.sum(snaps.data ** 2))
            num_sum += total * den
            den_sum += den
            out[f"sub{i}"] = {"per_var": per_var, "total": total,
                              "modes": b.n_modes}
        out["decomposed"] = {"total": num_sum / den_sum}
        return out

    def _write_projection_table(self):
        tables = self.out / "tables"
        tables.mkdir(parents=True, exist_ok=True)
        names = self.model.var_names
        with open(tables / "projection_errors.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("basis", "modes", "variable", "error"))
            for tag, entry in self.projection.items():
                if "per_var" not in entry:
                    w.writerow((tag, "", "all", _fmt(entry["total"])))
                    continue
                for v, name in enumerate(names):
                    w.writerow((tag, entry["modes"], name,
                                _fmt(entry["per_var"][v])))
                w.writerow((tag, entry["modes"], "all", _fmt(entry["total"])))

    def _load_bases(self):
        if self.mono_basis is None:
            path = self._basis_path("mono")
            if not path.exists():
                raise IngestionError(f"missing basis file {path}; run the "
                                     "basis stage first")
            self.mono_basis = load_basis(path)
            self.sub_bases = [load_basis(self._basis_path(f"sub{s.id}"))
                              for s in self.subs]
        return self.mono_basis, self.sub_bases

    # -- stage: sample meshes ---------------------------------------------------
    def _sample_target(self) -> int:
        return max(1, int(round(self.cfg.ns_pct / 100.0
                                * self.grid.n_cells)))

    def stage_sample(self):
        """Build and store sample meshes for every subdomain and the
        monolithic domain.  Targets are ns_pct of the *global* cell count for
        each mesh."""
        cfg = self.cfg
        self._load_bases()
        (self.out / "sample_meshes").mkdir(parents=True, exist_ok=True)
        target = self._sample_target()
        self.sample_meshes = {}
        for sub, basis in zip(self.subs, self.sub_bases):
            q = None
            if cfg.qdeim_modes:
                q = qdeim_seed_cells(basis, min(cfg.qdeim_modes,
                                                basis.n_modes))
            mesh = build_sample_mesh(sub, target, cfg.n_b, [cfg.seed, sub.id],
                                     qdeim_cells=q,
                                     seed_interfaces=cfg.interface_seeding)
            save_sample_mesh(self._mesh_path(f"sub{sub.id}"), mesh,
                             sub.n_cells)
            self.sample_meshes[sub.id] = mesh
        q = None
        if cfg.qdeim_modes:
            q = qdeim_seed_cells(self.mono_basis,
                                 min(cfg.qdeim_modes, self.mono_basis.n_modes))
        mono_mesh = build_sample_mesh(self.mono_sub, target, cfg.n_b,
                                      [cfg.seed, len(self.subs)],
                                      qdeim_cells=q,
                                      seed_interfaces=cfg.interface_seeding)
        save_sample_mesh(self._mesh_path("mono"), mono_mesh,
                         self.mono_sub.n_cells)
        self.sample_meshes["mono"] = mono_mesh
        return self.sample_meshes

    def _load_sample_meshes(self):
        if not self.sample_meshes:
            path = self._mesh_path("mono")
            if not path.exists():
                raise IngestionError(f"missing sample mesh {path}; run the "
                                     "sample stage first")
            self.sample_meshes = {
                "mono": load_sample_mesh(path, self.mono_sub)}
            for s in self.subs:
                self.sample_meshes[s.id] = load_sample_mesh(
                    self._mesh_path(f"sub{s.id}"), s)
        return self.sample_meshes

    # -- stage: test runs --------------------------------------------------------
    def _execute(self, run_id, run_type, param, controller, reference=None):
        """Run one case to t_final and record metrics/fields."""
        cfg = self.cfg
        try:
            result = run_transient(controller, cfg.t_final, cfg.save_every)
        except (CouplingError, SolverError, StateError) as exc:
            rec = RunRecord(run_id, run_type, param, cfg.hash(),
                            status=f"failed: {exc}")
            self.records.append(rec)
            return rec, None
        gathered = self._gathered(controller, result)
        rec = RunRecord(run_id, run_type, param, cfg.hash(),
                        mean_schwarz_iters=result.mean_iterations,
                        wall_time_s=result.wall_time)
        fields = self.out / "fields"
        fields.mkdir(parents=True, exist_ok=True)
        save_snapshots(
            fields / f"{run_id}_final.snap",
            snapshots_from_run([gathered[-1]], [result.times[-1]], param,
                               cfg.dt, run_id))
        if reference is not None:
            ref_states, ref_times = reference
            if gathered.shape != ref_states.shape:
                raise MetricError(
                    f"run {run_id} saved {gathered.shape[0]} states; the "
                    f"reference has {ref_states.shape[0]}")
            rec.errors = tuple(space_time_error(ref_states, gathered,
                                                ref_times, result.times))
            err_field = np.mean(np.abs(gathered - ref_states), axis=0)
            save_snapshots(
                fields / f"{run_id}_errfield.snap",
                snapshots_from_run([err_field], [result.times[-1]], param,
                                   cfg.dt, run_id))
        self.records.append(rec)
        return rec, (gathered, result.times)

    def _rom_ingredients(self, kinds, mono=False):
        """Per-subdomain bases (online ranks) and sample meshes for a run."""
        cfg = self.cfg
        self._load_bases()
        if mono:
            basis = truncate_basis(self.mono_basis,
                                   min(cfg.mono_modes, self.mono_basis.n_modes))
            bases = [basis]
            meshes = [self.sample_meshes.get("mono")] \
                if kinds == "hprom" else [None]
        else:
            bases, meshes = [], []
            for i, (sub, b) in enumerate(zip(self.subs, self.sub_bases)):
                kind = kinds[i]
                bases.append(truncate_basis(b, min(cfg.modes_for(i),
                                                   b.n_modes))
                             if kind != "fom" else None)
                meshes.append(self.sample_meshes.get(sub.id)
                              if kind == "hprom" else None)
        return bases, meshes

    def stage_run(self):
        cfg = self.cfg
        self._write_config()
        if cfg.run_monolithic_rom == "hprom" or "hprom" in cfg.run_decomposed_rom:
            self._load_sample_meshes()
        warm_index = int(round(cfg.warm_start / (cfg.dt * cfg.save_every)))
        for param in cfg.test:
            tag = f"{cfg.system}_p{param:g}"
            # monolithic FOM reference (also the mono wall-time baseline)
            ctl = self._controller("fom", param, mono=True)
            ctl.initialize(self._initial_states([self.mono_sub], param))
            rec, ref = self._execute(f"{tag}_fom_mono", "reference", param,
                                     ctl)
            if ref is None:
                continue
            ref_states, ref_times = ref
            warm = (ref_states[warm_index], ref_times[warm_index])
            rom_ref = (ref_states[warm_index:], ref_times[warm_index:])

            if cfg.run_decomposed_fom:
                ctl = self._controller("fom", param)
                ctl.initialize(self._initial_states(self.subs, param))
                self._execute(f"{tag}_fom_decomp", "decomposed_fom", param,
                              ctl, reference=ref)
            if cfg.run_monolithic_rom:
                kind = cfg.run_monolithic_rom
                bases, meshes = self._rom_ingredients(kind, mono=True)
                ctl = self._controller(kind, param, bases=bases,
                                       meshes=meshes, mono=True)
                ctl.initialize([warm[0]], t0=warm[1])
                self._execute(f"{tag}_{kind}_mono", "monolithic_rom", param,
                              ctl, reference=rom_ref)
            if cfg.run_decomposed_rom:
                kinds = cfg.run_decomposed_rom
                bases, meshes = self._rom_ingredients(kinds)
                ctl = self._controller(kinds, param, bases=bases,
                                       meshes=meshes)
                warm_subs = [warm[0][s.i0:s.i1 + 1, s.j0:s.j1 + 1]
                             for s in self.subs]
                ctl.initialize(warm_subs, t0=warm[1])
                label = ("hprom" if "hprom" in kinds else
                         "prom" if "prom" in kinds else "fom")
                self._execute(f"{tag}_{label}_decomp", "decomposed_rom",
                              param, ctl, reference=rom_ref)
        self._write_records()
        return self.records

    def _write_records(self):
        payload = [r.to_dict() for r in self.records]
        with open(self.out / "records.json", "w") as fh:
            json.dump(payload, fh, indent=1)

    def _load_records(self):
        if not self.records:
            path = self.out / "records.json"
            if not path.exists():
                raise IngestionError(f"missing {path}; run the run stage first")
            with open(path) as fh:
                self.records = [RunRecord.from_dict(d) for d in json.load(fh)]
        return self.records

    # -- stage: report -----------------------------------------------------------
    def stage_report(self):
        records = self._load_records()
        tables = self.out / "tables"
        tables.mkdir(parents=True, exist_ok=True)
        names = self.model.var_names
        mono = {r.param: r for r in records if r.run_type == "reference"
                and r.status == "completed"}
        dec = {r.param: r for r in records if r.run_type == "decomposed_fom"
               and r.status == "completed"}
        for r in records:
            r.speedup_vs_mono = (mono[r.param].wall_time_s / r.wall_time_s
                                 if r.param in mono and r.wall_time_s > 0
                                 else float("nan"))
            r.speedup_vs_decomp = (dec[r.param].wall_time_s / r.wall_time_s
                                   if r.param in dec and r.wall_time_s > 0
                                   else float("nan"))

        by_type = {}
        for r in records:
            by_type.setdefault(r.run_type, []).append(r)
        written = []
        for run_type, recs in sorted(by_type.items()):
            path = tables / f"results_{run_type}.csv"
            self._write_table(path, recs, names)
            written.append(path)

        rom_recs = [r for r in records if "rom" in r.run_type
                    and r.status == "completed"]
        if rom_recs and all(r.param in mono and r.param in dec
                            for r in rom_recs):
            rows = speedup_report(records)
            path = tables / "pareto.csv"
            self._write_table(path, [r for r, _, _ in rows], names)
            written.append(path)
        self._write_records()
        return written

    def _write_table(self, path, recs, names):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for r in sorted(recs, key=lambda r: (r.param, r.run_id)):
                if r.status != "completed":
                    w.writerow((_fmt(r.param), "status", r.status, "", "",
                                "", ""))
                    continue
                errs = r.errors if r.errors else (float("nan"),) * len(names)
                for v, name in enumerate(names):
                    w.writerow((
                        _fmt(r.param), name,
                        _fmt(errs[v]) if r.errors else "",
                        _fmt(r.mean_schwarz_iters),
                        _fmt(r.wall_time_s),
                        _fmt(r.speedup_vs_mono),
                        _fmt(r.speedup_vs_decomp),
                    ))


def truncate_basis(basis: TrialBasis, n_modes: int) -> TrialBasis:
    """Leading-mode restriction of a basis (same centering)."""
    if n_modes > basis.n_modes:
        raise ConfigurationError(f"cannot truncate a {basis.n_modes}-mode "
                                 f"basis to {n_modes} modes")
    if n_modes == basis.n_modes:
        return basis
    return TrialBasis(basis.phi[:, :n_modes], basis.center,
                      basis.singular_values[:n_modes], basis.nx, basis.ny,
                      basis.n_vars)


@dataclass
class CampaignResult:
    records: list
    projection: dict
    out_dir: Path
    config_hash: str


def run_campaign(cfg: CampaignConfig) -> CampaignResult:
    """Execute every stage of a campaign in order."""
    camp = Campaign(cfg)
    camp.stage_train()
    camp.stage_basis()
    if cfg._any_hprom():
        camp.stage_sample()
    if cfg.test:
        camp.stage_run()
        camp.stage_report()
    return CampaignResult(camp.records, camp.projection, camp.out,
                          cfg.hash())
