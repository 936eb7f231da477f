"""Additive Schwarz coupling of subdomain-local FOM/PROM/HPROM solves.

Each time step iterates { transfer interface ghosts from the previous
iterate's states; re-solve every subdomain from t_n; test convergence of
consecutive iterates } until both tolerances are met.  All ghost reads within
an iteration come from the previous iterate (additive variant), so the
converged result does not depend on the order in which subdomains solve.

Wall-time accounting follows a parallel cost model: each iteration is charged
the maximum single-subdomain solve time plus the (serial) transfer and
convergence-check overhead.
"""

import time
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, CouplingError, SolverError
from .fv import CollocationPlan, default_context
from .mesh import build_donor_maps
from .rom import SampleMesh
from .solvers import lspg_solve, lspg_solve_collocated, newton_solve

DELTA_ABS_DEFAULT = 1e-11
DELTA_REL_DEFAULT = 1e-11
MAX_SCHWARZ_ITERS = 100

KINDS = ("fom", "prom", "hprom")


class SubdomainModel:
    """Solver state for one subdomain inside the coupled time loop.

    ``kind`` selects the per-iteration solve: "fom" (sparse Newton), "prom"
    (LSPG Gauss-Newton over ``basis``), or "hprom" (LSPG restricted to the
    sample mesh).  For ROM kinds the state exposed to neighbors is always the
    reconstruction x_bar + Phi q_hat written into the working frame.

    ``warm_start_iterates=True`` starts each Schwarz iteration's solve from
    the previous iteration's own solution instead of re-solving from the t_n
    state; the default is the clean re-solve.
    """

    def __init__(self, sub, model, params, dt, kind="fom", *, basis=None,
                 sample_mesh=None, warm_start_iterates=False):
        if kind not in KINDS:
            raise ConfigurationError(f"unknown subdomain model kind {kind!r}")
        self.sub = sub
        self.model = model
        self.kind = kind
        self.basis = basis
        self.warm_start_iterates = warm_start_iterates
        self.ctx = default_context(sub, model, params, dt)
        self.frame = np.zeros(sub.frame_shape)
        self.plan = None
        if kind in ("prom", "hprom"):
            if basis is None:
                raise ConfigurationError(f"{kind} subdomain {sub.id} needs a "
                                         "trial basis")
            if basis.n_dof != sub.n_dof or basis.n_vars != sub.n_vars:
                raise ConfigurationError(
                    f"basis layout ({basis.nx}x{basis.ny}x{basis.n_vars}) does "
                    f"not match subdomain {sub.id} "
                    f"({sub.nx}x{sub.ny}x{sub.n_vars})")
        if kind == "hprom":
            if sample_mesh is None:
                raise ConfigurationError(f"hprom subdomain {sub.id} needs a "
                                         "sample mesh")
            cells = sample_mesh.cells if isinstance(sample_mesh, SampleMesh) \
                else np.asarray(sample_mesh)
            self.plan = CollocationPlan(self.ctx, cells)
        elif sample_mesh is not None:
            raise ConfigurationError("sample meshes apply to hprom subdomains "
                                     "only")
        self.qhat = None        # converged reduced coordinates at t_n
        self._qhat_iter = None  # reduced coordinates of the current iterate
        self.t = 0.0
        self.last_report = None

    @property
    def dt(self) -> float:
        return self.ctx.dt

    def initialize(self, state, t0=0.0):
        """Install the t_0 state; ROM kinds project it onto the trial basis."""
        state = np.array(state, dtype=float)
        if state.shape != (self.sub.nx, self.sub.ny, self.sub.n_vars):
            raise ConfigurationError(
                f"initial state shape {state.shape} does not match subdomain "
                f"{self.sub.id}")
        self.ctx.prev = state
        self.frame[1:-1, 1:-1] = state
        if self.kind != "fom":
            self.qhat = self.basis.phi.T @ (state.reshape(-1)
                                            - self.basis.center)
            self._qhat_iter = None
        self.t = t0

    def physical_state(self) -> np.ndarray:
        return self.frame[1:-1, 1:-1].copy()

    def solve_step(self):
        """Re-solve the current time step under the frame's ghost values."""
        if self.kind == "fom":
            if not (self.warm_start_iterates and self.last_report is not None):
                self.frame[1:-1, 1:-1] = self.ctx.prev
            report = newton_solve(self.ctx, self.frame)
        else:
            q0 = self.qhat
            if self.warm_start_iterates and self._qhat_iter is not None:
                q0 = self._qhat_iter
            if self.kind == "prom":
                q, report = lspg_solve(self.ctx, self.frame, self.basis.phi,
                                       self.basis.center, q0)
            else:
                q, report = lspg_solve_collocated(self.plan, self.frame,
                                                  self.basis.phi,
                                                  self.basis.center, q0)
            self._qhat_iter = q
        self.last_report = report
        return report

    def accept_step(self):
        """Adopt the converged iterate as the t_{n+1} state."""
        self.ctx.prev = self.frame[1:-1, 1:-1].copy()
        if self.kind != "fom" and self._qhat_iter is not None:
            self.qhat = self._qhat_iter
        self._qhat_iter = None
        self.last_report = None
        self.t += self.dt


@dataclass(frozen=True)
class StepStats:
    """Per-time-step Schwarz accounting."""

    iterations: int
    eps_abs: tuple          # convergence history, one entry per iteration
    eps_rel: tuple
    wall_time: float        # parallel cost model seconds
    abs_only: bool          # relative test skipped due to a zero-norm iterate
    solver_iterations: int  # inner Newton/Gauss-Newton iterations, all solves


class SchwarzController:
    """Runs the additive Schwarz iteration over a roster of subdomain models."""

    def __init__(self, models, delta_abs=DELTA_ABS_DEFAULT,
                 delta_rel=DELTA_REL_DEFAULT, max_iters=MAX_SCHWARZ_ITERS,
                 solve_order=None):
        self.models = list(models)
        if not self.models:
            raise ConfigurationError("empty subdomain roster")
        for pos, m in enumerate(self.models):
            if m.sub.id != pos:
                raise ConfigurationError(
                    f"roster position {pos} holds subdomain id {m.sub.id}; "
                    "models must be ordered by subdomain id")
        dts = {m.dt for m in self.models}
        if len(dts) != 1:
            raise ConfigurationError(f"subdomains disagree on dt: {sorted(dts)}")
        self.dt = dts.pop()
        self.delta_abs = delta_abs
        self.delta_rel = delta_rel
        self.max_iters = max_iters
        self.donor_maps = build_donor_maps([m.sub for m in self.models])
        self.solve_order = (list(range(len(self.models)))
                            if solve_order is None else list(solve_order))
        if sorted(self.solve_order) != list(range(len(self.models))):
            raise ConfigurationError("solve_order must permute the roster")
        self.t = 0.0

    def initialize(self, states, t0=0.0):
        if len(states) != len(self.models):
            raise ConfigurationError(f"{len(states)} initial states for "
                                     f"{len(self.models)} subdomains")
        for m, s in zip(self.models, states):
            m.initialize(s, t0)
        self.t = t0

    def _transfer(self, exposed):
        """Write every interface ghost from the previous iterate's frames."""
        nv = self.models[0].sub.n_vars
        for dm in self.donor_maps:
            dst = self.models[dm.receiver].frame.reshape(-1, nv)
            src = exposed[dm.donor].reshape(-1, nv)
            dst[dm.ghost_flat] = src[dm.donor_flat]

    def _convergence(self, prev_frames):
        """(eps_abs, eps_rel, zero_norm_seen) between current and previous
        iterates, physical cells only."""
        abs_sq = 0.0
        rel_sq = 0.0
        zero_norm = False
        for m, pf in zip(self.models, prev_frames):
            d = m.frame[1:-1, 1:-1] - pf[1:-1, 1:-1]
            dsq = float(np.sum(d * d))
            usq = float(np.sum(m.frame[1:-1, 1:-1] ** 2))
            abs_sq += dsq
            if usq == 0.0:
                zero_norm = True
            else:
                rel_sq += dsq / usq
        return np.sqrt(abs_sq), np.sqrt(rel_sq), zero_norm

    def _solve_all(self, eps_abs_hist, eps_rel_hist):
        """Solve every subdomain once; returns (max solve seconds, inner iters)."""
        times = []
        inner = 0
        for idx in self.solve_order:
            m = self.models[idx]
            tic = time.perf_counter()
            try:
                report = m.solve_step()
            except SolverError as exc:
                raise CouplingError(
                    f"subdomain {m.sub.id} ({m.kind}) failed its solve at "
                    f"t = {m.t + m.dt:g}: {exc}",
                    history=(tuple(eps_abs_hist), tuple(eps_rel_hist))) from exc
            times.append(time.perf_counter() - tic)
            inner += report.iterations
        return max(times), inner

    def step(self) -> StepStats:
        """Advance every subdomain from t_n to t_{n+1}."""
        eps_abs_hist, eps_rel_hist = [], []
        abs_only = False
        wall = 0.0
        inner_total = 0

        if not self.donor_maps:
            solve_wall, inner_total = self._solve_all(eps_abs_hist,
                                                      eps_rel_hist)
            wall = solve_wall
            iterations = 1
        else:
            exposed = [m.frame.copy() for m in self.models]
            iterations = None
            for k in range(1, self.max_iters + 1):
                tic = time.perf_counter()
                self._transfer(exposed)
                overhead = time.perf_counter() - tic
                solve_wall, inner = self._solve_all(eps_abs_hist, eps_rel_hist)
                inner_total += inner
                tic = time.perf_counter()
                eps_abs, eps_rel, zero_norm = self._convergence(exposed)
                exposed = [m.frame.copy() for m in self.models]
                overhead += time.perf_counter() - tic
                wall += solve_wall + overhead
                eps_abs_hist.append(eps_abs)
                eps_rel_hist.append(eps_rel)
                abs_only = abs_only or zero_norm
                if (k >= 2 and eps_abs < self.delta_abs
                        and (zero_norm or eps_rel < self.delta_rel)):
                    iterations = k
                    break
            if iterations is None:
                raise CouplingError(
                    f"Schwarz did not converge in {self.max_iters} iterations "
                    f"at t = {self.t + self.dt:g} "
                    f"(eps_abs {eps_abs_hist[-1]:.3e}, "
                    f"eps_rel {eps_rel_hist[-1]:.3e})",
                    history=(tuple(eps_abs_hist), tuple(eps_rel_hist)))

        for m in self.models:
            m.accept_step()
        self.t += self.dt
        return StepStats(iterations, tuple(eps_abs_hist), tuple(eps_rel_hist),
                         wall, abs_only, inner_total)


@dataclass
class SchwarzResult:
    """Saved trajectory and per-step statistics of one transient run."""

    times: np.ndarray    # (n_saved,) including the initial time
    states: list         # per subdomain: (n_saved, nx, ny, n_vars)
    step_stats: list     # one StepStats per executed step

    @property
    def mean_iterations(self) -> float:
        if not self.step_stats:
            return 0.0
        return float(np.mean([s.iterations for s in self.step_stats]))

    @property
    def wall_time(self) -> float:
        return float(sum(s.wall_time for s in self.step_stats))


def run_transient(controller: SchwarzController, t_final: float,
                  save_every: int = 1) -> SchwarzResult:
    """March the coupled system to ``t_final``, saving every ``save_every``
    steps (the initial state is always saved)."""
    if save_every < 1:
        raise ConfigurationError("save_every must be at least 1")
    span = t_final - controller.t
    n_steps = int(round(span / controller.dt))
    if n_steps < 0 or span < -1e-12:
        raise ConfigurationError(f"t_final {t_final} precedes current time "
                                 f"{controller.t}")
    times = [controller.t]
    saved = [[m.physical_state()] for m in controller.models]
    stats = []
    for n in range(n_steps):
        stats.append(controller.step())
        if (n + 1) % save_every == 0 or n + 1 == n_steps:
            times.append(controller.t)
            for snaps, m in zip(saved, controller.models):
                snaps.append(m.physical_state())
    return SchwarzResult(np.array(times),
                         [np.stack(s) for s in saved], stats)
