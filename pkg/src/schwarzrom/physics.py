"""Flux models for the three 2D conservation-law systems.

Each model exposes conserved-variable arrays of shape (..., n_vars) and provides:
physical fluxes, a first-order Roe numerical flux with a Harten-Hyman entropy
fix, source terms, boundary ghost states, and the canonical initial condition.
The y-direction flux reuses the x-direction kernel by swapping the normal and
tangential components (grid-aligned rotation).
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import ConfigurationError, InternalError, StateError

# Boundary condition tags.
SLIP_WALL = "slip_wall"
DIRICHLET = "dirichlet"  # homogeneous: ghost = -interior
NEUMANN = "neumann"      # homogeneous: ghost = interior
INTERFACE = "schwarz"    # ghost set by transmission, never by a BC fill

ENTROPY_FIX_FRACTION = 0.05


@dataclass(frozen=True)
class ParamSet:
    """Physical parameters; each system reads only its own field."""

    mu: float = 0.0          # shallow-water Coriolis-like coefficient
    diffusion: float = 0.0   # Burgers diffusion coefficient
    p_ur: float = 1.5        # Euler upper-right quadrant initial pressure


@dataclass(frozen=True)
class RunDefaults:
    """Canonical domain and time-step settings per system."""

    bounds: tuple
    t_final: float
    dt: float
    warm_start: float = 0.0


def _harten_hyman(lams: np.ndarray) -> np.ndarray:
    """|lambda| with quadratic smoothing below a fraction of the local max speed."""
    a = np.abs(lams)
    delta = ENTROPY_FIX_FRACTION * a.max(axis=-1, keepdims=True)
    denom = np.where(delta > 0.0, 2.0 * delta, 1.0)
    return np.where(a < delta, (lams * lams + delta * delta) / denom, a)


class FluxModel:
    """Common interface; subclasses define the x-direction kernels."""

    name: str = ""
    n_vars: int = 0
    var_names: tuple = ()
    has_diffusion: bool = False
    defaults: RunDefaults

    # --- direction handling ------------------------------------------------
    def _normal_index(self, axis: int) -> int:
        raise NotImplementedError

    def _swap(self, U: np.ndarray) -> np.ndarray:
        """Exchange x- and y-velocity/momentum components."""
        out = U.copy()
        ix, iy = self._normal_index(0), self._normal_index(1)
        out[..., ix] = U[..., iy]
        out[..., iy] = U[..., ix]
        return out

    # --- public operations ---------------------------------------------------
    def physical_flux(self, U: np.ndarray, axis: int) -> np.ndarray:
        if axis == 0:
            return self._flux_x(U)
        return self._swap(self._flux_x(self._swap(U)))

    def roe_flux(self, UL: np.ndarray, UR: np.ndarray, axis: int) -> np.ndarray:
        if axis == 0:
            return self._roe_x(UL, UR)
        return self._swap(self._roe_x(self._swap(UL), self._swap(UR)))

    def diffusive_flux(self, UL, UR, spacing, params) -> np.ndarray:
        raise InternalError(f"{self.name} has no diffusive flux")

    def source(self, U: np.ndarray, params: ParamSet) -> np.ndarray:
        return np.zeros_like(U)

    def mirror(self, U: np.ndarray, axis: int) -> np.ndarray:
        """Slip-wall reflection: flip the normal momentum component."""
        out = U.copy()
        out[..., self._normal_index(axis)] *= -1.0
        return out

    def check_state(self, U: np.ndarray) -> None:
        """Raise StateError on non-physical values; default accepts anything."""

    def default_bcs(self) -> dict:
        raise NotImplementedError

    def initial_state(self, X: np.ndarray, Y: np.ndarray, params: ParamSet) -> np.ndarray:
        raise NotImplementedError

    # hooks implemented by subclasses
    def _flux_x(self, U: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _roe_x(self, UL: np.ndarray, UR: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _first_bad_cell(mask: np.ndarray):
    idx = np.argwhere(mask)
    return tuple(int(v) for v in idx[0]) if idx.size else None


class ShallowWater(FluxModel):
    """Shallow-water equations in (h, hu, hv) with a rotational source term.

    The source reads -mu*v and +mu*u on the momentum equations; u, v are
    velocities by default, momenta when source_on_momentum=True.
    """

    name = "swe"
    n_vars = 3
    var_names = ("h", "hu", "hv")
    defaults = RunDefaults(bounds=(-5.0, 5.0, -5.0, 5.0), t_final=10.0, dt=0.01)

    def __init__(self, gravity: float = 9.8, source_on_momentum: bool = False):
        self.gravity = float(gravity)
        self.source_on_momentum = bool(source_on_momentum)

    def _normal_index(self, axis: int) -> int:
        return 1 + axis

    def check_state(self, U: np.ndarray) -> None:
        h = U[..., 0]
        if np.any(h <= 0.0) or not np.all(np.isfinite(h)):
            bad = _first_bad_cell(~(h > 0.0))
            raise StateError("non-positive water depth", cell=bad,
                             value=None if bad is None else float(h[bad]))

    def _flux_x(self, U: np.ndarray) -> np.ndarray:
        h, hu, hv = U[..., 0], U[..., 1], U[..., 2]
        u = hu / h
        return np.stack([hu, hu * u + 0.5 * self.gravity * h * h, hv * u], axis=-1)

    def _roe_x(self, UL: np.ndarray, UR: np.ndarray) -> np.ndarray:
        g = self.gravity
        hL, hR = UL[..., 0], UR[..., 0]
        uL, uR = UL[..., 1] / hL, UR[..., 1] / hR
        vL, vR = UL[..., 2] / hL, UR[..., 2] / hR
        sL, sR = np.sqrt(hL), np.sqrt(hR)
        u = (sL * uL + sR * uR) / (sL + sR)
        v = (sL * vL + sR * vR) / (sL + sR)
        c = np.sqrt(g * 0.5 * (hL + hR))

        dh = hR - hL
        dhu = UR[..., 1] - UL[..., 1]
        dhv = UR[..., 2] - UL[..., 2]
        a1 = ((u + c) * dh - dhu) / (2.0 * c)
        a2 = dhv - v * dh
        a3 = (dhu - (u - c) * dh) / (2.0 * c)
        lam = _harten_hyman(np.stack([u - c, u, u + c], axis=-1))
        w1, w2, w3 = lam[..., 0] * a1, lam[..., 1] * a2, lam[..., 2] * a3

        diss = np.stack(
            [w1 + w3, w1 * (u - c) + w3 * (u + c), (w1 + w3) * v + w2], axis=-1
        )
        return 0.5 * (self._flux_x(UL) + self._flux_x(UR)) - 0.5 * diss

    def source(self, U: np.ndarray, params: ParamSet) -> np.ndarray:
        out = np.zeros_like(U)
        if params.mu != 0.0:
            if self.source_on_momentum:
                xm, ym = U[..., 1], U[..., 2]
            else:
                xm, ym = U[..., 1] / U[..., 0], U[..., 2] / U[..., 0]
            out[..., 1] = -params.mu * ym
            out[..., 2] = params.mu * xm
        return out

    def default_bcs(self) -> dict:
        return {"left": SLIP_WALL, "right": SLIP_WALL, "bottom": SLIP_WALL, "top": SLIP_WALL}

    def initial_state(self, X, Y, params: ParamSet) -> np.ndarray:
        h = 1.0 + 0.125 * np.exp(-((X - 1.0) ** 2) - (Y - 1.0) ** 2)
        out = np.zeros(X.shape + (3,))
        out[..., 0] = h
        return out


class BurgersSystem(FluxModel):
    """2D coupled Burgers system in (u, v) with optional isotropic diffusion."""

    name = "burgers"
    n_vars = 2
    var_names = ("u", "v")
    has_diffusion = True
    defaults = RunDefaults(bounds=(-1.0, 1.0, -1.0, 1.0), t_final=7.5, dt=0.05)

    def _normal_index(self, axis: int) -> int:
        return axis

    def _flux_x(self, U: np.ndarray) -> np.ndarray:
        u, v = U[..., 0], U[..., 1]
        return np.stack([0.5 * u * u, 0.5 * u * v], axis=-1)

    def _roe_x(self, UL: np.ndarray, UR: np.ndarray) -> np.ndarray:
        # Flux Jacobian at the arithmetic-mean state: [[u, 0], [v/2, u/2]],
        # eigenvalues (u, u/2), |A| = [[f1, 0], [v*(f1 - f2)/u, f2]].
        um = 0.5 * (UL[..., 0] + UR[..., 0])
        vm = 0.5 * (UL[..., 1] + UR[..., 1])
        lam = _harten_hyman(np.stack([um, 0.5 * um], axis=-1))
        f1, f2 = lam[..., 0], lam[..., 1]
        ratio = np.divide(f1 - f2, um, out=np.zeros_like(um), where=um != 0.0)
        du = UR[..., 0] - UL[..., 0]
        dv = UR[..., 1] - UL[..., 1]
        diss = np.stack([f1 * du, vm * ratio * du + f2 * dv], axis=-1)
        return 0.5 * (self._flux_x(UL) + self._flux_x(UR)) - 0.5 * diss

    def diffusive_flux(self, UL, UR, spacing, params: ParamSet) -> np.ndarray:
        return -params.diffusion * (UR - UL) / spacing

    def check_state(self, U: np.ndarray) -> None:
        if not np.all(np.isfinite(U)):
            bad = _first_bad_cell(~np.isfinite(U).all(axis=-1))
            raise StateError("non-finite Burgers state", cell=bad)

    def default_bcs(self) -> dict:
        return {"left": DIRICHLET, "bottom": DIRICHLET, "right": NEUMANN, "top": NEUMANN}

    def initial_state(self, X, Y, params: ParamSet) -> np.ndarray:
        bump = 0.5 * np.exp((-((X + 0.5) ** 2) - (Y + 0.4) ** 2) / 0.075)
        return np.stack([bump, bump.copy()], axis=-1)


class EulerGas(FluxModel):
    """Compressible Euler equations in (rho, rho*u, rho*v, rho*E), ideal gas."""

    name = "euler"
    n_vars = 4
    var_names = ("rho", "rho_u", "rho_v", "rho_E")
    defaults = RunDefaults(bounds=(0.0, 1.0, 0.0, 1.0), t_final=0.9, dt=0.005,
                           warm_start=0.05)
    x_split = 0.8
    y_split = 0.8
    p_lower_left = 0.029
    rho_ur = 1.5

    def __init__(self, gamma: float = 1.4):
        self.gamma = float(gamma)

    def _normal_index(self, axis: int) -> int:
        return 1 + axis

    def pressure(self, U: np.ndarray) -> np.ndarray:
        rho = U[..., 0]
        ke = 0.5 * (U[..., 1] ** 2 + U[..., 2] ** 2) / rho
        return (self.gamma - 1.0) * (U[..., 3] - ke)

    def check_state(self, U: np.ndarray) -> None:
        rho = U[..., 0]
        if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
            bad = _first_bad_cell(~(rho > 0.0))
            raise StateError("non-positive density", cell=bad,
                             value=None if bad is None else float(rho[bad]))
        p = self.pressure(U)
        if np.any(p <= 0.0) or not np.all(np.isfinite(p)):
            bad = _first_bad_cell(~(p > 0.0))
            raise StateError("non-positive pressure", cell=bad,
                             value=None if bad is None else float(p[bad]))

    def _flux_x(self, U: np.ndarray) -> np.ndarray:
        rho, mx, my, E = U[..., 0], U[..., 1], U[..., 2], U[..., 3]
        u = mx / rho
        p = self.pressure(U)
        return np.stack([mx, mx * u + p, my * u, (E + p) * u], axis=-1)

    def _roe_x(self, UL: np.ndarray, UR: np.ndarray) -> np.ndarray:
        g = self.gamma
        rhoL, rhoR = UL[..., 0], UR[..., 0]
        uL, uR = UL[..., 1] / rhoL, UR[..., 1] / rhoR
        vL, vR = UL[..., 2] / rhoL, UR[..., 2] / rhoR
        pL, pR = self.pressure(UL), self.pressure(UR)
        HL = (UL[..., 3] + pL) / rhoL
        HR = (UR[..., 3] + pR) / rhoR

        sL, sR = np.sqrt(rhoL), np.sqrt(rhoR)
        w = sL / (sL + sR)
        u = w * uL + (1.0 - w) * uR
        v = w * vL + (1.0 - w) * vR
        H = w * HL + (1.0 - w) * HR
        rho = sL * sR
        c2 = (g - 1.0) * (H - 0.5 * (u * u + v * v))
        if np.any(c2 <= 0.0):
            raise StateError("imaginary Roe sound speed", cell=_first_bad_cell(c2 <= 0.0))
        c = np.sqrt(c2)

        dp = pR - pL
        du = uR - uL
        dv = vR - vL
        drho = rhoR - rhoL
        a1 = (dp - rho * c * du) / (2.0 * c2)
        a2 = drho - dp / c2
        a3 = (dp + rho * c * du) / (2.0 * c2)
        a4 = rho * dv
        lam = _harten_hyman(np.stack([u - c, u, u + c, u], axis=-1))
        w1, w2, w3, w4 = (lam[..., k] * a for k, a in enumerate((a1, a2, a3, a4)))

        diss = np.stack(
            [
                w1 + w2 + w3,
                w1 * (u - c) + w2 * u + w3 * (u + c),
                (w1 + w2 + w3) * v + w4,
                w1 * (H - u * c) + 0.5 * w2 * (u * u + v * v) + w3 * (H + u * c) + w4 * v,
            ],
            axis=-1,
        )
        return 0.5 * (self._flux_x(UL) + self._flux_x(UR)) - 0.5 * diss

    def default_bcs(self) -> dict:
        return {"left": NEUMANN, "right": NEUMANN, "bottom": NEUMANN, "top": NEUMANN}

    def conserved(self, rho, u, v, p) -> np.ndarray:
        E = p / (self.gamma - 1.0) + 0.5 * rho * (u * u + v * v)
        return np.array([rho, rho * u, rho * v, E])

    def initial_state(self, X, Y, params: ParamSet) -> np.ndarray:
        quads = four_shock_states(self.gamma, self.rho_ur, 0.0, 0.0, params.p_ur,
                                  self.p_lower_left)
        out = np.empty(X.shape + (4,))
        right = X >= self.x_split
        upper = Y >= self.y_split
        for mask, key in [
            (right & upper, "ur"), (~right & upper, "ul"),
            (~right & ~upper, "ll"), (right & ~upper, "lr"),
        ]:
            rho, u, v, p = quads[key]
            out[mask] = self.conserved(rho, u, v, p)
        return out


def four_shock_states(gamma, rho_ur, u_ur, v_ur, p_ur, p_ll, tol=1e-15):
    """Quadrant states (rho, u, v, p) for the four-shock Riemann configuration.

    Given the upper-right state and the lower-left pressure, the remaining states
    follow from Rankine-Hugoniot relations across four shocks that propagate in
    the negative x and y directions. Tangential velocity is continuous across
    each shock; the Hugoniot adiabat links the densities; consistency of the
    lower-left corner forces equal pressure in the off-diagonal quadrants and
    reduces the solve to one scalar equation for that shared pressure.
    """
    if p_ll > p_ur:
        raise ConfigurationError(
            f"four-shock setup requires p_lower_left <= p_upper_right, got {p_ll} > {p_ur}"
        )
    beta = (gamma - 1.0) / (gamma + 1.0)

    def hugoniot_rho(rho_hi, p_hi, p_lo):
        r = p_lo / p_hi
        return rho_hi * (r + beta) / (1.0 + beta * r)

    def vjump(p_hi, rho_hi, p_lo, rho_lo):
        return np.sqrt(max((p_hi - p_lo) * (rho_hi - rho_lo), 0.0) / (rho_hi * rho_lo))

    if p_ur - p_ll <= tol * max(p_ur, 1.0):
        st = (rho_ur, u_ur, v_ur, p_ur)
        return {"ur": st, "ul": st, "ll": st, "lr": st}

    def mismatch(p_mid):
        rho_mid = hugoniot_rho(rho_ur, p_ur, p_mid)
        rho_ll = hugoniot_rho(rho_mid, p_mid, p_ll)
        return vjump(p_ur, rho_ur, p_mid, rho_mid) - vjump(p_mid, rho_mid, p_ll, rho_ll)

    p_mid = brentq(mismatch, p_ll, p_ur, xtol=tol, rtol=8.9e-16)
    rho_mid = hugoniot_rho(rho_ur, p_ur, p_mid)
    rho_ll = hugoniot_rho(rho_mid, p_mid, p_ll)
    jump_in = vjump(p_ur, rho_ur, p_mid, rho_mid)
    jump_out = vjump(p_mid, rho_mid, p_ll, rho_ll)

    states = {
        "ur": (rho_ur, u_ur, v_ur, p_ur),
        "ul": (rho_mid, u_ur + jump_in, v_ur, p_mid),
        "lr": (rho_mid, u_ur, v_ur + jump_in, p_mid),
        "ll": (rho_ll, u_ur + jump_out, v_ur + jump_in, p_ll),
    }
    resid = max(
        rankine_hugoniot_residual(states["ul"], states["ur"], 0, gamma),
        rankine_hugoniot_residual(states["ll"], states["ul"], 1, gamma),
        rankine_hugoniot_residual(states["ll"], states["lr"], 0, gamma),
        rankine_hugoniot_residual(states["lr"], states["ur"], 1, gamma),
    )
    if resid > 1e-12:
        raise InternalError(f"four-shock compatibility residual {resid:.3e} exceeds 1e-12")
    return states


def rankine_hugoniot_residual(prim_a, prim_b, axis, gamma):
    """Max-norm jump-condition defect for a single planar shock between two states.

    States are primitive (rho, u, v, p); the shock speed is eliminated through
    the mass equation, so the residual covers momentum and energy components.
    """
    def conserved_and_flux(prim):
        rho, u, v, p = prim
        un = (u, v)[axis]
        ut = (v, u)[axis]
        E = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
        U = np.array([rho, rho * un, rho * ut, E])
        F = np.array([rho * un, rho * un * un + p, rho * un * ut, (E + p) * un])
        return U, F

    Ua, Fa = conserved_and_flux(prim_a)
    Ub, Fb = conserved_and_flux(prim_b)
    if abs(Ua[0] - Ub[0]) < 1e-14:
        return float(np.max(np.abs(Fa - Fb)))
    s = (Fa[0] - Fb[0]) / (Ua[0] - Ub[0])
    return float(np.max(np.abs((Fa - s * Ua) - (Fb - s * Ub))))


def ghost_state(tag: str, interior: np.ndarray, axis: int, model: FluxModel) -> np.ndarray:
    """Ghost values outside a physical boundary, from the adjacent interior line."""
    if tag == SLIP_WALL:
        return model.mirror(interior, axis)
    if tag == DIRICHLET:
        return -interior
    if tag == NEUMANN:
        return interior.copy()
    if tag == INTERFACE:
        raise InternalError("interface ghosts are set by transmission, not by a BC fill")
    raise ConfigurationError(f"unknown boundary tag {tag!r}")


MODELS = {"swe": ShallowWater, "burgers": BurgersSystem, "euler": EulerGas}
# Field of ParamSet swept by each system's campaign.
SWEEP_FIELD = {"swe": "mu", "burgers": "diffusion", "euler": "p_ur"}


def get_model(name: str, **kwargs) -> FluxModel:
    try:
        cls = MODELS[name]
    except KeyError:
        raise ConfigurationError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
    return cls(**kwargs)


def make_params(model_name: str, value: float) -> ParamSet:
    """ParamSet with the system's swept parameter set to `value`."""
    return dataclasses.replace(ParamSet(), **{SWEEP_FIELD[model_name]: float(value)})


def initial_condition(model: FluxModel, sub, params: ParamSet) -> np.ndarray:
    """Cell-centroid initial state on a grid or subdomain, shape (nx, ny, n_vars)."""
    grid = getattr(sub, "grid", sub)
    if not np.allclose(
        (grid.x_lo, grid.x_hi, grid.y_lo, grid.y_hi), model.defaults.bounds
    ):
        warnings.warn(
            f"{model.name} initial condition evaluated on non-canonical bounds "
            f"({grid.x_lo}, {grid.x_hi}, {grid.y_lo}, {grid.y_hi})",
            stacklevel=2,
        )
    X, Y = sub.centroids()
    return model.initial_state(X, Y, params)
