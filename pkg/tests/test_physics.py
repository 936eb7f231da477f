"""Flux model tests.

Oracles:
- a standalone scalar 1D shallow-water Roe flux, written independently of physics.py;
- a generic Roe-dissipation oracle that finite-differences the analytic flux at the
  model's Roe-average state and forms |A| by numerical eigendecomposition;
- Rankine-Hugoniot jump residuals for the Euler four-shock quadrant states.
"""

import math
import warnings

import numpy as np
import pytest

from schwarzrom.exceptions import ConfigurationError, InternalError, StateError
from schwarzrom.mesh import build_grid
from schwarzrom.physics import (
    DIRICHLET,
    INTERFACE,
    NEUMANN,
    SLIP_WALL,
    BurgersSystem,
    EulerGas,
    ParamSet,
    ShallowWater,
    _harten_hyman,
    four_shock_states,
    get_model,
    ghost_state,
    initial_condition,
    make_params,
    rankine_hugoniot_residual,
)

SWE = ShallowWater()
BURGERS = BurgersSystem()
EULER = EulerGas()


def _random_states(model, rng, n):
    if model.name == "swe":
        out = np.empty((n, 3))
        out[:, 0] = rng.uniform(0.5, 1.5, n)
        out[:, 1:] = rng.uniform(-0.4, 0.4, (n, 2)) * out[:, :1]
    elif model.name == "burgers":
        out = rng.uniform(-1.0, 1.0, (n, 2))
    else:
        rho = rng.uniform(0.5, 1.5, n)
        u = rng.uniform(-0.5, 0.5, (n, 2))
        p = rng.uniform(0.5, 1.5, n)
        out = np.stack(
            [rho, rho * u[:, 0], rho * u[:, 1],
             p / 0.4 + 0.5 * rho * (u ** 2).sum(axis=1)], axis=-1,
        )
    return out


# ---------------------------------------------------------------------------
# physical fluxes and sources
# ---------------------------------------------------------------------------

def test_swe_physical_flux_values():
    U = np.array([1.0, 0.3, 0.1])
    fx = SWE.physical_flux(U, 0)
    assert np.allclose(fx, [0.3, 0.09 + 0.5 * 9.8, 0.03])
    fy = SWE.physical_flux(U, 1)
    assert np.allclose(fy, [0.1, 0.03, 0.01 + 0.5 * 9.8])


def test_burgers_flux_has_half_factor():
    U = np.array([1.0, 0.5])
    assert np.allclose(BURGERS.physical_flux(U, 0), [0.5, 0.25])
    assert np.allclose(BURGERS.physical_flux(U, 1), [0.25, 0.125])


def test_euler_pressure_and_flux():
    U = np.array([1.0, 0.2, 0.0, 1.0])
    p = EULER.pressure(U)
    assert p == pytest.approx(0.4 * (1.0 - 0.02))
    fx = EULER.physical_flux(U, 0)
    assert fx[0] == pytest.approx(0.2)
    assert fx[1] == pytest.approx(0.04 + p)
    assert fx[3] == pytest.approx((1.0 + p) * 0.2)


def test_swe_source_velocity_reading():
    U = np.array([[1.0, 0.3, 0.1]])
    src = SWE.source(U, ParamSet(mu=-2.0))
    assert np.allclose(src, [[0.0, 0.2, -0.6]])


def test_swe_source_momentum_reading_differs():
    model = ShallowWater(source_on_momentum=True)
    U = np.array([[2.0, 0.6, 0.2]])
    src_m = model.source(U, ParamSet(mu=-2.0))
    assert np.allclose(src_m, [[0.0, 0.4, -1.2]])
    src_v = SWE.source(U, ParamSet(mu=-2.0))
    assert np.allclose(src_v, [[0.0, 0.2, -0.6]])


def test_source_zero_without_parameter():
    U = np.array([[1.0, 0.3, 0.1]])
    assert np.all(SWE.source(U, ParamSet()) == 0.0)
    assert np.all(BURGERS.source(np.ones((1, 2)), ParamSet()) == 0.0)
    assert np.all(EULER.source(np.ones((1, 4)), ParamSet()) == 0.0)


def test_burgers_diffusive_flux_sign():
    UL, UR = np.array([[1.0, 1.0]]), np.array([[0.0, 0.0]])
    f = BURGERS.diffusive_flux(UL, UR, 0.1, ParamSet(diffusion=1e-3))
    assert np.allclose(f, 0.01)


# ---------------------------------------------------------------------------
# Roe flux: consistency, oracles, entropy fix
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("model", [SWE, BURGERS, EULER])
@pytest.mark.parametrize("axis", [0, 1])
def test_roe_consistency(model, axis):
    rng = np.random.default_rng(3)
    U = _random_states(model, rng, 16)
    assert np.allclose(model.roe_flux(U, U, axis), model.physical_flux(U, axis),
                       rtol=0.0, atol=1e-14)


def _swe_roe_1d(hL, huL, hR, huR, g=9.8):
    """Standalone 1D shallow-water Roe flux (independent oracle)."""
    uL, uR = huL / hL, huR / hR
    sL, sR = math.sqrt(hL), math.sqrt(hR)
    u = (sL * uL + sR * uR) / (sL + sR)
    c = math.sqrt(g * 0.5 * (hL + hR))
    dh, dhu = hR - hL, huR - huL
    a1 = ((u + c) * dh - dhu) / (2 * c)
    a3 = (dhu - (u - c) * dh) / (2 * c)
    fL = (huL, huL * uL + 0.5 * g * hL * hL)
    fR = (huR, huR * uR + 0.5 * g * hR * hR)
    d0 = abs(u - c) * a1 + abs(u + c) * a3
    d1 = abs(u - c) * a1 * (u - c) + abs(u + c) * a3 * (u + c)
    return (0.5 * (fL[0] + fR[0]) - 0.5 * d0, 0.5 * (fL[1] + fR[1]) - 0.5 * d1)


def test_swe_roe_matches_1d_oracle():
    UL = np.array([1.125, 0.0, 0.0])
    UR = np.array([1.0, 0.0, 0.0])
    got = SWE.roe_flux(UL, UR, 0)
    want = _swe_roe_1d(1.125, 0.0, 1.0, 0.0)
    assert got[0] == pytest.approx(want[0], rel=1e-13)
    assert got[1] == pytest.approx(want[1], rel=1e-13)
    assert got[2] == 0.0
    # same jump rotated to the y-direction
    got_y = SWE.roe_flux(np.array([1.125, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]), 1)
    assert got_y[0] == pytest.approx(want[0], rel=1e-13)
    assert got_y[2] == pytest.approx(want[1], rel=1e-13)
    assert got_y[1] == 0.0


def _fd_jacobian(flux, U, h=1e-7):
    n = U.size
    A = np.empty((n, n))
    for j in range(n):
        step = h * (1.0 + abs(U[j]))
        Up, Um = U.copy(), U.copy()
        Up[j] += step
        Um[j] -= step
        A[:, j] = (flux(Up) - flux(Um)) / (2 * step)
    return A


def _roe_average_state(model, UL, UR):
    if model.name == "swe":
        hL, hR = UL[0], UR[0]
        sL, sR = math.sqrt(hL), math.sqrt(hR)
        hbar = 0.5 * (hL + hR)
        u = (sL * UL[1] / hL + sR * UR[1] / hR) / (sL + sR)
        v = (sL * UL[2] / hL + sR * UR[2] / hR) / (sL + sR)
        return np.array([hbar, hbar * u, hbar * v])
    if model.name == "burgers":
        return 0.5 * (UL + UR)
    g = model.gamma
    rhoL, rhoR = UL[0], UR[0]
    sL, sR = math.sqrt(rhoL), math.sqrt(rhoR)
    w = sL / (sL + sR)
    u = w * UL[1] / rhoL + (1 - w) * UR[1] / rhoR
    v = w * UL[2] / rhoL + (1 - w) * UR[2] / rhoR
    HL = (UL[3] + model.pressure(UL)) / rhoL
    HR = (UR[3] + model.pressure(UR)) / rhoR
    H = w * HL + (1 - w) * HR
    rho = sL * sR
    q2 = u * u + v * v
    E = (rho * H + (g - 1) * 0.5 * rho * q2) / g
    return np.array([rho, rho * u, rho * v, E])


def _shifted(model, U, shift):
    """Add a bulk velocity so eigenvalues stay clear of the entropy-fix band."""
    out = U.copy()
    if model.name == "burgers":
        out += shift
    else:
        out[..., 1] += shift * out[..., 0]
        out[..., 2] += shift * out[..., 0]
        if model.name == "euler":
            pass  # energy already includes the shifted kinetic part below
    return out


@pytest.mark.parametrize("model", [SWE, BURGERS, EULER])
def test_roe_dissipation_matches_eigendecomposition_oracle(model):
    rng = np.random.default_rng(11)
    base = _random_states(model, rng, 40)
    checked = 0
    for k in range(0, 40, 2):
        UL, UR = base[k].copy(), base[k + 1].copy()
        # moderate jump, bulk velocity keeps |lambda_min| above the fix band
        UR = 0.8 * UL + 0.2 * UR
        if model.name == "burgers":
            UL[0] += 0.8
            UR[0] += 0.8
        else:
            UL[1] += 0.9 * UL[0]
            UR[1] += 0.9 * UR[0]
            if model.name == "euler":
                UL[3] += 0.9 * UL[1] - 0.405 * UL[0]
                UR[3] += 0.9 * UR[1] - 0.405 * UR[0]
        Uhat = _roe_average_state(model, UL, UR)
        A = _fd_jacobian(lambda U: model.physical_flux(U, 0), Uhat)
        lam, V = np.linalg.eig(A)
        if np.abs(lam).min() < 0.07 * np.abs(lam).max():
            continue  # skip faces where the entropy fix would engage
        absA = (V * np.abs(lam)) @ np.linalg.inv(V)
        want = 0.5 * (model.physical_flux(UL, 0) + model.physical_flux(UR, 0)) \
            - 0.5 * absA @ (UR - UL)
        got = model.roe_flux(UL, UR, 0)
        assert np.allclose(got, want.real, rtol=1e-6, atol=1e-8), (model.name, k)
        checked += 1
    assert checked >= 10


def test_euler_supersonic_upwinds_left_flux():
    # both states supersonic rightward: Roe flux must equal the left flux exactly
    UL = EULER.conserved(1.0, 3.0, 0.2, 1.0)
    UR = EULER.conserved(0.9, 3.1, 0.1, 0.9)
    got = EULER.roe_flux(UL, UR, 0)
    want = EULER.physical_flux(UL, 0)
    assert np.allclose(got, want, rtol=1e-12)


def test_harten_hyman_fix_values():
    lam = np.array([-1.0, 0.001, 1.0])
    fixed = _harten_hyman(lam)
    assert fixed[0] == 1.0 and fixed[2] == 1.0
    assert fixed[1] == pytest.approx((0.001 ** 2 + 0.05 ** 2) / 0.1)
    assert np.all(_harten_hyman(np.zeros(3)) == 0.0)


def test_harten_hyman_lower_bound():
    rng = np.random.default_rng(5)
    lam = rng.uniform(-2, 2, (100, 4))
    fixed = _harten_hyman(lam)
    assert np.all(fixed >= np.abs(lam) - 1e-15)


# ---------------------------------------------------------------------------
# boundary ghost states
# ---------------------------------------------------------------------------

def test_ghost_slip_wall_mirrors_normal_momentum():
    U = np.array([[1.0, 0.3, 0.1]])
    gx = ghost_state(SLIP_WALL, U, 0, SWE)
    assert np.allclose(gx, [[1.0, -0.3, 0.1]])
    gy = ghost_state(SLIP_WALL, U, 1, SWE)
    assert np.allclose(gy, [[1.0, 0.3, -0.1]])
    # involution
    assert np.allclose(ghost_state(SLIP_WALL, gx, 0, SWE), U)


def test_ghost_dirichlet_neumann():
    U = np.array([[0.25, -0.5]])
    assert np.allclose(ghost_state(DIRICHLET, U, 0, BURGERS), -U)
    assert np.allclose(ghost_state(NEUMANN, U, 1, BURGERS), U)


def test_ghost_interface_rejected():
    with pytest.raises(InternalError):
        ghost_state(INTERFACE, np.zeros((1, 2)), 0, BURGERS)


def test_euler_slip_wall():
    U = EULER.conserved(1.0, 0.4, -0.2, 0.7)
    g = ghost_state(SLIP_WALL, U, 1, EULER)
    assert np.allclose(g, EULER.conserved(1.0, 0.4, 0.2, 0.7))


# ---------------------------------------------------------------------------
# state validation
# ---------------------------------------------------------------------------

def test_swe_check_state_negative_depth():
    U = np.ones((2, 2, 3))
    U[1, 0, 0] = -0.1
    with pytest.raises(StateError) as err:
        SWE.check_state(U)
    assert err.value.cell == (1, 0)


def test_euler_check_state_negative_pressure():
    U = np.tile(EULER.conserved(1.0, 1.0, 0.0, 1.0), (3, 1))
    U[2, 3] = 0.3  # below the kinetic energy floor of 0.5
    with pytest.raises(StateError):
        EULER.check_state(U)


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------

def test_swe_initial_condition():
    g = build_grid(50, 50, SWE.defaults.bounds, n_vars=3)
    U = initial_condition(SWE, g, ParamSet())
    X, Y = g.centroids()
    assert np.allclose(U[..., 0], 1.0 + 0.125 * np.exp(-((X - 1) ** 2) - (Y - 1) ** 2))
    assert np.all(U[..., 1:] == 0.0)
    assert U[..., 0].max() <= 1.125
    assert U[..., 0].min() >= 1.0


def test_burgers_initial_condition():
    g = build_grid(40, 40, BURGERS.defaults.bounds, n_vars=2)
    U = initial_condition(BURGERS, g, ParamSet(diffusion=1e-3))
    assert np.array_equal(U[..., 0], U[..., 1])
    X, Y = g.centroids()
    k = np.unravel_index(np.argmax(U[..., 0]), X.shape)
    assert abs(X[k] + 0.5) <= g.dx and abs(Y[k] + 0.4) <= g.dy
    assert U[..., 0].max() == pytest.approx(
        0.5 * np.exp((-((X[k] + 0.5) ** 2) - (Y[k] + 0.4) ** 2) / 0.075))


def test_initial_condition_warns_off_canonical_bounds():
    g = build_grid(10, 10, (0.0, 1.0, 0.0, 1.0), n_vars=3)
    with pytest.warns(UserWarning):
        initial_condition(SWE, g, ParamSet())
    g2 = build_grid(10, 10, SWE.defaults.bounds, n_vars=3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        initial_condition(SWE, g2, ParamSet())


# ---------------------------------------------------------------------------
# Euler four-shock quadrant states
# ---------------------------------------------------------------------------

def test_four_shock_matches_published_configuration():
    st = four_shock_states(1.4, 1.5, 0.0, 0.0, 1.5, 0.029)
    rho, u, v, p = st["ul"]
    assert rho == pytest.approx(0.5323, abs=2e-3)
    assert u == pytest.approx(1.206, abs=2e-3)
    assert v == 0.0
    assert p == pytest.approx(0.3, abs=2e-3)
    rho, u, v, p = st["ll"]
    assert rho == pytest.approx(0.138, abs=2e-3)
    assert u == pytest.approx(1.206, abs=2e-3)
    assert v == pytest.approx(1.206, abs=2e-3)
    rho, u, v, p = st["lr"]
    assert rho == pytest.approx(0.5323, abs=2e-3)
    assert u == 0.0
    assert v == pytest.approx(1.206, abs=2e-3)


@pytest.mark.parametrize("p_ur", [0.5, 0.875, 1.125, 1.5])
def test_four_shock_rankine_hugoniot_residuals(p_ur):
    st = four_shock_states(1.4, 1.5, 0.0, 0.0, p_ur, 0.029)
    checks = [
        (st["ul"], st["ur"], 0),
        (st["ll"], st["ul"], 1),
        (st["ll"], st["lr"], 0),
        (st["lr"], st["ur"], 1),
    ]
    for a, b, axis in checks:
        assert rankine_hugoniot_residual(a, b, axis, 1.4) <= 1e-10


@pytest.mark.parametrize("p_ur", [0.5, 1.0, 1.5])
def test_four_shock_speeds_negative(p_ur):
    st = four_shock_states(1.4, 1.5, 0.0, 0.0, p_ur, 0.029)

    def speed(prim_a, prim_b, axis):
        (ra, ua, va, _), (rb, ub, vb, _) = prim_a, prim_b
        una, unb = (ua, va)[axis], (ub, vb)[axis]
        return (ra * una - rb * unb) / (ra - rb)

    assert speed(st["ul"], st["ur"], 0) < 0.0
    assert speed(st["ll"], st["ul"], 1) < 0.0
    assert speed(st["ll"], st["lr"], 0) < 0.0
    assert speed(st["lr"], st["ur"], 1) < 0.0


def test_four_shock_degenerate_equal_pressure():
    st = four_shock_states(1.4, 1.5, 0.0, 0.0, 0.029, 0.029)
    for key in ("ur", "ul", "ll", "lr"):
        assert st[key] == (1.5, 0.0, 0.0, 0.029)


def test_four_shock_invalid_pressure_order():
    with pytest.raises(ConfigurationError):
        four_shock_states(1.4, 1.5, 0.0, 0.0, 0.01, 0.029)


def test_euler_initial_condition_quadrants():
    g = build_grid(50, 50, EULER.defaults.bounds, n_vars=4)
    U = initial_condition(EULER, g, make_params("euler", 1.5))
    st = four_shock_states(1.4, 1.5, 0.0, 0.0, 1.5, 0.029)
    # probe one centroid per quadrant
    X, Y = g.centroids()
    for (qx, qy), key in [((0.9, 0.9), "ur"), ((0.1, 0.9), "ul"),
                          ((0.1, 0.1), "ll"), ((0.9, 0.1), "lr")]:
        i = int(np.argmin(np.abs(g.x_centers() - qx)))
        j = int(np.argmin(np.abs(g.y_centers() - qy)))
        assert np.allclose(U[i, j], EULER.conserved(*st[key]))


def test_get_model_and_params():
    assert get_model("swe").name == "swe"
    assert get_model("euler", gamma=1.4).gamma == 1.4
    with pytest.raises(ConfigurationError):
        get_model("navier")
    assert make_params("swe", -2.5) == ParamSet(mu=-2.5)
    assert make_params("burgers", 1e-4).diffusion == 1e-4
    assert make_params("euler", 0.875).p_ur == 0.875
