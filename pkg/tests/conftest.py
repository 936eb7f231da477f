"""Shared test helpers."""

import numpy as np

from schwarzrom.mesh import build_grid, decompose


def random_states(model, rng, n):
    """Physically admissible random conserved states, shape (n, n_vars)."""
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


def single_subdomain(nx, ny, bounds, n_vars):
    """A 1x1 decomposition: one subdomain covering the whole grid."""
    grid = build_grid(nx, ny, bounds, n_vars)
    return decompose(grid, 1, 1, 0)[0]


def random_frame(model, sub, rng):
    """Frame filled with admissible random states everywhere (ghosts included)."""
    shape = sub.frame_shape
    flat = random_states(model, rng, shape[0] * shape[1])
    return flat.reshape(shape)
