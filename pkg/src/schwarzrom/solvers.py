"""Nonlinear solvers for one implicit backward-Euler step on a subdomain.

Three entry points, all operating on a ghost-framed state array whose
transmitted (interface) ghost values are held fixed for the duration of the
solve:

- :func:`newton_solve` drives the full-order residual to zero with an exact
  sparse Newton iteration,
- :func:`lspg_solve` minimises the 2-norm of the full residual over a linear
  trial subspace (Gauss-Newton on the reduced coordinates),
- :func:`lspg_solve_collocated` does the same with the residual restricted to
  a precomputed collocation plan.

Each returns a :class:`NonlinearSolveReport`; the iteration count is the
number of accepted state updates.  The frame argument is updated in place so
the caller keeps both the converged physical block and the ghost values the
solve was performed against.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh
from scipy.sparse.linalg import splu

from .exceptions import ConfigurationError, SolverError
from .fv import CollocationPlan, ResidualContext, residual_jacobian, time_residual

NEWTON_TOL_ABS = 1e-12
NEWTON_TOL_REL = 1e-10
NEWTON_MAX_ITER = 20
LSPG_TOL_UPDATE = 1e-8
LSPG_MAX_ITER = 20


@dataclass(frozen=True)
class NonlinearSolveReport:
    """Outcome of one nonlinear subdomain solve.

    ``history`` records the residual norm at the start of each iteration,
    beginning with the initial guess, so ``iterations == len(history) - 1``
    for a converged Newton solve.
    """

    converged: bool
    iterations: int
    residual_norm: float
    history: tuple


def _set_physical(frame: np.ndarray, sub, flat: np.ndarray) -> None:
    frame[1:-1, 1:-1] = flat.reshape(sub.nx, sub.ny, sub.n_vars)


def newton_solve(ctx: ResidualContext, frame: np.ndarray, *,
                 tol_abs: float = NEWTON_TOL_ABS,
                 tol_rel: float = NEWTON_TOL_REL,
                 max_iter: int = NEWTON_MAX_ITER) -> NonlinearSolveReport:
    """Solve the implicit step residual to machine-level accuracy.

    Convergence requires the residual 2-norm to fall below
    ``max(tol_abs, tol_rel * ||r0||)``.  Raises :class:`SolverError` if the
    limit on iterations is hit or the Jacobian factorisation fails.
    """
    sub = ctx.sub
    r = time_residual(ctx, frame)
    history = [float(np.linalg.norm(r))]
    target = max(tol_abs, tol_rel * history[0])
    iterations = 0
    while history[-1] > target:
        report = NonlinearSolveReport(False, iterations, history[-1], tuple(history))
        if iterations >= max_iter:
            raise SolverError(
                f"Newton did not converge in {max_iter} iterations "
                f"(residual {history[-1]:.3e}, target {target:.3e})",
                report=report)
        J = residual_jacobian(ctx, frame).tocsc()
        try:
            du = splu(J).solve(-r)
        except RuntimeError as exc:
            raise SolverError(f"Jacobian factorisation failed: {exc}",
                              report=report) from exc
        frame[1:-1, 1:-1] += du.reshape(sub.nx, sub.ny, sub.n_vars)
        iterations += 1
        r = time_residual(ctx, frame)
        history.append(float(np.linalg.norm(r)))
    return NonlinearSolveReport(True, iterations, history[-1], tuple(history))


def _solve_normal(W: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Minimise ||W dq + r|| via the normal equations.

    Uses a Cholesky factorisation, falling back to a symmetric
    eigendecomposition when that fails; a numerically singular system raises
    :class:`SolverError` carrying a condition-number estimate.
    """
    A = W.T @ W
    b = -(W.T @ r)
    try:
        return cho_solve(cho_factor(A), b)
    except np.linalg.LinAlgError:
        pass
    w, V = eigh(A)
    wmax = float(w[-1])
    if wmax <= 0.0 or float(w[0]) <= 1e-14 * wmax:
        cond = np.inf if w[0] <= 0.0 else wmax / float(w[0])
        raise SolverError("reduced normal equations are numerically singular "
                          f"(condition estimate {cond:.2e})")
    return V @ ((V.T @ b) / w)


def _check_reduced_shapes(sub, basis, center, q0):
    if basis.ndim != 2 or basis.shape[0] != sub.n_dof:
        raise ConfigurationError(
            f"basis shape {basis.shape} does not match subdomain with "
            f"{sub.n_dof} degrees of freedom")
    if center.shape != (sub.n_dof,):
        raise ConfigurationError(f"center shape {center.shape} does not match "
                                 f"({sub.n_dof},)")
    if q0.shape != (basis.shape[1],):
        raise ConfigurationError(f"initial reduced state shape {q0.shape} does "
                                 f"not match basis with {basis.shape[1]} modes")


def _gauss_newton(evaluate, set_state, q0, tol_update, max_iter):
    q = np.array(q0, dtype=float)
    history = []
    for it in range(max_iter):
        r, W = evaluate(q)
        history.append(float(np.linalg.norm(r)))
        try:
            dq = _solve_normal(W, r)
        except SolverError as exc:
            raise SolverError(str(exc), report=NonlinearSolveReport(
                False, it, history[-1], tuple(history))) from None
        q = q + dq
        if float(np.linalg.norm(dq)) <= tol_update:
            set_state(q)
            return q, NonlinearSolveReport(True, it + 1, history[-1],
                                           tuple(history))
    raise SolverError(
        f"reduced solve did not converge in {max_iter} iterations",
        report=NonlinearSolveReport(False, max_iter, history[-1],
                                    tuple(history)))


def lspg_solve(ctx: ResidualContext, frame: np.ndarray, basis: np.ndarray,
               center: np.ndarray, q0: np.ndarray, *,
               tol_update: float = LSPG_TOL_UPDATE,
               max_iter: int = LSPG_MAX_ITER):
    """Least-squares Petrov-Galerkin step over ``u = center + basis @ q``.

    Returns ``(q, report)`` and leaves the reconstructed state in ``frame``.
    Gauss-Newton stops once the reduced update norm drops to ``tol_update``.
    """
    sub = ctx.sub
    _check_reduced_shapes(sub, basis, center, q0)

    def set_state(q):
        _set_physical(frame, sub, center + basis @ q)

    def evaluate(q):
        set_state(q)
        r = time_residual(ctx, frame)
        W = residual_jacobian(ctx, frame) @ basis
        return r, W

    return _gauss_newton(evaluate, set_state, q0, tol_update, max_iter)


def lspg_solve_collocated(plan: CollocationPlan, frame: np.ndarray,
                          basis: np.ndarray, center: np.ndarray,
                          q0: np.ndarray, *,
                          tol_update: float = LSPG_TOL_UPDATE,
                          max_iter: int = LSPG_MAX_ITER):
    """LSPG step using only the residual rows selected by ``plan``."""
    ctx = plan.ctx
    sub = ctx.sub
    _check_reduced_shapes(sub, basis, center, q0)
    if plan.n_rows < basis.shape[1]:
        raise ConfigurationError(
            f"collocation plan supplies {plan.n_rows} residual rows for "
            f"{basis.shape[1]} modes; the least-squares step is underdetermined")

    def set_state(q):
        _set_physical(frame, sub, center + basis @ q)

    def evaluate(q):
        set_state(q)
        r, J = plan.residual_and_jacobian(frame)
        return r, J @ basis

    return _gauss_newton(evaluate, set_state, q0, tol_update, max_iter)
