"""Slow reference implementations for cross-checking the structured filter.

Everything here is deliberately literal: scalar kernel evaluations in loops,
explicit Kronecker products, full dense Jacobians, matrix inverses instead of
factorizations, and the textbook (I - KH) P (I - KH)' + K R K' update. Nothing
in the package's runtime paths imports this module; it exists for tests and
the oracle-check command.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import InducingGrid, condition_on_input_observation, prior_belief
from .filtering import AugmentedBelief, augmented_prior, predict, update
from .kernels import KernelParams, kernel_eval, kernel_grad
from .models import (KINEMATIC_DIM, MotionModel, ObservationModel, augmented_transition_jacobian,
                     augmented_transition_mean, cv_matrices, position_observation,
                     position_selector)


def fd_jacobian(func, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of func at x, one column per input dimension."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(func(x), dtype=float)
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        forward = x.copy()
        backward = x.copy()
        forward[j] += step
        backward[j] -= step
        jac[:, j] = (np.asarray(func(forward)) - np.asarray(func(backward))) / (2.0 * step)
    return jac


# ---------------------------------------------------------------------------
# Dense assembly of the augmented model
# ---------------------------------------------------------------------------

def dense_kernel_row(params: KernelParams, z, points) -> np.ndarray:
    return np.array([kernel_eval(params, z, xi) for xi in points])


def dense_gram(params: KernelParams, points) -> np.ndarray:
    n = len(points)
    gram = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            gram[i, j] = kernel_eval(params, points[i], points[j])
    return gram + params.jitter * np.eye(n)


def dense_residual_var(grid: InducingGrid, z) -> float:
    """lambda(z) = k(z, z) - k_row inv(Kuu) k_row', via an explicit inverse."""
    krow = dense_kernel_row(grid.params, z, grid.points)
    kuu_inv = np.linalg.inv(dense_gram(grid.params, grid.points))
    return float(kernel_eval(grid.params, z, z) - krow @ kuu_inv @ krow)


def dense_transition(model: MotionModel, grid: InducingGrid, aug_state: np.ndarray) -> np.ndarray:
    x = aug_state[:KINEMATIC_DIM]
    f = aug_state[KINEMATIC_DIM:]
    krow = dense_kernel_row(grid.params, x[:2], grid.points)
    c = np.kron(krow[None, :], np.eye(2))
    out = aug_state.copy()
    out[:KINEMATIC_DIM] = model.F @ x + model.G @ (c @ f)
    return out


def dense_jacobian(model: MotionModel, grid: InducingGrid, aug_state: np.ndarray) -> np.ndarray:
    x = aug_state[:KINEMATIC_DIM]
    f = aug_state[KINEMATIC_DIM:]
    z = x[:2]
    krow = dense_kernel_row(grid.params, z, grid.points)
    du_dz = np.zeros((2, 2))
    for l, xi in enumerate(grid.points):
        pair = f[2 * l:2 * l + 2]
        du_dz += np.outer(pair, kernel_grad(grid.params, z, xi))
    d = aug_state.size
    jac = np.eye(d)
    jac[:KINEMATIC_DIM, :KINEMATIC_DIM] = model.F + model.G @ du_dz @ position_selector()
    jac[:KINEMATIC_DIM, KINEMATIC_DIM:] = model.G @ np.kron(krow[None, :], np.eye(2))
    return jac


def dense_process_noise(model: MotionModel, grid: InducingGrid, drift_var: float,
                        z) -> np.ndarray:
    d = KINEMATIC_DIM + grid.state_dim
    q = np.zeros((d, d))
    q[:KINEMATIC_DIM, :KINEMATIC_DIM] = dense_residual_var(grid, z) * (model.G @ model.G.T)
    q[KINEMATIC_DIM:, KINEMATIC_DIM:] = drift_var * np.eye(grid.state_dim)
    return q


def dense_predict(mean: np.ndarray, cov: np.ndarray, model: MotionModel, grid: InducingGrid,
                  drift_var: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    jac = dense_jacobian(model, grid, mean)
    q = dense_process_noise(model, grid, drift_var, mean[:2])
    return dense_transition(model, grid, mean), jac @ cov @ jac.T + q


def dense_update(mean: np.ndarray, cov: np.ndarray, obs_model: ObservationModel,
                 y) -> tuple[np.ndarray, np.ndarray]:
    H, R = obs_model.H, obs_model.R
    S = H @ cov @ H.T + R
    gain = cov @ H.T @ np.linalg.inv(S)
    mean_new = mean + gain @ (np.asarray(y, dtype=float) - H @ mean)
    i_kh = np.eye(mean.size) - gain @ H
    cov_new = i_kh @ cov @ i_kh.T + gain @ R @ gain.T
    return mean_new, cov_new


# ---------------------------------------------------------------------------
# Batch sparse-GP posterior over direct input observations
# ---------------------------------------------------------------------------

def batch_fic_posterior(grid: InducingGrid,
                        observations: list[tuple[np.ndarray, np.ndarray, float]],
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Whitened posterior from all (z, u_obs, noise_var) observations at once.

    Each observation sees the inducing state through C_i = k_row(z_i) kron I2
    with effective noise (lambda(z_i) + noise_var_i) I2, the residual term
    making observations conditionally independent given the inducing values.
    Posterior precision is Kuu_tilde + sum C_i' R_i^-1 C_i.
    """
    kuu = np.kron(dense_gram(grid.params, grid.points), np.eye(2))
    precision = kuu.copy()
    info = np.zeros(2 * len(grid.points))
    for z, u_obs, noise_var in observations:
        krow = dense_kernel_row(grid.params, z, grid.points)
        c = np.kron(krow[None, :], np.eye(2))
        total_var = dense_residual_var(grid, z) + noise_var
        precision += c.T @ c / total_var
        info += c.T @ np.asarray(u_obs, dtype=float) / total_var
    cov = np.linalg.inv(precision)
    cov = 0.5 * (cov + cov.T)
    return cov @ info, cov


# ---------------------------------------------------------------------------
# Check suite behind the oracle-check command
# ---------------------------------------------------------------------------

@dataclass
class OracleCheck:
    name: str
    passed: bool
    detail: str


def _toy_grid(n_x: int = 2, n_y: int = 2, spacing: float = 1.0) -> InducingGrid:
    params = KernelParams(0.05, 0.5)
    xs = np.arange(n_x) * spacing
    ys = np.arange(n_y) * spacing
    points = np.array([(x, y) for y in ys for x in xs], dtype=float)
    return InducingGrid(params, points, spacing=spacing)


def _check_jacobian(rng: np.random.Generator) -> OracleCheck:
    grid = _toy_grid(3, 2)
    model = cv_matrices(0.5)
    worst = 0.0
    for _ in range(10):
        state = np.concatenate([rng.uniform(-1.0, 2.0, size=2), rng.normal(0.0, 1.0, size=2),
                                rng.normal(0.0, 1.0, size=grid.state_dim)])
        analytic = augmented_transition_jacobian(model, grid, state)
        numeric = fd_jacobian(lambda s: augmented_transition_mean(model, grid, s), state)
        err = np.max(np.abs(analytic - numeric)) / max(np.max(np.abs(numeric)), 1.0)
        worst = max(worst, err)
    return OracleCheck("jacobian-vs-finite-differences", worst < 1e-5,
                       f"max relative error {worst:.3e} (tolerance 1e-5)")


def _check_dense_filter(rng: np.random.Generator) -> OracleCheck:
    grid = _toy_grid(2, 2)
    model = cv_matrices(0.5)
    obs = position_observation(KINEMATIC_DIM + grid.state_dim, 1.0)
    x0 = np.array([0.3, -0.2, 1.0, 0.8])
    p0 = np.diag([0.2, 0.2, 0.25, 0.25])
    belief = augmented_prior(grid, x0, p0)
    mean, cov = belief.mean.copy(), belief.covariance.copy()
    worst_mean = worst_cov = 0.0
    for _ in range(20):
        belief = predict(belief, model, grid)
        mean, cov = dense_predict(mean, cov, model, grid)
        y = belief.mean[:2] + rng.normal(0.0, 1.0, size=2)
        belief = update(belief, obs, y)
        mean, cov = dense_update(mean, cov, obs, y)
        worst_mean = max(worst_mean, float(np.max(np.abs(belief.mean - mean))))
        worst_cov = max(worst_cov, float(np.max(np.abs(belief.covariance - cov))))
    err = max(worst_mean, worst_cov)
    return OracleCheck("structured-filter-vs-dense", err < 1e-8,
                       f"max deviation {err:.3e} over 20 steps (tolerance 1e-8)")


def _check_batch_fic(rng: np.random.Generator) -> OracleCheck:
    grid = _toy_grid(2, 2)
    observations = []
    belief = prior_belief(grid)
    for _ in range(15):
        z = rng.uniform(-0.5, 1.5, size=2)
        u_obs = rng.normal(0.0, 0.3, size=2)
        noise_var = float(rng.uniform(0.05, 0.5))
        observations.append((z, u_obs, noise_var))
        belief = condition_on_input_observation(grid, belief, z, u_obs, noise_var)
    batch_mean, batch_cov = batch_fic_posterior(grid, observations)
    err = max(float(np.max(np.abs(belief.mean - batch_mean))),
              float(np.max(np.abs(belief.covariance - batch_cov))))
    return OracleCheck("sequential-vs-batch-posterior", err < 1e-6,
                       f"max deviation {err:.3e} over 15 observations (tolerance 1e-6)")


def run_oracle_checks(seed: int = 0) -> list[OracleCheck]:
    """The three reference checks printed by the oracle-check command."""
    rng = np.random.default_rng(seed)
    return [_check_jacobian(rng), _check_dense_filter(rng), _check_batch_fic(rng)]
