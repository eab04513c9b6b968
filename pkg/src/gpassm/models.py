"""Concrete model matrices: CV dynamics, position observation, augmented transition.

State ordering is (p_x, p_y, v_x, v_y); the augmented state appends the 2L
whitened inducing components. The transition is nonlinear only through the
kernel row's dependence on the predicted-from position, so its Jacobian has
the block form

    [[ F + G (du/dz) D,  G (K(z, grid) kron I2) ],
     [ 0,                I                      ]]

with z = D x the position of the previous state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import InducingGrid, fic_variance
from .kernels import cross_covariance, cross_covariance_grad
from .validation import check_positive

KINEMATIC_DIM = 4


@dataclass(frozen=True)
class MotionModel:
    """Constant-velocity transition F (4x4) and input gain G (4x2)."""

    F: np.ndarray
    G: np.ndarray
    sampling_interval: float


def cv_matrices(sampling_interval: float) -> MotionModel:
    """CV model blocks: F = [[1, T], [0, 1]] kron I2 and G = [[T^2/2], [T]] kron I2."""
    T = check_positive("sampling_interval", sampling_interval)
    F = np.kron(np.array([[1.0, T], [0.0, 1.0]]), np.eye(2))
    G = np.kron(np.array([[T * T / 2.0], [T]]), np.eye(2))
    return MotionModel(F, G, T)


@dataclass(frozen=True)
class ObservationModel:
    """Linear position observation y = H x + e with e ~ N(0, R)."""

    H: np.ndarray
    R: np.ndarray


def position_observation(state_dim: int, meas_var: float) -> ObservationModel:
    """H = [I2 0 ... 0] selecting position out of a state_dim state; R = meas_var * I2."""
    check_positive("meas_var", meas_var)
    if state_dim < 2:
        raise ValueError(f"state_dim must be at least 2, got {state_dim}")
    H = np.zeros((2, state_dim))
    H[:2, :2] = np.eye(2)
    return ObservationModel(H, meas_var * np.eye(2))


def position_selector() -> np.ndarray:
    """D = [I2 0]: extracts the position the input field is evaluated at."""
    D = np.zeros((2, KINEMATIC_DIM))
    D[:2, :2] = np.eye(2)
    return D


@dataclass(frozen=True)
class TransitionBlocks:
    """Per-step pieces of the augmented transition, evaluated at one state.

    A is the 4x4 kinematic Jacobian block, k_row the kernel row at z, u the
    predicted input, and lam the residual input variance lambda(z).
    """

    z: np.ndarray
    u: np.ndarray
    k_row: np.ndarray
    A: np.ndarray
    lam: float


def transition_blocks(model: MotionModel, grid: InducingGrid, aug_mean: np.ndarray) -> TransitionBlocks:
    aug_mean = np.asarray(aug_mean, dtype=float)
    x = aug_mean[:KINEMATIC_DIM]
    field_mean = aug_mean[KINEMATIC_DIM:].reshape(-1, 2)
    z = x[:2]
    k_row = cross_covariance(grid.params, z, grid.points)
    u = k_row @ field_mean
    # du/dz = sum_l ub'_l grad_k(z, xi_l)^T, a 2x2 coupling of input to position.
    grads = cross_covariance_grad(grid.params, z, grid.points)
    du_dz = field_mean.T @ grads
    A = model.F.copy()
    A[:, :2] += model.G @ du_dz
    lam = fic_variance(grid, z)
    return TransitionBlocks(z=z, u=u, k_row=k_row, A=A, lam=lam)


def augmented_transition_mean(model: MotionModel, grid: InducingGrid,
                              aug_mean: np.ndarray) -> np.ndarray:
    """Transition mean: x+ = F x + G u(z) with z = D x; inducing components unchanged."""
    aug_mean = np.asarray(aug_mean, dtype=float)
    blocks = transition_blocks(model, grid, aug_mean)
    out = aug_mean.copy()
    out[:KINEMATIC_DIM] = model.F @ aug_mean[:KINEMATIC_DIM] + model.G @ blocks.u
    return out


def augmented_transition_jacobian(model: MotionModel, grid: InducingGrid,
                                  aug_mean: np.ndarray) -> np.ndarray:
    """Dense (4+2L) x (4+2L) Jacobian of the augmented transition."""
    blocks = transition_blocks(model, grid, aug_mean)
    d = KINEMATIC_DIM + grid.state_dim
    jac = np.eye(d)
    jac[:KINEMATIC_DIM, :KINEMATIC_DIM] = blocks.A
    jac[:KINEMATIC_DIM, KINEMATIC_DIM:] = model.G @ np.kron(blocks.k_row[None, :], np.eye(2))
    return jac


def augmented_process_noise(model: MotionModel, grid: InducingGrid,
                            drift_var: float, z) -> np.ndarray:
    """blockdiag(lambda(z) G G^T, drift_var I) for the augmented state."""
    d = KINEMATIC_DIM + grid.state_dim
    q = np.zeros((d, d))
    q[:KINEMATIC_DIM, :KINEMATIC_DIM] = fic_variance(grid, z) * (model.G @ model.G.T)
    if drift_var:
        q[KINEMATIC_DIM:, KINEMATIC_DIM:] = drift_var * np.eye(grid.state_dim)
    return q


def cv_process_noise(model: MotionModel, accel_var: float) -> np.ndarray:
    """Process noise accel_var * G G^T for the plain CV model."""
    return accel_var * (model.G @ model.G.T)
