"""Extended Kalman filtering over the augmented vehicle-plus-field state.

predict exploits the transition's block structure (the inducing block of the
Jacobian is the identity), so a step costs O(L^2) rather than O(L^3). update
uses the Joseph covariance form, expanded into rank-2 terms for the same
reason. Covariances are re-symmetrized after every step.

Separate kinematic-only steps serve two purposes: the plain CV baseline, and
filtering a vehicle against a frozen field belief (the field's uncertainty
then enters as input noise instead of being estimated).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import FieldBelief, InducingGrid, fic_variance, input_mean, input_variance, prior_belief
from .kernels import cross_covariance_grad
from .models import KINEMATIC_DIM, MotionModel, ObservationModel, transition_blocks
from .validation import NumericalError, check_finite_array


@dataclass
class AugmentedBelief:
    """Gaussian belief over [x; ub'] with a step counter for error context."""

    mean: np.ndarray
    covariance: np.ndarray
    step: int = 0

    @property
    def kinematic_mean(self) -> np.ndarray:
        return self.mean[:KINEMATIC_DIM]

    def field_belief(self, drift_var: float = 0.0) -> FieldBelief:
        """View of the inducing-state marginal as a FieldBelief (copies)."""
        k = KINEMATIC_DIM
        return FieldBelief(self.mean[k:].copy(), self.covariance[k:, k:].copy(), drift_var)


def augmented_prior(grid: InducingGrid, x0, p0_kin, drift_var: float = 0.0) -> AugmentedBelief:
    """Fresh belief: kinematic (x0, p0_kin), field at its whitened prior, zero cross terms."""
    x0 = check_finite_array("x0", x0, shape=(KINEMATIC_DIM,))
    p0_kin = check_finite_array("p0_kin", p0_kin, shape=(KINEMATIC_DIM, KINEMATIC_DIM))
    fb = prior_belief(grid, drift_var)
    d = KINEMATIC_DIM + grid.state_dim
    mean = np.zeros(d)
    mean[:KINEMATIC_DIM] = x0
    cov = np.zeros((d, d))
    cov[:KINEMATIC_DIM, :KINEMATIC_DIM] = p0_kin
    cov[KINEMATIC_DIM:, KINEMATIC_DIM:] = fb.covariance
    return AugmentedBelief(mean, cov, step=0)


def predict(belief: AugmentedBelief, model: MotionModel, grid: InducingGrid,
            drift_var: float = 0.0) -> AugmentedBelief:
    """EKF time update for the augmented model.

    With J = [[A, B], [0, I]] the covariance propagates as

        [[A Pxx A' + A Pxf B' + (A Pxf B')' + B Pff B' + lam G G',  A Pxf + B Pff],
         [(A Pxf + B Pff)',                                         Pff + Sigma ]]

    which never touches an O(L^3) product.
    """
    k = KINEMATIC_DIM
    blocks = transition_blocks(model, grid, belief.mean)
    mean = belief.mean.copy()
    mean[:k] = model.F @ belief.mean[:k] + model.G @ blocks.u

    pxx = belief.covariance[:k, :k]
    pxf = belief.covariance[:k, k:]
    pff = belief.covariance[k:, k:]
    L = grid.n_points

    # With C = k_row kron I2, B = G C. All products with C reduce to a single
    # contraction over the L axis instead of building the (2, 2L) matrix.
    pxf_ct = np.einsum("ilc,l->ic", pxf.reshape(k, L, 2), blocks.k_row)        # Pxf C^T (4, 2)
    cpff = _kron_row_apply(blocks.k_row, pff)                                  # C Pff (2, 2L)
    cpc = np.tensordot(blocks.k_row, cpff.T.reshape(L, 2, 2), axes=(0, 0))     # C Pff C^T (2, 2)

    axa = blocks.A @ pxx @ blocks.A.T
    apb = blocks.A @ pxf_ct @ model.G.T                                        # A Pxf B^T
    bpb = model.G @ cpc @ model.G.T                                            # B Pff B^T

    d = belief.mean.size
    cov = np.empty((d, d))
    cov[:k, :k] = axa + apb + apb.T + bpb + blocks.lam * (model.G @ model.G.T)
    cov[:k, k:] = blocks.A @ pxf + model.G @ cpff
    cov[k:, :k] = cov[:k, k:].T
    cov[k:, k:] = pff if drift_var == 0.0 else pff + drift_var * np.eye(2 * L)

    cov = 0.5 * (cov + cov.T)
    step = belief.step + 1
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise NumericalError("non-finite belief after predict", step=step)
    return AugmentedBelief(mean, cov, step=step)


def _kron_row_apply(k_row: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """(k_row kron I2) @ mat for mat with 2L rows, shape (2, mat.shape[1])."""
    L = k_row.size
    return np.einsum("l,lcj->cj", k_row, mat.reshape(L, 2, -1))


def update(belief: AugmentedBelief, obs_model: ObservationModel, y) -> AugmentedBelief:
    """Linear measurement update, Joseph covariance form.

    The Joseph product is expanded as P - K H P - (K H P)' + K S K', which is
    algebraically identical and keeps the cost at O(d^2).
    """
    y = check_finite_array("y", y, shape=(2,))
    H, R = obs_model.H, obs_model.R
    P = belief.covariance
    pht = P @ H.T
    S = H @ pht + R
    try:
        s_chol = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"innovation covariance not positive definite: {exc}",
                             step=belief.step) from exc
    gain = np.linalg.solve(S.T, pht.T).T  # P H^T S^-1 via one small solve
    innovation = y - H @ belief.mean
    mean = belief.mean + gain @ innovation
    khp = gain @ pht.T
    cov = P - khp - khp.T + gain @ S @ gain.T
    cov = 0.5 * (cov + cov.T)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise NumericalError("non-finite belief after update", step=belief.step)
    return AugmentedBelief(mean, cov, step=belief.step)


def reinitialize_vehicle(belief: AugmentedBelief, x0, p0_kin) -> AugmentedBelief:
    """Start a new vehicle against the belief's current field.

    The kinematic block is reset to (x0, p0_kin) and vehicle-field cross
    covariances are zeroed; the field marginal is preserved bit-for-bit, which
    is what carries the learned input from one vehicle to the next.
    """
    x0 = check_finite_array("x0", x0, shape=(KINEMATIC_DIM,))
    p0_kin = check_finite_array("p0_kin", p0_kin, shape=(KINEMATIC_DIM, KINEMATIC_DIM))
    k = KINEMATIC_DIM
    mean = belief.mean.copy()
    cov = belief.covariance.copy()
    mean[:k] = x0
    cov[:k, :k] = 0.5 * (p0_kin + p0_kin.T)
    cov[:k, k:] = 0.0
    cov[k:, :k] = 0.0
    return AugmentedBelief(mean, cov, step=0)


# ---------------------------------------------------------------------------
# Kinematic-only filtering (CV baseline and frozen-field passes)
# ---------------------------------------------------------------------------

@dataclass
class KinematicBelief:
    mean: np.ndarray
    covariance: np.ndarray
    step: int = 0


def cv_predict(belief: KinematicBelief, model: MotionModel, q_kin: np.ndarray) -> KinematicBelief:
    """Plain linear CV prediction with fixed process noise."""
    mean = model.F @ belief.mean
    cov = model.F @ belief.covariance @ model.F.T + q_kin
    return KinematicBelief(mean, 0.5 * (cov + cov.T), belief.step + 1)


def frozen_field_predict(belief: KinematicBelief, model: MotionModel, grid: InducingGrid,
                         field: FieldBelief) -> KinematicBelief:
    """EKF prediction against a fixed field belief.

    The field is not estimated: its mean supplies the input and its full
    predictive covariance at z (grid uncertainty plus residual) is folded into
    the process noise. With the prior field this reproduces the CV baseline
    exactly, since the predictive input covariance is then sigma_f_sq * I.
    """
    z = belief.mean[:2]
    u = input_mean(grid, field.mean, z)
    grads = cross_covariance_grad(grid.params, z, grid.points)
    du_dz = field.mean.reshape(-1, 2).T @ grads
    A = model.F.copy()
    A[:, :2] += model.G @ du_dz
    c_u = input_variance(grid, field, z)
    mean = model.F @ belief.mean + model.G @ u
    cov = A @ belief.covariance @ A.T + model.G @ c_u @ model.G.T
    return KinematicBelief(mean, 0.5 * (cov + cov.T), belief.step + 1)


def kinematic_update(belief: KinematicBelief, obs_model: ObservationModel, y) -> KinematicBelief:
    """Joseph-form measurement update on the 4-dimensional state."""
    tmp = AugmentedBelief(belief.mean, belief.covariance, belief.step)
    out = update(tmp, obs_model, y)
    return KinematicBelief(out.mean, out.covariance, belief.step)
