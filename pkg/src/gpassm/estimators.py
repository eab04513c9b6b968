"""scikit-learn style wrappers around the filter.

GpassmTracker learns the acceleration field from measurement sequences
(fit / partial_fit, one vehicle per sequence) and then tracks new vehicles
against the frozen field (predict). CvTracker is the matching constant-
velocity baseline with the same surface. Both follow the usual estimator
conventions: __init__ only stores parameters, get_params/set_params work, and
fitted state lives in trailing-underscore attributes.

Sequences follow the concatenated-X-plus-lengths convention used by sequence
estimators elsewhere: fit(X, lengths=[n1, n2, ...]) treats X[:n1] as the
first vehicle, X[n1:n1+n2] as the second, and so on.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .field import FieldBelief, build_grid, field_table, input_mean, prior_belief
from .filtering import (KinematicBelief, augmented_prior, cv_predict, frozen_field_predict,
                        kinematic_update, predict, reinitialize_vehicle, update)
from .kernels import KernelParams
from .models import KINEMATIC_DIM, cv_matrices, cv_process_noise, position_observation
from .validation import as_points


def _split_sequences(X, lengths):
    X = as_points("X", X)
    if lengths is None:
        return [X]
    lengths = [int(n) for n in lengths]
    if any(n < 2 for n in lengths):
        raise ValueError("every sequence needs at least 2 steps")
    if sum(lengths) != X.shape[0]:
        raise ValueError(f"lengths sum to {sum(lengths)}, but X has {X.shape[0]} rows")
    out = []
    start = 0
    for n in lengths:
        out.append(X[start:start + n])
        start += n
    return out


def _initial_kinematics(seq: np.ndarray, rate: float, meas_var: float):
    """State guess from the first two measurements, with matching covariance.

    Position is the first fix (variance meas_var); velocity is the one-step
    difference, whose variance is 2 * meas_var * rate^2 per component.
    """
    x0 = np.concatenate([seq[0], (seq[1] - seq[0]) * rate])
    p0 = np.diag([meas_var, meas_var,
                  2.0 * meas_var * rate ** 2, 2.0 * meas_var * rate ** 2])
    return x0, p0


class GpassmTracker(BaseEstimator):
    """Tracker that learns a shared position-dependent acceleration field.

    Parameters
    ----------
    kernel_var, length_scale : SE kernel of the acceleration field.
    grid_spacing : lattice spacing of the inducing points.
    region : iterable of (xmin, xmax, ymin, ymax) rectangles for the inducing
        lattice, or None to grow it from the first fitted data (bounding box
        padded by one length scale).
    sampling_rate : measurement rate in Hz.
    filter_meas_var : position measurement variance assumed by the filter.
    drift_var : per-step random-walk variance on the inducing state; zero
        keeps the field static between vehicles.
    jitter : Gram-diagonal regularization; negative selects an automatic
        value proportional to kernel_var.
    """

    def __init__(self, kernel_var: float = 0.05, length_scale: float = 0.5,
                 grid_spacing: float = 1.0, region=None, sampling_rate: float = 2.0,
                 filter_meas_var: float = 1.0, drift_var: float = 0.0,
                 jitter: float = -1.0):
        self.kernel_var = kernel_var
        self.length_scale = length_scale
        self.grid_spacing = grid_spacing
        self.region = region
        self.sampling_rate = sampling_rate
        self.filter_meas_var = filter_meas_var
        self.drift_var = drift_var
        self.jitter = jitter

    # -- fitting ------------------------------------------------------------

    def fit(self, X, y=None, lengths=None):
        """Learn the field from scratch on the given sequences."""
        for attr in ("grid_", "field_mean_", "field_cov_", "n_sequences_"):
            if hasattr(self, attr):
                delattr(self, attr)
        return self.partial_fit(X, lengths=lengths)

    def partial_fit(self, X, y=None, lengths=None):
        """Fold more vehicle sequences into the current field belief."""
        sequences = _split_sequences(X, lengths)
        if not hasattr(self, "grid_"):
            self._init_state(np.vstack(sequences))
        model = cv_matrices(1.0 / self.sampling_rate)
        obs = position_observation(KINEMATIC_DIM + self.grid_.state_dim,
                                   self.filter_meas_var)
        belief = augmented_prior(self.grid_, np.zeros(KINEMATIC_DIM), np.eye(KINEMATIC_DIM),
                                 self.drift_var)
        belief.mean[KINEMATIC_DIM:] = self.field_mean_
        belief.covariance[KINEMATIC_DIM:, KINEMATIC_DIM:] = self.field_cov_
        for seq in sequences:
            if seq.shape[0] < 2:
                raise ValueError("every sequence needs at least 2 steps")
            x0, p0 = _initial_kinematics(seq, self.sampling_rate, self.filter_meas_var)
            belief = reinitialize_vehicle(belief, x0, p0)
            for k in range(1, seq.shape[0]):
                belief = predict(belief, model, self.grid_, self.drift_var)
                belief = update(belief, obs, seq[k])
            self.n_sequences_ += 1
        self.field_mean_ = belief.mean[KINEMATIC_DIM:].copy()
        self.field_cov_ = belief.covariance[KINEMATIC_DIM:, KINEMATIC_DIM:].copy()
        return self

    def _init_state(self, data: np.ndarray) -> None:
        params = KernelParams(self.kernel_var, self.length_scale, jitter=self.jitter)
        if self.region is not None:
            region = [tuple(map(float, rect)) for rect in self.region]
        else:
            pad = self.length_scale
            region = [(data[:, 0].min() - pad, data[:, 0].max() + pad,
                       data[:, 1].min() - pad, data[:, 1].max() + pad)]
        self.grid_ = build_grid(params, region, self.grid_spacing)
        fb = prior_belief(self.grid_, self.drift_var)
        self.field_mean_ = fb.mean
        self.field_cov_ = fb.covariance
        self.n_sequences_ = 0

    def _check_fitted(self):
        if not hasattr(self, "grid_"):
            raise NotFittedError("this GpassmTracker instance is not fitted yet")

    # -- inference ----------------------------------------------------------

    def predict(self, X, lengths=None):
        """Track sequences against the frozen learned field.

        Returns position estimates with the same shape as X. The field belief
        is not modified, so predict may be called any number of times.
        """
        self._check_fitted()
        sequences = _split_sequences(X, lengths)
        model = cv_matrices(1.0 / self.sampling_rate)
        obs = position_observation(KINEMATIC_DIM, self.filter_meas_var)
        field = FieldBelief(self.field_mean_, self.field_cov_, self.drift_var)
        outputs = []
        for seq in sequences:
            if seq.shape[0] < 2:
                raise ValueError("every sequence needs at least 2 steps")
            x0, p0 = _initial_kinematics(seq, self.sampling_rate, self.filter_meas_var)
            kin = KinematicBelief(x0, p0)
            est = np.empty_like(seq)
            est[0] = x0[:2]
            for k in range(1, seq.shape[0]):
                kin = frozen_field_predict(kin, model, self.grid_, field)
                kin = kinematic_update(kin, obs, seq[k])
                est[k] = kin.mean[:2]
            outputs.append(est)
        return np.vstack(outputs)

    def predict_field(self, points):
        """Mean acceleration of the learned field at arbitrary positions, (m, 2)."""
        self._check_fitted()
        points = as_points("points", points)
        out = np.empty_like(points)
        for i, z in enumerate(points):
            out[i] = input_mean(self.grid_, self.field_mean_, z)
        return out

    def field_summary(self) -> np.ndarray:
        """Per-inducing-point table (xi_x, xi_y, mean_ax, mean_ay, var)."""
        self._check_fitted()
        return field_table(self.grid_, FieldBelief(self.field_mean_, self.field_cov_))

    def score(self, X, y, lengths=None):
        """Negative position RMSE of predict(X) against true positions y."""
        y = as_points("y", y)
        est = self.predict(X, lengths=lengths)
        if est.shape != y.shape:
            raise ValueError(f"y must have shape {est.shape}, got {y.shape}")
        return -float(np.sqrt(np.mean(np.sum((est - y) ** 2, axis=1))))


class CvTracker(BaseEstimator):
    """Constant-velocity Kalman baseline with the same sequence interface.

    accel_var scales the white-acceleration process noise accel_var * G G'.
    """

    def __init__(self, accel_var: float = 0.05, sampling_rate: float = 2.0,
                 filter_meas_var: float = 1.0):
        self.accel_var = accel_var
        self.sampling_rate = sampling_rate
        self.filter_meas_var = filter_meas_var

    def fit(self, X=None, y=None, lengths=None):
        """No learning happens; present for interface compatibility."""
        self.fitted_ = True
        return self

    def predict(self, X, lengths=None):
        sequences = _split_sequences(X, lengths)
        model = cv_matrices(1.0 / self.sampling_rate)
        q = cv_process_noise(model, self.accel_var)
        obs = position_observation(KINEMATIC_DIM, self.filter_meas_var)
        outputs = []
        for seq in sequences:
            if seq.shape[0] < 2:
                raise ValueError("every sequence needs at least 2 steps")
            x0, p0 = _initial_kinematics(seq, self.sampling_rate, self.filter_meas_var)
            kin = KinematicBelief(x0, p0)
            est = np.empty_like(seq)
            est[0] = x0[:2]
            for k in range(1, seq.shape[0]):
                kin = cv_predict(kin, model, q)
                kin = kinematic_update(kin, obs, seq[k])
                est[k] = kin.mean[:2]
            outputs.append(est)
        return np.vstack(outputs)

    def score(self, X, y, lengths=None):
        """Negative position RMSE of predict(X) against true positions y."""
        y = as_points("y", y)
        est = self.predict(X, lengths=lengths)
        if est.shape != y.shape:
            raise ValueError(f"y must have shape {est.shape}, got {y.shape}")
        return -float(np.sqrt(np.mean(np.sum((est - y) ** 2, axis=1))))
