"""EKF steps on the augmented state: structure, oracles, and consistency."""

import numpy as np
import pytest

from gpassm.field import InducingGrid, fic_variance, input_mean, prior_belief
from gpassm.filtering import (
    AugmentedBelief,
    KinematicBelief,
    augmented_prior,
    cv_predict,
    frozen_field_predict,
    kinematic_update,
    predict,
    reinitialize_vehicle,
    update,
)
from gpassm.kernels import KernelParams
from gpassm.models import (
    KINEMATIC_DIM,
    cv_matrices,
    cv_process_noise,
    position_observation,
)
from gpassm.oracles import dense_predict, dense_update
from gpassm.validation import NumericalError

K = KINEMATIC_DIM


def _default_prior(grid, x0=(0.0, 0.0, 1.0, 0.0)):
    p0 = np.diag([0.2, 0.2, 0.25, 0.25])
    return augmented_prior(grid, np.asarray(x0, dtype=float), p0)


def test_augmented_prior_layout(tiny_grid):
    belief = _default_prior(tiny_grid, (1.0, 2.0, 3.0, 4.0))
    assert belief.step == 0
    np.testing.assert_array_equal(belief.mean[:K], [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(belief.mean[K:], 0.0)
    np.testing.assert_array_equal(belief.covariance[:K, K:], 0.0)
    np.testing.assert_allclose(belief.covariance[K:, K:],
                               prior_belief(tiny_grid).covariance, rtol=1e-12)


def test_predict_leaves_field_mean_unchanged_and_counts_steps(tiny_grid):
    model = cv_matrices(0.5)
    belief = _default_prior(tiny_grid)
    belief.mean[K:] = np.arange(tiny_grid.state_dim, dtype=float)
    out = predict(belief, model, tiny_grid)
    np.testing.assert_array_equal(out.mean[K:], belief.mean[K:])
    assert out.step == 1
    assert predict(out, model, tiny_grid).step == 2


def test_predict_matches_dense_oracle(tiny_grid, rng):
    model = cv_matrices(0.5)
    belief = _default_prior(tiny_grid)
    belief.mean[K:] = 0.3 * rng.standard_normal(tiny_grid.state_dim)
    # correlate the blocks first with one update so the cross terms are live
    obs = position_observation(K + tiny_grid.state_dim, 1.0)
    belief = update(predict(belief, model, tiny_grid), obs, (0.4, 0.1))
    out = predict(belief, model, tiny_grid, drift_var=1e-5)
    mean_d, cov_d = dense_predict(belief.mean, belief.covariance, model,
                                  tiny_grid, drift_var=1e-5)
    np.testing.assert_allclose(out.mean, mean_d, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(out.covariance, cov_d, rtol=1e-9, atol=1e-12)


def test_predict_from_certainty_at_inducing_point_stays_certain():
    params = KernelParams(sigma_f_sq=0.05, length_scale=0.5, jitter=0.0)
    grid = InducingGrid(params, np.array([[0.0, 0.0], [1.0, 0.0]]))
    model = cv_matrices(0.5)
    d = K + grid.state_dim
    belief = AugmentedBelief(np.zeros(d), np.zeros((d, d)))
    out = predict(belief, model, grid)
    np.testing.assert_array_equal(out.covariance, 0.0)


def test_update_matches_dense_oracle(tiny_grid, rng):
    model = cv_matrices(0.5)
    belief = predict(_default_prior(tiny_grid), model, tiny_grid)
    obs = position_observation(K + tiny_grid.state_dim, 1.0)
    y = rng.standard_normal(2)
    out = update(belief, obs, y)
    mean_d, cov_d = dense_update(belief.mean, belief.covariance, obs, y)
    np.testing.assert_allclose(out.mean, mean_d, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(out.covariance, cov_d, rtol=1e-9, atol=1e-12)


def test_update_halves_unit_prior_with_unit_noise(tiny_grid):
    # per position component: prior mean 0 and variance 1, measurement 1 with
    # noise variance 1, so the posterior is mean 0.5 and variance 0.5
    d = K + tiny_grid.state_dim
    belief = AugmentedBelief(np.zeros(d), np.eye(d))
    obs = position_observation(d, 1.0)
    out = update(belief, obs, (1.0, 1.0))
    np.testing.assert_allclose(out.mean[:2], [0.5, 0.5], rtol=1e-12)
    np.testing.assert_allclose(out.covariance[0, 0], 0.5, rtol=1e-12)
    np.testing.assert_allclose(out.covariance[1, 1], 0.5, rtol=1e-12)
    # unobserved, uncorrelated components are untouched
    np.testing.assert_array_equal(out.mean[2:], 0.0)
    np.testing.assert_allclose(out.covariance[2:, 2:],
                               np.eye(d - 2), rtol=1e-12)


def test_update_with_huge_noise_changes_nothing(tiny_grid):
    model = cv_matrices(0.5)
    belief = predict(_default_prior(tiny_grid), model, tiny_grid)
    obs = position_observation(K + tiny_grid.state_dim, 1e12)
    out = update(belief, obs, (50.0, -50.0))
    np.testing.assert_allclose(out.mean, belief.mean, atol=1e-9)
    np.testing.assert_allclose(out.covariance, belief.covariance, atol=1e-9)


def test_update_leaves_uncorrelated_field_block_alone(tiny_grid):
    belief = _default_prior(tiny_grid)  # zero cross-covariance by construction
    obs = position_observation(K + tiny_grid.state_dim, 1.0)
    out = update(belief, obs, (0.3, -0.2))
    np.testing.assert_array_equal(out.covariance[K:, K:],
                                  belief.covariance[K:, K:])
    np.testing.assert_array_equal(out.mean[K:], belief.mean[K:])


def test_update_rejects_degenerate_innovation(tiny_grid):
    d = K + tiny_grid.state_dim
    belief = AugmentedBelief(np.zeros(d), np.zeros((d, d)))
    obs = position_observation(d, 1.0)
    obs = type(obs)(H=obs.H, R=np.zeros((2, 2)))  # no noise, no state variance
    with pytest.raises(NumericalError):
        update(belief, obs, (0.0, 0.0))


def test_covariance_stays_symmetric_over_a_run(tiny_grid, rng):
    model = cv_matrices(0.5)
    obs = position_observation(K + tiny_grid.state_dim, 1.0)
    belief = _default_prior(tiny_grid)
    for _ in range(30):
        belief = predict(belief, model, tiny_grid)
        belief = update(belief, obs, belief.mean[:2] + 0.3 * rng.standard_normal(2))
        asym = np.max(np.abs(belief.covariance - belief.covariance.T))
        assert asym <= 1e-12


def test_reinitialize_preserves_field_bits(tiny_grid, rng):
    model = cv_matrices(0.5)
    obs = position_observation(K + tiny_grid.state_dim, 1.0)
    belief = _default_prior(tiny_grid)
    for _ in range(10):
        belief = predict(belief, model, tiny_grid)
        belief = update(belief, obs, belief.mean[:2] + 0.1 * rng.standard_normal(2))
    x0 = np.array([0.0, -9.0, 0.0, 2.0])
    p0 = np.diag([0.2, 0.2, 0.25, 0.25])
    fresh = reinitialize_vehicle(belief, x0, p0)
    assert fresh.step == 0
    np.testing.assert_array_equal(fresh.mean[:K], x0)
    np.testing.assert_array_equal(fresh.covariance[:K, :K], p0)
    np.testing.assert_array_equal(fresh.covariance[:K, K:], 0.0)
    # the learned field must survive bit-for-bit
    assert np.array_equal(fresh.mean[K:], belief.mean[K:])
    assert np.array_equal(fresh.covariance[K:, K:], belief.covariance[K:, K:])
    again = reinitialize_vehicle(fresh, x0, p0)
    np.testing.assert_array_equal(again.mean, fresh.mean)
    np.testing.assert_array_equal(again.covariance, fresh.covariance)


def test_zero_field_covariance_reduces_to_plain_kf(tiny_grid, rng):
    """With the field pinned at zero the EKF must agree with a plain KF."""
    model = cv_matrices(0.5)
    d = K + tiny_grid.state_dim
    p0 = np.diag([0.2, 0.2, 0.25, 0.25])
    belief = AugmentedBelief(np.concatenate([[0.1, 0.4, 1.0, 0.3], np.zeros(tiny_grid.state_dim)]),
                             np.zeros((d, d)))
    belief.covariance[:K, :K] = p0
    obs_aug = position_observation(d, 1.0)
    obs_kin = position_observation(K, 1.0)
    plain = KinematicBelief(belief.mean[:K].copy(), p0.copy())
    for _ in range(25):
        lam = fic_variance(tiny_grid, belief.mean[:2])
        belief = predict(belief, model, tiny_grid)
        plain = cv_predict(plain, model, lam * (model.G @ model.G.T))
        y = plain.mean[:2] + 0.2 * rng.standard_normal(2)
        belief = update(belief, obs_aug, y)
        plain = kinematic_update(plain, obs_kin, y)
        np.testing.assert_allclose(belief.mean[:K], plain.mean, rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(belief.covariance[:K, :K], plain.covariance,
                                   rtol=1e-10, atol=1e-10)


def test_frozen_prior_field_equals_cv_baseline(tiny_grid, rng):
    """At the prior the predictive input covariance is sigma_f_sq * I, so
    frozen-field filtering and the CV baseline coincide."""
    model = cv_matrices(0.5)
    q_cv = cv_process_noise(model, 0.05)
    field = prior_belief(tiny_grid)
    obs = position_observation(K, 1.0)
    a = KinematicBelief(np.array([0.0, 0.0, 1.0, 1.0]), np.diag([0.2, 0.2, 0.25, 0.25]))
    b = KinematicBelief(a.mean.copy(), a.covariance.copy())
    for _ in range(20):
        a = frozen_field_predict(a, model, tiny_grid, field)
        b = cv_predict(b, model, q_cv)
        y = a.mean[:2] + 0.3 * rng.standard_normal(2)
        a = kinematic_update(a, obs, y)
        b = kinematic_update(b, obs, y)
        np.testing.assert_allclose(a.mean, b.mean, rtol=1e-9, atol=1e-11)
        np.testing.assert_allclose(a.covariance, b.covariance, rtol=1e-9, atol=1e-11)


def test_innovations_are_white_on_self_simulated_data(tiny_grid):
    """Normalized innovation squares should average near 2 (two measurement
    dimensions) when the filter runs on data drawn from its own model."""
    rng = np.random.default_rng(7)
    model = cv_matrices(0.5)
    meas_var = 0.2
    obs = position_observation(K + tiny_grid.state_dim, meas_var)
    p0 = np.diag([0.2, 0.2, 0.25, 0.25])

    # one shared field sample, whitened: w ~ N(0, Kuu^-1 kron I2)
    chol = np.linalg.cholesky(prior_belief(tiny_grid).covariance)
    w_true = chol @ rng.standard_normal(tiny_grid.state_dim)

    belief = None
    nis_values = []
    for _ in range(60):  # 60 vehicles x 20 steps = 1200 innovations
        x = np.array([rng.uniform(0.0, 1.0), rng.uniform(0.0, 2.0),
                      rng.normal(0.0, 0.5), rng.normal(0.0, 0.5)])
        x0_est = x + np.concatenate([rng.normal(0.0, np.sqrt(0.2), 2),
                                     rng.normal(0.0, 0.5, 2)])
        if belief is None:
            belief = augmented_prior(tiny_grid, x0_est, p0)
        else:
            belief = reinitialize_vehicle(belief, x0_est, p0)
        for _ in range(20):
            # simulate forward with the true field and residual noise
            z = x[:2]
            u = input_mean(tiny_grid, w_true, z)
            lam = fic_variance(tiny_grid, z)
            x = model.F @ x + model.G @ (u + rng.normal(0.0, np.sqrt(lam), 2))
            y = x[:2] + rng.normal(0.0, np.sqrt(meas_var), 2)

            belief = predict(belief, model, tiny_grid)
            innov = y - obs.H @ belief.mean
            S = obs.H @ belief.covariance @ obs.H.T + obs.R
            nis_values.append(innov @ np.linalg.solve(S, innov))
            belief = update(belief, obs, y)

    assert len(nis_values) >= 1000
    mean_nis = float(np.mean(nis_values))
    assert 1.6 <= mean_nis <= 2.4


def test_field_belief_view_copies(tiny_grid):
    belief = _default_prior(tiny_grid)
    fb = belief.field_belief()
    fb.mean[:] = 99.0
    fb.covariance[:] = 99.0
    np.testing.assert_array_equal(belief.mean[K:], 0.0)
    np.testing.assert_allclose(belief.covariance[K:, K:],
                               prior_belief(tiny_grid).covariance, rtol=1e-12)
