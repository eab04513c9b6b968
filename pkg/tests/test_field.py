"""Inducing-grid construction and the sparse field belief operations."""

import numpy as np
import pytest

from gpassm.field import (
    FieldBelief,
    InducingGrid,
    build_grid,
    condition_on_input_observation,
    cross_covariance_matrix,
    drift,
    fic_variance,
    field_table,
    input_mean,
    input_variance,
    prior_belief,
)
from gpassm.kernels import KernelParams, cross_covariance
from gpassm.oracles import batch_fic_posterior, dense_residual_var


def test_build_grid_unit_square_gives_four_corners(se_params):
    grid = build_grid(se_params, [(0.0, 1.0, 0.0, 1.0)], spacing=1.0)
    expected = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    np.testing.assert_array_equal(grid.points, expected)
    assert grid.n_points == 4
    assert grid.state_dim == 8


def test_build_grid_nodes_sit_on_lattice(se_params):
    # rectangle offset from the lattice: only interior multiples survive
    grid = build_grid(se_params, [(0.5, 2.5, -0.2, 1.2)], spacing=1.0)
    xs = sorted(set(grid.points[:, 0]))
    ys = sorted(set(grid.points[:, 1]))
    assert xs == [1.0, 2.0]
    assert ys == [0.0, 1.0]


def test_build_grid_overlapping_rectangles_deduplicate(se_params):
    grid = build_grid(se_params, [(0.0, 1.0, 0.0, 1.0), (0.0, 1.0, 0.0, 1.0)],
                      spacing=1.0)
    assert grid.n_points == 4


def test_build_grid_rejects_bad_inputs(se_params):
    with pytest.raises(ValueError):
        build_grid(se_params, [(0.0, 1.0, 0.0, 1.0)], spacing=0.0)
    with pytest.raises(ValueError):
        build_grid(se_params, [], spacing=1.0)
    with pytest.raises(ValueError):
        build_grid(se_params, [(1.0, 0.0, 0.0, 1.0)], spacing=1.0)
    with pytest.raises(ValueError):
        # interior contains no lattice node at this spacing
        build_grid(se_params, [(0.2, 0.8, 0.2, 0.8)], spacing=1.0)


def test_grid_rejects_duplicate_points(se_params):
    with pytest.raises(ValueError):
        InducingGrid(se_params, np.array([[0.0, 0.0], [0.0, 0.0]]))


def test_grid_points_are_write_locked(tiny_grid):
    with pytest.raises(ValueError):
        tiny_grid.points[0, 0] = 99.0


def test_prior_single_point_covariance():
    params = KernelParams(sigma_f_sq=0.05, length_scale=0.5, jitter=0.0)
    grid = InducingGrid(params, np.array([[0.0, 0.0]]))
    belief = prior_belief(grid)
    np.testing.assert_array_equal(belief.mean, np.zeros(2))
    np.testing.assert_allclose(belief.covariance, np.eye(2) / 0.05, rtol=1e-12)


def test_prior_well_separated_points_are_nearly_independent(se_params):
    grid = InducingGrid(se_params, np.array([[0.0, 0.0], [50.0, 0.0]]))
    cov = prior_belief(grid).covariance
    np.testing.assert_allclose(cov, np.eye(4) / 0.05, rtol=1e-8)


def test_prior_covariance_inverts_gram(tiny_grid):
    cov = prior_belief(tiny_grid).covariance
    kuu = np.kron(tiny_grid.gram.matrix, np.eye(2))
    np.testing.assert_allclose(kuu @ cov, np.eye(tiny_grid.state_dim),
                               rtol=1e-8, atol=1e-8)


def test_prior_covariance_has_kron_interleaving(tiny_grid):
    cov = prior_belief(tiny_grid).covariance
    inv = tiny_grid.gram.inverse()
    inv = 0.5 * (inv + inv.T)
    np.testing.assert_allclose(cov, np.kron(inv, np.eye(2)), rtol=1e-12)


def test_input_mean_is_linear_and_matches_kron_oracle(tiny_grid, rng):
    z = np.array([0.3, 1.1])
    m1 = rng.standard_normal(tiny_grid.state_dim)
    m2 = rng.standard_normal(tiny_grid.state_dim)
    u1 = input_mean(tiny_grid, m1, z)
    u2 = input_mean(tiny_grid, m2, z)
    np.testing.assert_allclose(input_mean(tiny_grid, 2.0 * m1 + m2, z),
                               2.0 * u1 + u2, rtol=1e-12)
    k_row = cross_covariance(tiny_grid.params, z, tiny_grid.points)
    dense = np.kron(k_row, np.eye(2)) @ m1
    np.testing.assert_allclose(u1, dense, rtol=1e-12)


def test_input_mean_zero_state_is_zero(tiny_grid):
    np.testing.assert_array_equal(
        input_mean(tiny_grid, np.zeros(tiny_grid.state_dim), (0.5, 0.5)), 0.0)


def test_fic_variance_zero_at_inducing_point_without_jitter():
    params = KernelParams(sigma_f_sq=0.05, length_scale=0.5, jitter=0.0)
    grid = InducingGrid(params, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    for p in grid.points:
        assert abs(fic_variance(grid, p)) <= 1e-10


def test_fic_variance_saturates_far_from_grid(tiny_grid):
    lam = fic_variance(tiny_grid, (0.5 + 20 * 0.5, 0.0))
    assert abs(lam - 0.05) <= 1e-10


def test_fic_variance_bounded(tiny_grid, rng):
    for _ in range(50):
        z = rng.uniform(-3.0, 5.0, size=2)
        lam = fic_variance(tiny_grid, z)
        assert 0.0 <= lam <= 0.05 + 1e-12


def test_fic_variance_matches_dense_oracle(tiny_grid):
    z = np.array([0.5, 0.5])  # cell center
    assert fic_variance(tiny_grid, z) == pytest.approx(
        dense_residual_var(tiny_grid, z), rel=1e-9, abs=1e-14)


def test_drift_grows_diagonal_only(tiny_grid):
    belief = prior_belief(tiny_grid, drift_var=1e-4)
    stepped = drift(belief)
    np.testing.assert_array_equal(stepped.mean, belief.mean)
    np.testing.assert_allclose(
        stepped.covariance, belief.covariance + 1e-4 * np.eye(tiny_grid.state_dim),
        rtol=1e-15)


def test_drift_static_field_is_identity(tiny_grid):
    belief = prior_belief(tiny_grid)
    assert drift(belief) is belief


def test_conditioning_on_prior_mean_leaves_mean_zero(tiny_grid):
    belief = prior_belief(tiny_grid)
    post = condition_on_input_observation(tiny_grid, belief, (0.4, 0.9),
                                          (0.0, 0.0), noise_var=0.1)
    np.testing.assert_array_equal(post.mean, 0.0)
    # information was still gained
    assert np.trace(post.covariance) < np.trace(belief.covariance)


def test_conditioning_interpolates_with_tiny_noise(tiny_grid):
    belief = prior_belief(tiny_grid)
    z = tiny_grid.points[2]
    u_obs = np.array([0.7, -0.3])
    post = condition_on_input_observation(tiny_grid, belief, z, u_obs,
                                          noise_var=1e-12)
    np.testing.assert_allclose(input_mean(tiny_grid, post.mean, z), u_obs,
                               rtol=1e-6)


def test_sequential_conditioning_matches_batch_oracle(tiny_grid, rng):
    obs = []
    belief = prior_belief(tiny_grid)
    for _ in range(5):
        z = rng.uniform(0.0, 2.0, size=2)
        u = rng.standard_normal(2)
        obs.append((z, u, 0.3))
        belief = condition_on_input_observation(tiny_grid, belief, z, u, 0.3)
    mean, cov = batch_fic_posterior(tiny_grid, obs)
    np.testing.assert_allclose(belief.mean, mean, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(belief.covariance, cov, rtol=1e-8, atol=1e-10)


def test_conditioning_order_invariance(tiny_grid):
    obs_a = (np.array([0.2, 0.5]), np.array([1.0, 0.0]), 0.2)
    obs_b = (np.array([0.9, 1.4]), np.array([0.0, -1.0]), 0.5)
    fwd = prior_belief(tiny_grid)
    for z, u, nv in (obs_a, obs_b):
        fwd = condition_on_input_observation(tiny_grid, fwd, z, u, nv)
    rev = prior_belief(tiny_grid)
    for z, u, nv in (obs_b, obs_a):
        rev = condition_on_input_observation(tiny_grid, rev, z, u, nv)
    np.testing.assert_allclose(fwd.mean, rev.mean, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(fwd.covariance, rev.covariance, rtol=1e-8, atol=1e-10)


def test_conditioning_preserves_symmetry(tiny_grid, rng):
    belief = prior_belief(tiny_grid)
    for _ in range(10):
        z = rng.uniform(-0.5, 2.5, size=2)
        u = rng.standard_normal(2)
        belief = condition_on_input_observation(tiny_grid, belief, z, u, 0.4)
        np.testing.assert_array_equal(belief.covariance, belief.covariance.T)


def test_input_variance_at_prior_is_signal_variance(tiny_grid, rng):
    belief = prior_belief(tiny_grid)
    for _ in range(10):
        z = rng.uniform(-1.0, 3.0, size=2)
        np.testing.assert_allclose(input_variance(tiny_grid, belief, z),
                                   0.05 * np.eye(2), rtol=1e-9, atol=1e-12)


def test_input_variance_shrinks_after_conditioning(tiny_grid):
    belief = prior_belief(tiny_grid)
    z = np.array([0.5, 1.0])
    post = condition_on_input_observation(tiny_grid, belief, z, (0.1, 0.1), 0.05)
    before = input_variance(tiny_grid, belief, z)
    after = input_variance(tiny_grid, post, z)
    assert np.all(np.linalg.eigvalsh(before - after) > -1e-12)


def test_field_table_prior(tiny_grid):
    table = field_table(tiny_grid, prior_belief(tiny_grid))
    assert table.shape == (tiny_grid.n_points, 5)
    np.testing.assert_array_equal(table[:, :2], tiny_grid.points)
    np.testing.assert_array_equal(table[:, 2:4], 0.0)
    np.testing.assert_allclose(table[:, 4], 0.05, rtol=1e-8)


def test_field_table_mean_matches_input_mean(tiny_grid, rng):
    mean = rng.standard_normal(tiny_grid.state_dim)
    belief = FieldBelief(mean, prior_belief(tiny_grid).covariance)
    table = field_table(tiny_grid, belief)
    for row, p in zip(table, tiny_grid.points):
        np.testing.assert_allclose(row[2:4], input_mean(tiny_grid, mean, p),
                                   rtol=1e-10, atol=1e-14)


def test_cross_covariance_matrix_is_unjittered(tiny_grid):
    k_full = cross_covariance_matrix(tiny_grid)
    np.testing.assert_array_equal(k_full, k_full.T)
    np.testing.assert_array_equal(np.diag(k_full), 0.05)
    np.testing.assert_allclose(tiny_grid.gram.matrix,
                               k_full + tiny_grid.params.jitter * np.eye(6),
                               rtol=1e-15)
