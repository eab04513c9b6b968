"""Sparse inducing-point representation of the unknown planar acceleration field.

The field u(z) in R^2 is summarized by its values at L fixed grid points. The
filter carries the whitened coordinates ub' (prior N(0, Kuu^-1 kron I2)), so
the predicted input at a point z is simply (K(z, grid) kron I2) @ ub' and the
residual not captured by the grid is white noise with variance lambda(z) per
component (the fully-independent-conditional approximation).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .kernels import GramFactorization, KernelParams, cross_covariance
from .validation import NumericalError, as_point, as_points, check_nonnegative, check_positive

#: Axis-aligned rectangle (x_min, x_max, y_min, y_max).
Rect = tuple[float, float, float, float]

_EDGE_TOL = 1e-9


class InducingGrid:
    """Fixed inducing-point locations with the cached factorization of their Gram matrix.

    Immutable after construction; safe to share across concurrent filter runs.
    """

    def __init__(self, params: KernelParams, points, spacing: float | None = None):
        points = as_points("points", points)
        if len(np.unique(points, axis=0)) != len(points):
            raise ValueError("inducing points must be distinct")
        self.params = params
        self.gram = GramFactorization(params, points)
        self.points = self.gram.points
        self.points.setflags(write=False)
        self.spacing = spacing

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def state_dim(self) -> int:
        """Dimension of the whitened inducing state (two components per point)."""
        return 2 * self.n_points


def build_grid(params: KernelParams, region: Sequence[Rect], spacing: float) -> InducingGrid:
    """Uniform lattice with the given spacing covering a union of axis-aligned rectangles.

    Lattice nodes sit at integer multiples of the spacing. Ordering is
    row-major by y then x, which makes grid construction deterministic.
    """
    check_positive("spacing", spacing)
    region = list(region)
    if not region:
        raise ValueError("region must contain at least one rectangle")
    for rect in region:
        x0, x1, y0, y1 = map(float, rect)
        if not (x0 <= x1 and y0 <= y1):
            raise ValueError(f"malformed rectangle {rect}")

    points = []
    seen = set()
    x_all = [r[0] for r in region] + [r[1] for r in region]
    y_all = [r[2] for r in region] + [r[3] for r in region]
    ys = np.arange(np.ceil(min(y_all) / spacing - _EDGE_TOL),
                   np.floor(max(y_all) / spacing + _EDGE_TOL) + 1) * spacing
    xs = np.arange(np.ceil(min(x_all) / spacing - _EDGE_TOL),
                   np.floor(max(x_all) / spacing + _EDGE_TOL) + 1) * spacing
    for y in ys:
        for x in xs:
            inside = any(r[0] - _EDGE_TOL <= x <= r[1] + _EDGE_TOL
                         and r[2] - _EDGE_TOL <= y <= r[3] + _EDGE_TOL
                         for r in region)
            if inside and (x, y) not in seen:
                seen.add((x, y))
                points.append((x, y))
    if not points:
        raise ValueError("region contains no lattice points at this spacing")
    return InducingGrid(params, np.array(points, dtype=float), spacing=spacing)


@dataclass
class FieldBelief:
    """Gaussian belief over the whitened inducing state (dimension 2L).

    drift_var is the per-step random-walk variance sigma^2 in Sigma =
    sigma^2 * I; zero keeps the field static.
    """

    mean: np.ndarray
    covariance: np.ndarray
    drift_var: float = 0.0

    def copy(self) -> "FieldBelief":
        return FieldBelief(self.mean.copy(), self.covariance.copy(), self.drift_var)


def prior_belief(grid: InducingGrid, drift_var: float = 0.0) -> FieldBelief:
    """Zero-mean prior with covariance Kuu^-1 kron I2 from the cached factorization."""
    check_nonnegative("drift_var", drift_var)
    kinv = grid.gram.inverse()
    kinv = 0.5 * (kinv + kinv.T)
    cov = np.kron(kinv, np.eye(2))
    return FieldBelief(np.zeros(grid.state_dim), cov, drift_var)


def input_mean(grid: InducingGrid, mean: np.ndarray, z) -> np.ndarray:
    """Predicted input sum_l k(z, xi_l) * ub'_l, shape (2,).

    mean is the whitened inducing state (pass belief.mean), laid out as L
    consecutive (x, y) component pairs.
    """
    k_row = cross_covariance(grid.params, z, grid.points)
    return k_row @ np.asarray(mean, dtype=float).reshape(-1, 2)


def fic_variance(grid: InducingGrid, z) -> float:
    """Residual variance lambda(z) = k(z,z) - K(z,grid) Kuu^-1 K(grid,z), per component."""
    k_row = cross_covariance(grid.params, z, grid.points)
    lam = float(grid.params.sigma_f_sq - k_row @ grid.gram.solve(k_row))
    floor = -1e-12 * grid.params.sigma_f_sq
    if lam < floor:
        raise NumericalError(f"negative residual variance {lam:.3e} at z={np.asarray(z)}")
    return max(lam, 0.0)


def drift(belief: FieldBelief) -> FieldBelief:
    """One random-walk step: mean unchanged, covariance grows by drift_var * I."""
    if belief.drift_var == 0.0:
        return belief
    cov = belief.covariance.copy()
    cov[np.diag_indices_from(cov)] += belief.drift_var
    return replace(belief, covariance=cov)


def _cov_cross(cov: np.ndarray, k_row: np.ndarray) -> np.ndarray:
    """P C^T for C = k_row kron I2, contracting over the point index. Shape (2L, 2)."""
    n = k_row.size
    return np.einsum("ilc,l->ic", cov.reshape(2 * n, n, 2), k_row)


def condition_on_input_observation(grid: InducingGrid, belief: FieldBelief, z,
                                   u_obs, noise_var: float) -> FieldBelief:
    """Condition the field on a direct observation of the input at z.

    The observation model is u_obs = (K(z, grid) kron I2) ub' + e with
    e ~ N(0, (lambda(z) + noise_var) I2): the grid explains what it can and the
    residual lands in the noise. Used as a test oracle hook and by batch
    comparisons; the filter itself conditions through the full state instead.
    """
    check_positive("noise_var", noise_var)
    u_obs = as_point("u_obs", u_obs)
    k_row = cross_covariance(grid.params, z, grid.points)
    lam = fic_variance(grid, z)

    pred = k_row @ belief.mean.reshape(-1, 2)
    cov = belief.covariance
    pct = _cov_cross(cov, k_row)
    cpct = np.tensordot(k_row, pct.reshape(grid.n_points, 2, 2), axes=(0, 0))
    s_mat = cpct + (lam + noise_var) * np.eye(2)
    try:
        s_inv = np.linalg.inv(s_mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"innovation covariance not invertible: {exc}") from exc
    gain = pct @ s_inv
    new_mean = belief.mean + gain @ (u_obs - pred)
    # Joseph form expanded in rank-2 terms; no dense (I - KC) is ever built.
    new_cov = cov - gain @ pct.T - pct @ gain.T + gain @ s_mat @ gain.T
    new_cov = 0.5 * (new_cov + new_cov.T)
    return FieldBelief(new_mean, new_cov, belief.drift_var)


def input_variance(grid: InducingGrid, belief: FieldBelief, z) -> np.ndarray:
    """Predictive covariance (2x2) of the input at z, including the residual lambda(z)."""
    k_row = cross_covariance(grid.params, z, grid.points)
    pct = _cov_cross(belief.covariance, k_row)
    cpct = np.tensordot(k_row, pct.reshape(grid.n_points, 2, 2), axes=(0, 0))
    return cpct + fic_variance(grid, z) * np.eye(2)


def field_table(grid: InducingGrid, belief: FieldBelief) -> np.ndarray:
    """Tabulate (xi_x, xi_y, mean_ax, mean_ay, var) per inducing point, shape (L, 5).

    var is the predictive variance of the input components at the point
    (averaged over the two components, residual included).
    """
    L = grid.n_points
    k_full = cross_covariance_matrix(grid)
    means = k_full @ belief.mean.reshape(L, 2)
    cov = belief.covariance
    var = np.zeros(L)
    for comp in (0, 1):
        p_comp = cov[comp::2, comp::2]
        var += np.einsum("ij,jk,ik->i", k_full, p_comp, k_full)
    var *= 0.5
    lam = grid.params.sigma_f_sq - np.einsum(
        "ij,ji->i", k_full, grid.gram.solve(k_full.T))
    var += np.clip(lam, 0.0, None)
    return np.column_stack([grid.points, means, var])


def cross_covariance_matrix(grid: InducingGrid) -> np.ndarray:
    """Unjittered kernel matrix K(grid, grid), shape (L, L)."""
    pts = grid.points
    diff = pts[:, None, :] - pts[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    return grid.params.sigma_f_sq * np.exp(-sq / (2.0 * grid.params.length_scale**2))
