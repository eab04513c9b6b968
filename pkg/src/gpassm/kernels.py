"""Squared-exponential kernel, its gradient, and Gram-matrix machinery.

The kernel is k(z, z*) = sigma_f_sq * exp(-||z - z*||^2 / (2 l^2)) on planar
points. Gram matrices get a small jitter on the diagonal before Cholesky
factorization; cross-covariances never do.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .validation import NumericalError, as_point, as_points, check_nonnegative, check_positive

#: Default jitter, as a fraction of sigma_f_sq, added to Gram diagonals.
JITTER_SCALE = 1e-9


@dataclass(frozen=True)
class KernelParams:
    """Hyperparameters of the squared-exponential kernel.

    sigma_f_sq is the signal variance (here (m/s^2)^2), length_scale the
    characteristic length in meters. jitter is an absolute diagonal
    regularizer for Gram matrices; it defaults to JITTER_SCALE * sigma_f_sq.
    locality_radius, when set, truncates cross-covariance entries for points
    farther away than the radius (an optional performance path; None keeps
    evaluation exact).
    """

    sigma_f_sq: float
    length_scale: float
    jitter: float = field(default=-1.0)
    locality_radius: float | None = None

    def __post_init__(self):
        check_positive("sigma_f_sq", self.sigma_f_sq)
        check_positive("length_scale", self.length_scale)
        if self.jitter < 0:
            object.__setattr__(self, "jitter", JITTER_SCALE * self.sigma_f_sq)
        check_nonnegative("jitter", self.jitter)
        if self.locality_radius is not None:
            check_positive("locality_radius", self.locality_radius)


def kernel_eval(params: KernelParams, z, z_star) -> float:
    """Evaluate k(z, z*). Symmetric in its arguments; in (0, sigma_f_sq]."""
    z = as_point("z", z)
    z_star = as_point("z_star", z_star)
    d = z - z_star
    return float(params.sigma_f_sq * np.exp(-(d @ d) / (2.0 * params.length_scale**2)))


def kernel_grad(params: KernelParams, z, z_star) -> np.ndarray:
    """Gradient of k(z, z*) with respect to z: -(1/l^2) k(z, z*) (z - z*)."""
    z = as_point("z", z)
    z_star = as_point("z_star", z_star)
    d = z - z_star
    k = params.sigma_f_sq * np.exp(-(d @ d) / (2.0 * params.length_scale**2))
    return -(k / params.length_scale**2) * d


def _sq_dists(z: np.ndarray, points: np.ndarray) -> np.ndarray:
    diff = points - z
    return np.einsum("ij,ij->i", diff, diff)


def cross_covariance(params: KernelParams, z, points) -> np.ndarray:
    """Row vector K(z, points) of kernel values, shape (L,). No jitter."""
    z = as_point("z", z)
    points = as_points("points", points)
    sq = _sq_dists(z, points)
    k = params.sigma_f_sq * np.exp(-sq / (2.0 * params.length_scale**2))
    if params.locality_radius is not None:
        k[sq > params.locality_radius**2] = 0.0
    return k


def cross_covariance_grad(params: KernelParams, z, points) -> np.ndarray:
    """Stacked gradients d k(z, xi_l)/dz, shape (L, 2)."""
    z = as_point("z", z)
    points = as_points("points", points)
    sq = _sq_dists(z, points)
    k = params.sigma_f_sq * np.exp(-sq / (2.0 * params.length_scale**2))
    if params.locality_radius is not None:
        k[sq > params.locality_radius**2] = 0.0
    return -(k / params.length_scale**2)[:, None] * (z - points)


def gram_matrix(params: KernelParams, points) -> np.ndarray:
    """Jittered Gram matrix K(points, points) + jitter * I, shape (L, L)."""
    points = as_points("points", points)
    diff = points[:, None, :] - points[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    gram = params.sigma_f_sq * np.exp(-sq / (2.0 * params.length_scale**2))
    gram[np.diag_indices_from(gram)] += params.jitter
    return gram


class GramFactorization:
    """Gram matrix of a fixed point set together with its cached Cholesky factor.

    The point set never changes during a run, so the factorization is computed
    once at construction and shared read-only afterwards.
    """

    def __init__(self, params: KernelParams, points):
        self.points = as_points("points", points)
        self.params = params
        self.matrix = gram_matrix(params, self.points)
        try:
            self._chol = sla.cho_factor(self.matrix, lower=True)
        except sla.LinAlgError as exc:
            cond = np.linalg.cond(self.matrix)
            raise NumericalError(
                f"Gram factorization failed (cond={cond:.3e}, "
                f"jitter={params.jitter:.3e}): {exc}") from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve (K + jitter I) x = rhs using the cached factor."""
        return sla.cho_solve(self._chol, rhs)

    def inverse(self) -> np.ndarray:
        """Dense inverse of the jittered Gram matrix."""
        return self.solve(np.eye(self.matrix.shape[0]))
