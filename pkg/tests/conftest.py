"""Shared fixtures: small grids and default kernel parameters."""

import numpy as np
import pytest

from gpassm.field import InducingGrid, build_grid
from gpassm.kernels import KernelParams


@pytest.fixture
def se_params() -> KernelParams:
    """Default field hyperparameters: variance 0.05, length scale 0.5 m."""
    return KernelParams(sigma_f_sq=0.05, length_scale=0.5)


@pytest.fixture
def tiny_grid(se_params) -> InducingGrid:
    """2x3 lattice at unit spacing, L = 6."""
    return build_grid(se_params, [(0.0, 1.0, 0.0, 2.0)], spacing=1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
