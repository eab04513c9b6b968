"""Input validation helpers shared across the package.

Conventions: bad arguments raise ``ValueError`` with the offending name in the
message; failures of otherwise-valid numerics (factorizations, non-finite
filter states) raise :class:`NumericalError`.
"""

from __future__ import annotations

import numpy as np


class NumericalError(RuntimeError):
    """A numerical operation failed on structurally valid input.

    Carries optional context (step index, vehicle index) so failures deep in a
    filter loop can be located.
    """

    def __init__(self, message: str, *, step: int | None = None,
                 vehicle: int | None = None):
        parts = [message]
        if vehicle is not None:
            parts.append(f"vehicle={vehicle}")
        if step is not None:
            parts.append(f"step={step}")
        super().__init__(" ".join(parts))
        self.message = message
        self.step = step
        self.vehicle = vehicle


def check_finite_array(name: str, value, shape: tuple[int, ...] | None = None) -> np.ndarray:
    """Coerce to a float ndarray, requiring finite entries and optionally a shape."""
    arr = np.asarray(value, dtype=float)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_point(name: str, value) -> np.ndarray:
    """Coerce to a finite 2-D point, shape (2,)."""
    return check_finite_array(name, value, shape=(2,))


def as_points(name: str, value) -> np.ndarray:
    """Coerce (copying) to a nonempty finite array of 2-D points, shape (n, 2)."""
    arr = np.array(value, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_nonnegative(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be nonnegative, got {value}")
    return value
