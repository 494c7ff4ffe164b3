"""Input validation helpers for the estimator layer."""

from __future__ import annotations

import numpy as np

from .exceptions import ShapeMismatch


def as_float_array(a, name: str = "array") -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_sample_matrix(a, name: str = "X") -> np.ndarray:
    """Validate a sample-major ``(n_samples, d)`` matrix."""
    arr = as_float_array(a, name)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatch(f"{name} must be non-empty, got shape {arr.shape}")
    return arr


def check_snapshot_pair(X, Y) -> tuple[np.ndarray, np.ndarray]:
    """Validate matching sample-major state/derivative matrices."""
    X = check_sample_matrix(X, "X")
    Y = check_sample_matrix(Y, "Y")
    if X.shape != Y.shape:
        raise ShapeMismatch(
            f"X and Y must have equal shapes, got {X.shape} and {Y.shape}"
        )
    return X, Y
