"""Coefficient identification from snapshot data.

Two routes solve the same least-squares problem
``min ||derivatives - coefficients^T @ features(states)||_F``:

* :func:`sindy_lstsq` / :func:`sindy_threshold` operate on the dense
  feature matrix (with optional sequential hard thresholding);
* :func:`mandy_identify` builds the feature tensor train, pseudoinverts
  it, and contracts with the derivative data, never forming the dense
  feature matrix.

Both consume snapshot matrices in the ``(d, m)`` orientation (states and
derivatives as columns).
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _linalg
from .coefficients import CoefficientModel
from .exceptions import EmptySupportWarning, ShapeMismatch
from .features import Dictionary, build_basis_tt
from .pseudoinverse import tt_pinv


@dataclass
class SindyResult:
    """Dense least-squares fit with an explicit sparsity mask.

    ``coefficients`` has shape ``(feature_count, d)``; entries outside
    ``active_mask`` are exactly zero.
    """

    coefficients: np.ndarray
    residual: float
    active_mask: np.ndarray
    iterations: int
    empty_support_components: tuple[int, ...] = field(default_factory=tuple)


def _check_pair(basis_matrix: np.ndarray, derivatives: np.ndarray):
    psi = np.asarray(basis_matrix, dtype=np.float64)
    y = np.asarray(derivatives, dtype=np.float64)
    if psi.ndim != 2 or y.ndim != 2:
        raise ShapeMismatch("basis matrix and derivatives must be matrices")
    if psi.shape[1] != y.shape[1]:
        raise ShapeMismatch(
            f"column counts differ: basis {psi.shape[1]} vs data {y.shape[1]}"
        )
    return psi, y


def sindy_lstsq(basis_matrix: np.ndarray, derivatives: np.ndarray) -> SindyResult:
    """Minimum-norm least-squares coefficients via the SVD pseudoinverse.

    Solves ``coefficients^T = derivatives @ pinv(basis_matrix)`` with the
    compact SVD, which yields the minimum-norm solution when the basis
    matrix is rank deficient.
    """
    psi, y = _check_pair(basis_matrix, derivatives)
    xi_t, residual, _ = _linalg.min_norm_lstsq(psi, y)
    xi = xi_t.T
    return SindyResult(
        coefficients=xi,
        residual=residual,
        active_mask=xi != 0.0,
        iterations=0,
    )


def sindy_threshold(
    basis_matrix: np.ndarray,
    derivatives: np.ndarray,
    cutoff: float,
    max_iter: int = 20,
) -> SindyResult:
    """Least squares with sequential hard thresholding.

    Repeats {fit, zero entries below ``cutoff`` in magnitude, refit each
    derivative component on its surviving support} until the support is
    stable or ``max_iter`` passes ran. A component whose support empties
    out is returned as all zeros and reported through
    :class:`EmptySupportWarning`.
    """
    if cutoff < 0.0:
        raise ValueError("cutoff must be nonnegative")
    psi, y = _check_pair(basis_matrix, derivatives)
    base = sindy_lstsq(psi, y)
    if cutoff == 0.0:
        return base

    d = base.coefficients.shape[1]
    xi = base.coefficients.copy()
    mask = np.abs(xi) >= cutoff
    empty: set[int] = set()
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        xi = np.zeros_like(xi)
        for i in range(d):
            support = mask[:, i]
            if not support.any():
                if i not in empty:
                    empty.add(i)
                    warnings.warn(
                        f"thresholding removed every feature of component {i}",
                        EmptySupportWarning,
                        stacklevel=2,
                    )
                continue
            sub, _, _ = _linalg.min_norm_lstsq(psi[support], y[i : i + 1])
            xi[support, i] = sub[0]
        new_mask = np.abs(xi) >= cutoff
        xi[~new_mask] = 0.0
        if np.array_equal(new_mask, mask):
            break
        mask = new_mask
    residual = float(np.linalg.norm(y - xi.T @ psi))
    return SindyResult(
        coefficients=xi,
        residual=residual,
        active_mask=mask,
        iterations=iterations,
        empty_support_components=tuple(sorted(empty)),
    )


def mandy_identify(
    states: np.ndarray,
    derivatives: np.ndarray,
    dictionary: Dictionary,
    threshold: float = 0.0,
) -> CoefficientModel:
    """Tensor-train identification of the coefficient tensor.

    Builds the feature tensor train of ``states``, pseudoinverts it with
    the given relative singular-value cutoff, and contracts with
    ``derivatives``. The elapsed wall time (including the feature-train
    construction), the sparse storage size, and the solve rank are
    recorded in the model metadata.
    """
    states = np.asarray(states, dtype=np.float64)
    derivatives = np.asarray(derivatives, dtype=np.float64)
    if states.shape != derivatives.shape:
        raise ShapeMismatch(
            f"states {states.shape} and derivatives {derivatives.shape} differ"
        )
    started = time.perf_counter()
    basis = build_basis_tt(dictionary, states)
    pinv = tt_pinv(basis, threshold=threshold)
    xi = pinv.solve(derivatives)
    elapsed = time.perf_counter() - started
    d, m = states.shape
    meta = {
        "threshold": threshold,
        "m": m,
        "d": d,
        "wall_time": elapsed,
        "storage_entries": basis.nnz_count,
        "rank": pinv.rank,
    }
    return CoefficientModel(xi, dictionary, meta=meta)


def model_residual(
    model: CoefficientModel, states: np.ndarray, derivatives: np.ndarray
) -> float:
    """Frobenius norm of the model's defect on a snapshot set."""
    derivatives = np.asarray(derivatives, dtype=np.float64)
    return float(np.linalg.norm(derivatives - model.rhs_matrix(states)))
