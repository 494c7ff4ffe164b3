"""Dense SVD/QR kernels shared by the tensor-train routines.

LAPACK is considerably faster on Fortran-ordered input here (the C-order
wrappers go through a slow conversion), so every kernel converts once and
lets LAPACK overwrite the copy. For strongly tall least-squares problems
the orthonormal factor is never formed; only its action is applied.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# Relative singular-value floor applied when the truncation threshold is 0:
# "compact" factorizations drop values that are zero up to roundoff.
MACHINE_CUTOFF = 1e-14

# Aspect ratio beyond which factoring through a raw QR (without forming Q)
# beats the divide-and-conquer SVD.
_TALL_RATIO = 6.0


def _fortran(a: np.ndarray) -> tuple[np.ndarray, bool]:
    f = np.asfortranarray(a, dtype=np.float64)
    return f, f is not a


def thin_svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compact SVD ``a = u @ diag(s) @ vt`` with ``min(a.shape)`` factors."""
    f, owned = _fortran(a)
    return scipy.linalg.svd(
        f,
        full_matrices=False,
        overwrite_a=owned,
        check_finite=False,
        lapack_driver="gesdd",
    )


def truncation_rank(s: np.ndarray, threshold: float) -> int:
    """Number of singular values kept under the relative-cutoff rule.

    Values with ``s[k] / s[0] < threshold`` are discarded; a threshold of 0
    keeps everything above the machine floor ``MACHINE_CUTOFF * s[0]``.
    Returns 0 for an all-zero spectrum.
    """
    if s.size == 0 or s[0] <= 0.0:
        return 0
    cutoff = (threshold if threshold > 0.0 else MACHINE_CUTOFF) * s[0]
    return int(np.searchsorted(-s, -cutoff, side="right"))


def truncated_svd(
    a: np.ndarray, threshold: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compact SVD with the relative cutoff applied; factors may be empty."""
    u, s, vt = thin_svd(a)
    rank = truncation_rank(s, threshold)
    return u[:, :rank], s[:rank], vt[:rank]


def orthonormal_columns(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Economy QR factorization ``a = q @ r`` with orthonormal ``q`` columns."""
    f, owned = _fortran(a)
    return scipy.linalg.qr(f, mode="economic", overwrite_a=owned, check_finite=False)


def orthonormal_rows(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor ``a = l @ q`` with orthonormal rows of ``q`` (LQ decomposition)."""
    q, r = orthonormal_columns(a.T)
    return r.T, q.T


def min_norm_lstsq(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float, int]:
    """Minimum-norm least-squares solve of ``min_z ||b - z @ a||_F``.

    Computed through the compact SVD of ``a`` with the machine-floor
    cutoff, i.e. ``z = b @ pinv(a)``. Strongly tall ``a`` is reduced by a
    raw QR factorization whose orthonormal factor is only ever applied to
    thin blocks (LAPACK ``ormqr``), never materialized.

    Returns
    -------
    z : ndarray
        Solution of shape ``(b.shape[0], a.shape[0])``.
    residual : float
        Frobenius norm of ``b - z @ a``.
    rank : int
        Numerical rank used for the pseudoinverse.
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError(
            f"incompatible shapes for least squares: {a.shape} and {b.shape}"
        )
    m, n = a.shape
    if m >= _TALL_RATIO * n:
        f, owned = _fortran(a)
        (h, tau), r = scipy.linalg.qr(f, mode="raw", overwrite_a=owned)
        ur, s, vt = scipy.linalg.svd(
            np.triu(r[:n]), full_matrices=False, check_finite=False
        )
        rank = truncation_rank(s, 0.0)
        ur, s, vt = ur[:, :rank], s[:rank], vt[:rank]
        # z = b @ v @ diag(1/s) @ u.T  with  u = Q @ ur
        inner = ur @ ((vt @ b.T) / s[:, None])  # (n, k)
        padded = np.zeros((m, b.shape[0]), order="F")
        padded[:n] = inner
        (ormqr,) = scipy.linalg.get_lapack_funcs(("ormqr",), (h,))
        zt, _, info = ormqr("L", "N", h, tau, padded, lwork=max(64 * b.shape[0], 64))
        if info != 0:
            raise np.linalg.LinAlgError(f"ormqr failed with info={info}")
        z = zt.T
    else:
        u, s, vt = thin_svd(a)
        rank = truncation_rank(s, 0.0)
        u, s, vt = u[:, :rank], s[:rank], vt[:rank]
        z = ((b @ vt.T) / s) @ u.T
    fitted = (b @ vt.T) @ vt
    residual = float(np.linalg.norm(b - fitted))
    return z, residual, rank
