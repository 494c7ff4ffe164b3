"""Pseudoinversion of tensor trains without densification.

For a train with modes ``(n_1, ..., n_d, m)``, the Moore-Penrose
pseudoinverse of the matricization ``mat(T | n_1..n_d ; m)`` is obtained by
left-orthonormalizing the first ``d - 1`` cores, right-orthonormalizing the
last core, and taking one SVD of the d-th core's left unfolding. The
factors are kept in place: a left-orthonormal chain, a vector of inverted
singular values, and a row-orthonormal sample-side matrix. Applying the
pseudoinverse to a data matrix then amounts to replacing the final core.

Singular values with ``s_k / s_max < threshold`` are discarded throughout;
a threshold of 0 keeps everything above the machine floor.
"""

from __future__ import annotations

import json

import numpy as np

from . import _linalg
from .exceptions import DegenerateInput, ShapeMismatch
from .features import BasisTensorTT
from .tensor_train import (
    TensorTrain,
    _check_cap,
    fold_left,
    fold_right,
    left_unfold,
    right_unfold,
)


class TTPseudoinverse:
    """Cyclic-train factorization of a matricization's pseudoinverse.

    Attributes
    ----------
    left_cores : tuple of ndarray
        Left-orthonormal cores over the feature modes; the last one is the
        reshaped U factor of the central SVD.
    right_core : ndarray
        Row-orthonormal matrix of shape ``(rank, m)`` (the V factor
        contracted with the sample-side core).
    singular_values : ndarray
        Strictly positive, descending singular values of the matricization.
    threshold_used : float
        Relative cutoff the factorization was computed with.
    """

    def __init__(self, left_cores, right_core, singular_values, threshold_used=0.0):
        self.left_cores = tuple(np.asarray(c, dtype=np.float64) for c in left_cores)
        self.right_core = np.asarray(right_core, dtype=np.float64)
        self.singular_values = np.asarray(singular_values, dtype=np.float64)
        self.threshold_used = float(threshold_used)
        s = self.singular_values
        if s.size == 0 or np.any(s <= 0.0):
            raise ValueError("singular values must be strictly positive")
        if np.any(np.diff(s) > 0.0):
            raise ValueError("singular values must be descending")
        if self.left_cores[-1].shape[2] != s.size or self.right_core.shape[0] != s.size:
            raise ValueError("factor shapes disagree with the singular values")

    @property
    def feature_mode_sizes(self) -> tuple[int, ...]:
        return tuple(core.shape[1] for core in self.left_cores)

    @property
    def sample_count(self) -> int:
        return self.right_core.shape[1]

    @property
    def rank(self) -> int:
        return self.singular_values.size

    def solve(self, targets: np.ndarray) -> TensorTrain:
        """Least-squares coefficients for a data matrix of per-sample targets.

        ``targets`` has shape ``(d_out, m)``; the result is a train over the
        feature modes plus a final output mode of size ``d_out`` whose
        matricization equals ``targets @ pinv``. A zero target matrix yields
        the zero train.
        """
        targets = np.asarray(targets, dtype=np.float64)
        if targets.ndim != 2 or targets.shape[1] != self.sample_count:
            raise ShapeMismatch(
                f"targets must be (d_out, {self.sample_count}), got {targets.shape}"
            )
        last = (self.right_core @ targets.T) / self.singular_values[:, None]
        return TensorTrain([*self.left_cores, last[:, :, None]], copy=False)

    def to_dense(self, max_entries: int | None = None) -> np.ndarray:
        """Materialize the pseudoinverse as an ``(m, prod(n_i))`` matrix."""
        n_total = int(np.prod(self.feature_mode_sizes))
        _check_cap(n_total * self.sample_count, max_entries, "the dense pseudoinverse")
        u = self._orthonormal_factor(max_entries)
        return (self.right_core.T / self.singular_values[None, :]) @ u.T

    def _orthonormal_factor(self, max_entries: int | None = None) -> np.ndarray:
        """Dense column-orthonormal factor over the feature modes,
        rows enumerated first-index-fastest."""
        n_total = int(np.prod(self.feature_mode_sizes))
        _check_cap(n_total * self.rank, max_entries, "the dense orthonormal factor")
        block = self.left_cores[0][0]  # (n_1, r_1)
        for core in self.left_cores[1:]:
            block = np.einsum("Na,anb->Nnb", block, core).reshape(
                -1, core.shape[2], order="F"
            )
        return block

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "feature_mode_sizes": list(self.feature_mode_sizes),
            "sample_count": self.sample_count,
            "threshold_used": self.threshold_used,
            "singular_values": self.singular_values.tolist(),
            "left_cores": [core.tolist() for core in self.left_cores],
            "right_core": self.right_core.tolist(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TTPseudoinverse":
        pinv = cls(
            [np.asarray(c, dtype=np.float64) for c in doc["left_cores"]],
            np.asarray(doc["right_core"], dtype=np.float64),
            np.asarray(doc["singular_values"], dtype=np.float64),
            doc.get("threshold_used", 0.0),
        )
        if list(pinv.feature_mode_sizes) != list(doc["feature_mode_sizes"]):
            raise ValueError("feature_mode_sizes disagrees with the stored cores")
        if pinv.sample_count != doc["sample_count"]:
            raise ValueError("sample_count disagrees with the stored right core")
        return pinv

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_json_dict(), handle)

    @classmethod
    def load(cls, path) -> "TTPseudoinverse":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json_dict(json.load(handle))


def tt_pinv(
    tensor: TensorTrain | BasisTensorTT,
    threshold: float = 0.0,
    skip_right_orthonormalization: bool | None = None,
) -> TTPseudoinverse:
    """Pseudoinvert the split "feature modes vs. final sample mode".

    The input must have at least two cores; the last mode is interpreted as
    the sample mode. ``skip_right_orthonormalization`` defaults to True for
    :class:`BasisTensorTT` inputs, whose final core is right-orthonormal by
    construction, and False otherwise.

    Raises
    ------
    DegenerateInput
        If the matricization is identically zero.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold}")
    if isinstance(tensor, BasisTensorTT):
        if skip_right_orthonormalization is None or skip_right_orthonormalization:
            return _pinv_of_basis(tensor, threshold)
        tensor = tensor.to_tensor_train()
    if tensor.order < 2:
        raise ValueError("need at least two cores (feature modes plus samples)")
    skip = bool(skip_right_orthonormalization)
    return _pinv_of_train(tensor, threshold, skip)


def _pinv_of_train(t: TensorTrain, threshold: float, skip_right: bool) -> TTPseudoinverse:
    cores = [core.copy() for core in t.cores]
    n_feature = len(cores) - 1

    if not skip_right:
        r_prev, m, _ = cores[-1].shape
        u, s, vt = _linalg.truncated_svd(right_unfold(cores[-1]), threshold)
        if s.size == 0:
            raise DegenerateInput("the matricization is identically zero")
        cores[-1] = fold_right(vt, (vt.shape[0], m, 1))
        cores[-2] = np.einsum("anb,bc->anc", cores[-2], u * s[None, :])

    for i in range(n_feature - 1):
        r_prev, n, r_next = cores[i].shape
        u, s, vt = _linalg.truncated_svd(left_unfold(cores[i]), threshold)
        if s.size == 0:
            u = np.zeros((r_prev * n, 1))
            carry = np.zeros((1, r_next))
        else:
            carry = s[:, None] * vt
        cores[i] = fold_left(u, (r_prev, n, u.shape[1]))
        cores[i + 1] = np.einsum("ab,bnc->anc", carry, cores[i + 1])

    r_prev, n, r_next = cores[n_feature - 1].shape
    u, s, vt = _linalg.truncated_svd(left_unfold(cores[n_feature - 1]), threshold)
    if s.size == 0:
        raise DegenerateInput("the matricization is identically zero")
    cores[n_feature - 1] = fold_left(u, (r_prev, n, s.size))
    right_core = vt @ right_unfold(cores[n_feature])
    return TTPseudoinverse(cores[:n_feature], right_core, s, threshold)


def _pinv_of_basis(basis: BasisTensorTT, threshold: float) -> TTPseudoinverse:
    """Sweep specialized to block-diagonal cores.

    The working core at step ``i`` is the carried factor broadcast against
    the i-th factor matrix, so no ``(m, n, m)`` block core is ever formed.
    With threshold 0, plain QR factorizations replace the sweep SVDs; the
    central SVD is always taken in full.
    """
    factors = basis.factors
    n_feature = len(factors)
    m = basis.sample_count
    work = factors[0][None, :, :]
    cores: list[np.ndarray] = []
    for i in range(n_feature - 1):
        r_prev, n, _ = work.shape
        unfolding = left_unfold(work)
        if threshold == 0.0:
            q, carry = _linalg.orthonormal_columns(unfolding)
        else:
            u, s, vt = _linalg.truncated_svd(unfolding, threshold)
            if s.size == 0:
                u = np.zeros((r_prev * n, 1))
                carry = np.zeros((1, m))
            else:
                carry = s[:, None] * vt
            q = u
        cores.append(fold_left(q, (r_prev, n, q.shape[1])))
        work = np.einsum("am,xm->axm", carry, factors[i + 1])

    r_prev, n, _ = work.shape
    u, s, vt = _linalg.truncated_svd(left_unfold(work), threshold)
    if s.size == 0:
        raise DegenerateInput("the matricization is identically zero")
    cores.append(fold_left(u, (r_prev, n, s.size)))
    # the final core of a basis train is the stacked standard basis, so the
    # sample-side factor is vt itself
    return TTPseudoinverse(cores, vt, s, threshold)
