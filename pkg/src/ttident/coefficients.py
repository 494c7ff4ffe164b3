"""Recovered coefficient tensors, evaluable as a right-hand side.

A coefficient model pairs a dictionary with the linear weights mapping its
product features to the state derivative: ``x_dot = coefficients^T @
features(x)``. The weights are held either as a dense
``(feature_count, d)`` matrix or as a tensor train over the feature modes
plus a final output mode of size ``d``. Evaluation contracts the weights
with the rank-one feature factors of the query states, so the tensor-train
variant never materializes the feature space.
"""

from __future__ import annotations

import json

import numpy as np

from .exceptions import ModeMismatch
from .features import Dictionary
from .tensor_train import (
    TensorTrain,
    matricize,
    tt_add,
    tt_frobenius_norm,
    tt_scale,
    tt_to_full,
)


class CoefficientModel:
    """Coefficients of an identified system over a feature dictionary.

    Parameters
    ----------
    coefficients : TensorTrain or ndarray
        Either a train whose last mode is the state dimension, or a dense
        ``(feature_count, d)`` matrix.
    dictionary : Dictionary
        The feature dictionary the coefficients refer to.
    meta : dict, optional
        Free-form metadata (threshold, sample count, wall time, ...).
    """

    def __init__(self, coefficients, dictionary: Dictionary, meta: dict | None = None):
        self.dictionary = dictionary
        self.meta = dict(meta) if meta else {}
        if isinstance(coefficients, TensorTrain):
            self._tt: TensorTrain | None = coefficients
            self._matrix: np.ndarray | None = None
            d = coefficients.mode_sizes[-1]
            expected = dictionary.feature_mode_sizes(d)
            if coefficients.mode_sizes[:-1] != expected:
                raise ModeMismatch(
                    f"feature modes {coefficients.mode_sizes[:-1]} do not match "
                    f"the dictionary layout {expected}"
                )
            self._dim = d
        else:
            matrix = np.asarray(coefficients, dtype=np.float64)
            if matrix.ndim != 2:
                raise ValueError("dense coefficients must be a matrix")
            self._tt = None
            self._matrix = matrix
            self._dim = matrix.shape[1]
            if dictionary.feature_count(self._dim) != matrix.shape[0]:
                raise ModeMismatch(
                    f"{matrix.shape[0]} rows do not match the "
                    f"{dictionary.feature_count(self._dim)} dictionary features"
                )
            self._matrix.flags.writeable = False

    @property
    def variant(self) -> str:
        return "tt" if self._tt is not None else "dense"

    @property
    def state_dimension(self) -> int:
        return self._dim

    @property
    def tensor_train(self) -> TensorTrain | None:
        return self._tt

    def rhs(self, state: np.ndarray) -> np.ndarray:
        """Derivative predicted at a single state vector."""
        state = np.asarray(state, dtype=np.float64)
        if state.shape != (self._dim,):
            raise ValueError(f"state must have shape ({self._dim},)")
        return self.rhs_matrix(state[:, None])[:, 0]

    def rhs_matrix(self, states: np.ndarray) -> np.ndarray:
        """Derivatives predicted at the columns of a ``(d, m)`` state matrix."""
        states = np.asarray(states, dtype=np.float64)
        if states.ndim != 2 or states.shape[0] != self._dim:
            raise ValueError(f"states must be ({self._dim}, m)")
        factors = self.dictionary.factor_matrices(states)
        if self._tt is not None:
            cores = self._tt.cores
            env = np.einsum("xc,xk->kc", cores[0][0], factors[0])
            for core, fac in zip(cores[1:-1], factors[1:]):
                env = np.einsum("ka,axb,xk->kb", env, core, fac, optimize=True)
            return (env @ cores[-1][:, :, 0]).T
        # dense path: accumulate the feature products column by column
        out = factors[0]
        for fac in factors[1:]:
            out = np.einsum("ak,bk->abk", out, fac).reshape(
                out.shape[0] * fac.shape[0], -1, order="F"
            )
        return self._matrix.T @ out

    def as_matrix(self, max_entries: int | None = None) -> np.ndarray:
        """Dense ``(feature_count, d)`` coefficient matrix (cap-checked)."""
        if self._matrix is not None:
            return self._matrix
        full = tt_to_full(self._tt, max_entries=max_entries)
        return matricize(full, full.ndim - 1)

    def as_tensor_train(self) -> TensorTrain:
        """Tensor-train form of the coefficients (lifting the dense matrix)."""
        if self._tt is not None:
            return self._tt
        shape = self.dictionary.feature_mode_sizes(self._dim) + (self._dim,)
        return TensorTrain.from_full(self._matrix.reshape(shape, order="F"))

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        doc = {
            "variant": self.variant,
            "state_dimension": self._dim,
            "dictionary": self.dictionary.to_config(),
            "meta": self.meta,
        }
        if self._tt is not None:
            doc["tensor"] = self._tt.to_json_dict()
        else:
            doc["matrix"] = self._matrix.tolist()
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CoefficientModel":
        dictionary = Dictionary.from_config(doc["dictionary"])
        if doc["variant"] == "tt":
            coeffs = TensorTrain.from_json_dict(doc["tensor"])
        elif doc["variant"] == "dense":
            coeffs = np.asarray(doc["matrix"], dtype=np.float64)
        else:
            raise ValueError(f"unknown coefficient variant {doc['variant']!r}")
        model = cls(coeffs, dictionary, meta=doc.get("meta"))
        if model.state_dimension != doc["state_dimension"]:
            raise ValueError("state_dimension disagrees with the stored weights")
        return model

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_json_dict(), handle)

    @classmethod
    def load(cls, path) -> "CoefficientModel":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json_dict(json.load(handle))


def relative_error(model: CoefficientModel, reference: CoefficientModel) -> float:
    """Relative Frobenius distance ``|a - b| / |b|`` between two models.

    Uses the dense difference when both models are dense and tensor-train
    arithmetic otherwise, so mixed comparisons never materialize the
    feature space.
    """
    if model.dictionary != reference.dictionary:
        raise ModeMismatch("models use different dictionaries")
    if model.state_dimension != reference.state_dimension:
        raise ModeMismatch("models have different state dimensions")
    if model.variant == "dense" and reference.variant == "dense":
        ref = reference.as_matrix()
        return float(
            np.linalg.norm(model.as_matrix() - ref) / np.linalg.norm(ref)
        )
    a = model.as_tensor_train()
    b = reference.as_tensor_train()
    diff = tt_add(a, tt_scale(b, -1.0))
    return tt_frobenius_norm(diff) / tt_frobenius_norm(b)
