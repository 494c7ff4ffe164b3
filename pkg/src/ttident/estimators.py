"""Estimators with the scikit-learn fit/predict protocol.

Both estimators consume sample-major arrays (rows are snapshots, columns
are state coordinates, matching the scikit-learn convention) and learn a
model of the form ``x_dot = coefficients^T @ features(x)``:

* :class:`SINDy` solves the least-squares problem on the dense feature
  matrix, optionally with sequential hard thresholding;
* :class:`MANDy` solves it in the tensor-train format and never builds
  the dense feature matrix.

``get_params``/``set_params`` follow the scikit-learn contract, so the
estimators compose with its model-selection utilities without requiring
scikit-learn itself.
"""

from __future__ import annotations

import inspect

import numpy as np

from .coefficients import CoefficientModel
from .exceptions import NotFittedError
from .features import Dictionary, build_basis_matrix
from .regression import mandy_identify, model_residual, sindy_lstsq, sindy_threshold
from .validation import check_sample_matrix, check_snapshot_pair


class BaseEstimator:
    """Parameter introspection following the scikit-learn protocol."""

    @classmethod
    def _param_names(cls):
        signature = inspect.signature(cls.__init__)
        return [name for name in signature.parameters if name != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "BaseEstimator":
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"invalid parameter {name!r} for {type(self).__name__}"
                )
            setattr(self, name, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"

    def _fitted_model(self) -> CoefficientModel:
        model = getattr(self, "model_", None)
        if model is None:
            raise NotFittedError(
                f"this {type(self).__name__} instance is not fitted yet"
            )
        return model

    def predict(self, X) -> np.ndarray:
        """Predicted derivatives at the rows of ``X``, shape ``(n, d)``."""
        model = self._fitted_model()
        X = check_sample_matrix(X)
        if X.shape[1] != model.state_dimension:
            raise ValueError(
                f"X has {X.shape[1]} columns, the model expects "
                f"{model.state_dimension}"
            )
        return model.rhs_matrix(X.T).T

    def score(self, X, Y) -> float:
        """Negative Frobenius defect ``-||Y - predict(X)||`` (higher is
        better, zero is perfect)."""
        X, Y = check_snapshot_pair(X, Y)
        return -model_residual(self._fitted_model(), X.T, Y.T)


class SINDy(BaseEstimator):
    """Dense least-squares identification with optional hard thresholding.

    Parameters
    ----------
    dictionary : Dictionary
        Feature dictionary defining the product features.
    threshold : float
        Hard-thresholding cutoff on coefficient magnitudes; 0 (default)
        keeps the plain least-squares solution.
    max_iter : int
        Maximum threshold/refit passes.
    dense_cap : int or None
        Entry cap for the dense feature matrix (None: package default).

    Attributes
    ----------
    model_ : CoefficientModel
    coefficients_ : ndarray of shape (feature_count, d)
    residual_ : float
    active_mask_ : boolean ndarray of shape (feature_count, d)
    n_iter_ : int
    """

    def __init__(
        self,
        dictionary: Dictionary | None = None,
        threshold: float = 0.0,
        max_iter: int = 20,
        dense_cap: int | None = None,
    ):
        self.dictionary = dictionary
        self.threshold = threshold
        self.max_iter = max_iter
        self.dense_cap = dense_cap

    def fit(self, X, Y) -> "SINDy":
        if self.dictionary is None:
            raise ValueError("a dictionary is required to fit")
        X, Y = check_snapshot_pair(X, Y)
        states = X.T
        derivatives = Y.T
        psi = build_basis_matrix(self.dictionary, states, max_entries=self.dense_cap)
        if self.threshold > 0.0:
            result = sindy_threshold(
                psi, derivatives, cutoff=self.threshold, max_iter=self.max_iter
            )
        else:
            result = sindy_lstsq(psi, derivatives)
        self.result_ = result
        self.coefficients_ = result.coefficients
        self.residual_ = result.residual
        self.active_mask_ = result.active_mask
        self.n_iter_ = result.iterations
        self.n_features_in_ = X.shape[1]
        self.model_ = CoefficientModel(
            result.coefficients,
            self.dictionary,
            meta={"method": "sindy", "threshold": self.threshold, "m": X.shape[0]},
        )
        return self


class MANDy(BaseEstimator):
    """Tensor-train least-squares identification.

    Parameters
    ----------
    dictionary : Dictionary
        Feature dictionary defining the product features.
    svd_threshold : float
        Relative singular-value cutoff of the tensor-train pseudoinverse;
        0 (default) keeps everything above the machine floor.

    Attributes
    ----------
    model_ : CoefficientModel (tensor-train variant)
    residual_ : float
    storage_entries_ : int
        Stored entries of the sparse feature train.
    rank_ : int
        Number of singular values kept by the pseudoinverse.
    """

    def __init__(
        self, dictionary: Dictionary | None = None, svd_threshold: float = 0.0
    ):
        self.dictionary = dictionary
        self.svd_threshold = svd_threshold

    def fit(self, X, Y) -> "MANDy":
        if self.dictionary is None:
            raise ValueError("a dictionary is required to fit")
        X, Y = check_snapshot_pair(X, Y)
        states = X.T
        derivatives = Y.T
        model = mandy_identify(
            states, derivatives, self.dictionary, threshold=self.svd_threshold
        )
        model.meta["method"] = "mandy"
        self.model_ = model
        self.residual_ = model_residual(model, states, derivatives)
        self.storage_entries_ = model.meta["storage_entries"]
        self.rank_ = model.meta["rank"]
        self.n_features_in_ = X.shape[1]
        return self
