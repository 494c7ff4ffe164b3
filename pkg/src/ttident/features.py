"""Scalar function dictionaries and product-feature construction.

A dictionary is an ordered set of scalar functions together with a layout
that fixes how products of the functions over the state coordinates are
enumerated:

* ``coordinate_major``: one factor per state coordinate, each carrying all
  ``p`` function values of that coordinate; the feature tensor has ``d``
  modes of size ``p``.
* ``function_major``: one factor per function, each carrying its values on
  all ``d`` coordinates; the feature tensor has ``p`` modes of size ``d``
  (or ``d + 1`` when a constant entry is prepended to every factor).

Snapshot feature matrices and their block-diagonal tensor-train
counterpart are built from the same per-mode factor matrices, but through
independent code paths so that one can validate the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor_train import TensorTrain, _check_cap

COORDINATE_MAJOR = "coordinate_major"
FUNCTION_MAJOR = "function_major"

_KINDS = ("constant", "monomial", "sine", "cosine", "absolute", "x_abs_x")


@dataclass(frozen=True)
class BasisFunction:
    """A scalar basis function, evaluable elementwise on arrays."""

    kind: str
    power: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown basis function kind {self.kind!r}")
        if self.kind == "monomial":
            if self.power is None or self.power < 0:
                raise ValueError("monomial needs a nonnegative power")
        elif self.power is not None:
            raise ValueError(f"{self.kind} takes no power argument")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "constant":
            return np.ones_like(x)
        if self.kind == "monomial":
            return x**self.power
        if self.kind == "sine":
            return np.sin(x)
        if self.kind == "cosine":
            return np.cos(x)
        if self.kind == "absolute":
            return np.abs(x)
        return x * np.abs(x)  # x_abs_x

    @property
    def label(self) -> str:
        if self.kind == "constant":
            return "1"
        if self.kind == "monomial":
            return {0: "1", 1: "x"}.get(self.power, f"x^{self.power}")
        if self.kind == "sine":
            return "sin"
        if self.kind == "cosine":
            return "cos"
        if self.kind == "absolute":
            return "|x|"
        return "x|x|"

    def to_config(self) -> dict:
        doc = {"kind": self.kind}
        if self.kind == "monomial":
            doc["power"] = self.power
        return doc

    @classmethod
    def from_config(cls, doc: dict) -> "BasisFunction":
        unknown = set(doc) - {"kind", "power"}
        if unknown:
            raise ValueError(f"unknown basis function keys: {sorted(unknown)}")
        return cls(doc["kind"], doc.get("power"))


def constant() -> BasisFunction:
    return BasisFunction("constant")


def monomial(power: int) -> BasisFunction:
    return BasisFunction("monomial", power)


def sine() -> BasisFunction:
    return BasisFunction("sine")


def cosine() -> BasisFunction:
    return BasisFunction("cosine")


def absolute() -> BasisFunction:
    return BasisFunction("absolute")


def x_abs_x() -> BasisFunction:
    return BasisFunction("x_abs_x")


@dataclass(frozen=True)
class Dictionary:
    """Ordered basis functions plus the product-feature layout.

    ``prepend_constant`` is only meaningful for the function-major layout,
    where it adds a leading 1 to every factor so that single-coordinate
    terms appear among the product features.
    """

    functions: tuple[BasisFunction, ...]
    layout: str = COORDINATE_MAJOR
    prepend_constant: bool = False

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        if len(self.functions) < 1:
            raise ValueError("a dictionary needs at least one function")
        if self.layout not in (COORDINATE_MAJOR, FUNCTION_MAJOR):
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.prepend_constant and self.layout != FUNCTION_MAJOR:
            raise ValueError("prepend_constant applies to the function-major layout")

    @property
    def size(self) -> int:
        return len(self.functions)

    def n_feature_modes(self, d: int) -> int:
        return d if self.layout == COORDINATE_MAJOR else self.size

    def mode_size(self, d: int) -> int:
        if self.layout == COORDINATE_MAJOR:
            return self.size
        return d + 1 if self.prepend_constant else d

    def feature_mode_sizes(self, d: int) -> tuple[int, ...]:
        return (self.mode_size(d),) * self.n_feature_modes(d)

    def feature_count(self, d: int) -> int:
        return self.mode_size(d) ** self.n_feature_modes(d)

    def factor_matrices(self, states: np.ndarray) -> list[np.ndarray]:
        """Per-mode factor matrices of shape ``(mode_size, m)``.

        Column ``k`` of factor ``i`` is the i-th vector of the rank-one
        feature decomposition of snapshot ``k``.
        """
        states = np.asarray(states, dtype=np.float64)
        if states.ndim != 2:
            raise ValueError("states must be a (d, m) matrix")
        d, m = states.shape
        if self.layout == COORDINATE_MAJOR:
            return [
                np.stack([f(states[i]) for f in self.functions])
                for i in range(d)
            ]
        factors = []
        for f in self.functions:
            block = f(states)
            if self.prepend_constant:
                block = np.vstack([np.ones((1, m)), block])
            factors.append(block)
        return factors

    def rank_one_vectors(self, state: np.ndarray) -> list[np.ndarray]:
        """Factors of the rank-one feature tensor of a single state."""
        state = np.asarray(state, dtype=np.float64)
        return [f[:, 0] for f in self.factor_matrices(state[:, None])]

    def to_config(self) -> dict:
        return {
            "functions": [f.to_config() for f in self.functions],
            "layout": self.layout,
            "prepend_constant": self.prepend_constant,
        }

    @classmethod
    def from_config(cls, doc: dict) -> "Dictionary":
        unknown = set(doc) - {"functions", "layout", "prepend_constant"}
        if unknown:
            raise ValueError(f"unknown dictionary keys: {sorted(unknown)}")
        return cls(
            tuple(BasisFunction.from_config(f) for f in doc["functions"]),
            layout=doc.get("layout", COORDINATE_MAJOR),
            prepend_constant=bool(doc.get("prepend_constant", False)),
        )


def eval_rank_one_cm(dictionary: Dictionary, state: np.ndarray) -> list[np.ndarray]:
    """Coordinate-major rank-one factors: vector ``i`` holds all function
    values at coordinate ``i``."""
    if dictionary.layout != COORDINATE_MAJOR:
        raise ValueError("dictionary is not coordinate-major")
    return dictionary.rank_one_vectors(state)


def eval_rank_one_fm(dictionary: Dictionary, state: np.ndarray) -> list[np.ndarray]:
    """Function-major rank-one factors: vector ``j`` holds function ``j``
    evaluated on every coordinate (with an optional leading 1)."""
    if dictionary.layout != FUNCTION_MAJOR:
        raise ValueError("dictionary is not function-major")
    return dictionary.rank_one_vectors(state)


def build_basis_matrix(
    dictionary: Dictionary,
    states: np.ndarray,
    max_entries: int | None = None,
) -> np.ndarray:
    """Dense feature matrix with one column per snapshot.

    Row ``j`` enumerates the product features with the first factor index
    running fastest; column ``k`` is the vectorized rank-one feature tensor
    of snapshot ``k``.
    """
    factors = dictionary.factor_matrices(np.asarray(states, dtype=np.float64))
    m = factors[0].shape[1]
    rows = math.prod(f.shape[0] for f in factors)
    _check_cap(rows * m, max_entries, "the dense basis matrix")
    out = factors[0]
    for fac in factors[1:]:
        out = np.einsum("ak,bk->abk", out, fac).reshape(
            out.shape[0] * fac.shape[0], m, order="F"
        )
    return out


class BasisTensorTT:
    """Snapshot feature tensor in tensor-train form with sparse cores.

    The first core stacks the per-snapshot factors of the first mode, each
    interior core is block-diagonal with one vector block per snapshot, and
    the final core is the stacked standard basis of the snapshot space.
    Only the factor matrices are stored (one dense vector per block), so
    the storage grows linearly in the number of snapshots while every
    interior link rank equals ``m``.
    """

    def __init__(self, factors: Sequence[np.ndarray], dictionary: Dictionary | None = None):
        factors = [np.asarray(f, dtype=np.float64) for f in factors]
        if not factors:
            raise ValueError("need at least one factor matrix")
        m = factors[0].shape[1]
        if any(f.ndim != 2 or f.shape[1] != m for f in factors):
            raise ValueError("factor matrices must share the snapshot count")
        self._factors = tuple(factors)
        self.dictionary = dictionary
        for f in self._factors:
            f.flags.writeable = False

    @property
    def factors(self) -> tuple[np.ndarray, ...]:
        return self._factors

    @property
    def sample_count(self) -> int:
        return self._factors[0].shape[1]

    @property
    def mode_sizes(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self._factors) + (self.sample_count,)

    @property
    def order(self) -> int:
        return len(self._factors) + 1

    @property
    def ranks(self) -> tuple[int, ...]:
        m = self.sample_count
        return (1,) + (m,) * (len(self._factors) - 1) + (m, 1)

    @property
    def nnz_count(self) -> int:
        """Stored entries: one dense vector per block plus the unit vectors
        of the final core."""
        return sum(f.size for f in self._factors) + self.sample_count

    def dense_entry_count(self) -> int:
        """Entries of the matricized (dense) counterpart."""
        return math.prod(f.shape[0] for f in self._factors) * self.sample_count

    def to_tensor_train(self, max_entries: int | None = None) -> TensorTrain:
        """Materialize the block-diagonal cores as a dense-core train."""
        m = self.sample_count
        largest = max(f.shape[0] for f in self._factors) * m * m
        _check_cap(largest, max_entries, "a dense block-diagonal core")
        cores = [self._factors[0][None, :, :]]
        idx = np.arange(m)
        for fac in self._factors[1:]:
            block = np.zeros((m, fac.shape[0], m))
            block[idx, :, idx] = fac.T
            cores.append(block)
        cores.append(np.eye(m)[:, :, None])
        return TensorTrain(cores, copy=False)


def build_basis_tt(dictionary: Dictionary, states: np.ndarray) -> BasisTensorTT:
    """Feature tensor train of a snapshot matrix ``states`` of shape (d, m)."""
    return BasisTensorTT(
        dictionary.factor_matrices(np.asarray(states, dtype=np.float64)),
        dictionary=dictionary,
    )
