"""Tensor trains with dense order-3 cores.

A tensor train represents a ``d``-way array through a chain of cores
``G[i]`` of shape ``(r[i], n[i], r[i+1])`` with boundary ranks
``r[0] = r[d] = 1``; entry ``T[j_1, ..., j_d]`` is the product of the
matrices ``G[i][:, j_i, :]``.

Multi-indices are flattened with the *first* index running fastest
throughout the package, i.e. ``(j_1, ..., j_d)`` maps to
``j_1 + n_1*j_2 + n_1*n_2*j_3 + ...``. :func:`matricize` and
:func:`vectorize` realize this bijection for dense arrays, and the core
unfoldings follow the same convention. Serialized cores therefore need
not be byte-comparable with toolboxes that flatten the other way round;
all results are invariant under the choice.

Instances are immutable after construction (core buffers are marked
read-only) and every operation returns a new value, so concurrent
read-only use from multiple threads is safe.
"""

from __future__ import annotations

import json
import math
from typing import Sequence

import numpy as np

from . import _linalg
from .exceptions import ModeMismatch, SizeCapExceeded

#: Default maximum number of entries any dense materialization may have.
DENSE_SIZE_CAP = 10_000_000


def _check_cap(n_entries: int, max_entries: int | None, what: str) -> None:
    cap = DENSE_SIZE_CAP if max_entries is None else int(max_entries)
    if n_entries > cap:
        raise SizeCapExceeded(
            f"{what} would hold {n_entries} entries, above the cap of {cap}"
        )


def vectorize(array: np.ndarray) -> np.ndarray:
    """Flatten a dense array with the first index running fastest."""
    return np.asarray(array).reshape(-1, order="F")


def matricize(array: np.ndarray, n_row_modes: int) -> np.ndarray:
    """Reshape a dense array into a matrix over a split of its modes.

    The first ``n_row_modes`` modes become the row index and the remaining
    modes the column index, both flattened first-index-fastest.
    """
    array = np.asarray(array)
    if not 0 < n_row_modes < array.ndim:
        raise ValueError(f"row mode count {n_row_modes} not in (0, {array.ndim})")
    rows = int(np.prod(array.shape[:n_row_modes]))
    return array.reshape(rows, -1, order="F")


def left_unfold(core: np.ndarray) -> np.ndarray:
    """Matrix of shape ``(r_prev * n, r_next)`` grouping the first two modes."""
    r_prev, n, r_next = core.shape
    return core.reshape(r_prev * n, r_next, order="F")


def right_unfold(core: np.ndarray) -> np.ndarray:
    """Matrix of shape ``(r_prev, n * r_next)`` grouping the last two modes."""
    r_prev, n, r_next = core.shape
    return core.reshape(r_prev, n * r_next, order="F")


def fold_left(matrix: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`left_unfold`."""
    return matrix.reshape(shape, order="F")


def fold_right(matrix: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`right_unfold`."""
    return matrix.reshape(shape, order="F")


class TensorTrain:
    """Immutable chain of order-3 cores.

    Parameters
    ----------
    cores : sequence of ndarray
        Core ``i`` must have shape ``(r[i], n[i], r[i+1])`` with
        ``r[0] = r[-1] = 1`` and matching adjacent ranks.
    copy : bool
        Copy the core buffers (default). Pass ``False`` only for freshly
        created arrays that no one else holds.
    """

    __slots__ = ("_cores",)

    def __init__(self, cores: Sequence[np.ndarray], *, copy: bool = True):
        prepared = []
        for i, core in enumerate(cores):
            arr = np.asarray(core, dtype=np.float64)
            if arr.ndim != 3:
                raise ValueError(f"core {i} must be order 3, got shape {arr.shape}")
            if min(arr.shape) < 1:
                raise ValueError(f"core {i} has an empty mode: shape {arr.shape}")
            if copy and arr.flags.writeable:
                arr = arr.copy()
            prepared.append(arr)
        if not prepared:
            raise ValueError("a tensor train needs at least one core")
        if prepared[0].shape[0] != 1 or prepared[-1].shape[2] != 1:
            raise ValueError("boundary ranks must equal 1")
        for i in range(len(prepared) - 1):
            if prepared[i].shape[2] != prepared[i + 1].shape[0]:
                raise ValueError(
                    f"rank mismatch between cores {i} and {i + 1}: "
                    f"{prepared[i].shape[2]} vs {prepared[i + 1].shape[0]}"
                )
        for arr in prepared:
            arr.flags.writeable = False
        self._cores = tuple(prepared)

    @property
    def cores(self) -> tuple[np.ndarray, ...]:
        return self._cores

    @property
    def order(self) -> int:
        return len(self._cores)

    @property
    def mode_sizes(self) -> tuple[int, ...]:
        return tuple(core.shape[1] for core in self._cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        return (1,) + tuple(core.shape[2] for core in self._cores)

    @property
    def n_entries(self) -> int:
        """Total number of stored core entries."""
        return sum(core.size for core in self._cores)

    def __repr__(self) -> str:
        return (
            f"TensorTrain(mode_sizes={self.mode_sizes}, ranks={self.ranks})"
        )

    def to_full(self, max_entries: int | None = None) -> np.ndarray:
        """Materialize the represented dense array (cap-checked)."""
        return tt_to_full(self, max_entries=max_entries)

    @classmethod
    def from_full(
        cls,
        array: np.ndarray,
        threshold: float = 0.0,
        max_rank: int | None = None,
    ) -> "TensorTrain":
        return tt_from_full(array, threshold=threshold, max_rank=max_rank)

    def norm(self) -> float:
        return tt_frobenius_norm(self)

    def dot(self, other: "TensorTrain") -> float:
        return tt_dot(self, other)

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        """Single-document representation with nested core arrays."""
        return {
            "mode_sizes": list(self.mode_sizes),
            "ranks": list(self.ranks),
            "cores": [core.tolist() for core in self._cores],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TensorTrain":
        cores = [np.asarray(core, dtype=np.float64) for core in doc["cores"]]
        tt = cls(cores)
        if list(tt.mode_sizes) != list(doc["mode_sizes"]):
            raise ValueError("mode_sizes field disagrees with the stored cores")
        if list(tt.ranks) != list(doc["ranks"]):
            raise ValueError("ranks field disagrees with the stored cores")
        return tt

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_json_dict(), handle)

    @classmethod
    def load(cls, path) -> "TensorTrain":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json_dict(json.load(handle))


def _require_same_modes(a: TensorTrain, b: TensorTrain) -> None:
    if a.mode_sizes != b.mode_sizes:
        raise ModeMismatch(
            f"mode sizes differ: {a.mode_sizes} vs {b.mode_sizes}"
        )


def tt_to_full(t: TensorTrain, max_entries: int | None = None) -> np.ndarray:
    """Contract all cores into the represented dense array."""
    sizes = t.mode_sizes
    _check_cap(math.prod(sizes), max_entries, "the dense tensor")
    block = t.cores[0][0]  # (n_1, r_1)
    for core in t.cores[1:]:
        r_prev, n, r_next = core.shape
        block = block @ core.reshape(r_prev, n * r_next)
        block = block.reshape(-1, r_next)
    return block.reshape(sizes)


def tt_from_full(
    array: np.ndarray,
    threshold: float = 0.0,
    max_rank: int | None = None,
) -> TensorTrain:
    """Decompose a dense array by sequential compact SVDs.

    At each split, singular values with ``s_k / s_max < threshold`` are
    discarded (threshold 0 drops only values that are zero up to roundoff),
    and the kept rank is additionally capped at ``max_rank`` when given.
    """
    array = np.asarray(array, dtype=np.float64)
    if array.ndim == 0:
        raise ValueError("cannot decompose a scalar")
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold}")
    if array.ndim == 1:
        return TensorTrain([array[None, :, None]], copy=False)
    sizes = array.shape
    cores: list[np.ndarray] = []
    rank = 1
    work = array.reshape(rank * sizes[0], -1)
    for i in range(array.ndim - 1):
        u, s, vt = _linalg.truncated_svd(work, threshold)
        if max_rank is not None and s.size > max_rank:
            u, s, vt = u[:, :max_rank], s[:max_rank], vt[:max_rank]
        if s.size == 0:  # zero block: keep a rank-1 zero core
            cores.append(np.zeros((rank, sizes[i], 1)))
            rank = 1
            work = np.zeros((rank * sizes[i + 1], work.shape[1] // sizes[i + 1]))
            continue
        r_next = s.size
        cores.append(u.reshape(rank, sizes[i], r_next))
        rank = r_next
        work = (s[:, None] * vt).reshape(rank * sizes[i + 1], -1)
    cores.append(work.reshape(rank, sizes[-1], 1))
    return TensorTrain(cores, copy=False)


def random_tt(
    mode_sizes: Sequence[int],
    ranks: Sequence[int] | int,
    rng: np.random.Generator,
    scale: float = 1.0,
) -> TensorTrain:
    """Tensor train with i.i.d. normal core entries.

    ``ranks`` is either the full boundary-included list ``r_0 .. r_d`` or a
    single interior rank used for every link (boundaries are forced to 1).
    """
    d = len(mode_sizes)
    if isinstance(ranks, int):
        rank_list = [1] + [ranks] * (d - 1) + [1]
    else:
        rank_list = list(ranks)
        if len(rank_list) != d + 1 or rank_list[0] != 1 or rank_list[-1] != 1:
            raise ValueError("ranks must be r_0..r_d with unit boundaries")
    cores = [
        scale * rng.standard_normal((rank_list[i], mode_sizes[i], rank_list[i + 1]))
        for i in range(d)
    ]
    return TensorTrain(cores, copy=False)


def orthonormalize_left(
    t: TensorTrain, upto: int | None = None, threshold: float = 0.0
) -> TensorTrain:
    """Left-orthonormalize the first ``upto`` cores.

    After the sweep, ``left_unfold(core)`` has orthonormal columns for each
    of the first ``upto`` cores (default: all but the last), the represented
    tensor is unchanged, and link ranks may shrink to the compact-SVD rank.
    A zero tensor keeps rank-1 zero cores.
    """
    d = t.order
    if upto is None:
        upto = d - 1
    if not 0 <= upto <= d - 1:
        raise ValueError(f"upto must lie in [0, {d - 1}], got {upto}")
    cores = [core.copy() for core in t.cores]
    for i in range(upto):
        r_prev, n, r_next = cores[i].shape
        u, s, vt = _linalg.truncated_svd(left_unfold(cores[i]), threshold)
        if s.size == 0:
            u = np.zeros((r_prev * n, 1))
            carry = np.zeros((1, r_next))
        else:
            carry = s[:, None] * vt
        cores[i] = fold_left(u, (r_prev, n, u.shape[1]))
        cores[i + 1] = np.einsum("ab,bnc->anc", carry, cores[i + 1])
    return TensorTrain(cores, copy=False)


def orthonormalize_right(
    t: TensorTrain, start: int | None = None, threshold: float = 0.0
) -> TensorTrain:
    """Right-orthonormalize the cores from index ``start`` on.

    After the sweep, ``right_unfold(core)`` has orthonormal rows for the
    cores at positions ``start .. d-1`` (default ``start = 1``); the factor
    carrying the norm is absorbed into core ``start - 1``.
    """
    d = t.order
    if start is None:
        start = 1
    if not 1 <= start <= d:
        raise ValueError(f"start must lie in [1, {d}], got {start}")
    cores = [core.copy() for core in t.cores]
    for i in range(d - 1, start - 1, -1):
        r_prev, n, r_next = cores[i].shape
        u, s, vt = _linalg.truncated_svd(right_unfold(cores[i]), threshold)
        if s.size == 0:
            vt = np.zeros((1, n * r_next))
            carry = np.zeros((r_prev, 1))
        else:
            carry = u * s[None, :]
        cores[i] = fold_right(vt, (vt.shape[0], n, r_next))
        cores[i - 1] = np.einsum("anb,bc->anc", cores[i - 1], carry)
    return TensorTrain(cores, copy=False)


def tt_add(a: TensorTrain, b: TensorTrain) -> TensorTrain:
    """Sum of two tensor trains; interior link ranks add."""
    _require_same_modes(a, b)
    if a.order == 1:
        return TensorTrain([a.cores[0] + b.cores[0]], copy=False)
    cores = []
    for i, (ca, cb) in enumerate(zip(a.cores, b.cores)):
        ra0, n, ra1 = ca.shape
        rb0, _, rb1 = cb.shape
        if i == 0:
            cores.append(np.concatenate([ca, cb], axis=2))
        elif i == a.order - 1:
            cores.append(np.concatenate([ca, cb], axis=0))
        else:
            block = np.zeros((ra0 + rb0, n, ra1 + rb1))
            block[:ra0, :, :ra1] = ca
            block[ra0:, :, ra1:] = cb
            cores.append(block)
    return TensorTrain(cores, copy=False)


def tt_scale(a: TensorTrain, factor: float) -> TensorTrain:
    """Multiply the represented tensor by a scalar."""
    cores = [a.cores[0] * float(factor), *a.cores[1:]]
    return TensorTrain(cores, copy=False)


def tt_dot(a: TensorTrain, b: TensorTrain) -> float:
    """Inner product of the represented tensors by sequential contraction."""
    _require_same_modes(a, b)
    env = np.ones((1, 1))
    for ca, cb in zip(a.cores, b.cores):
        env = np.einsum("ab,anc,bnd->cd", env, ca, cb, optimize=True)
    return float(env[0, 0])


def tt_frobenius_norm(t: TensorTrain) -> float:
    """Frobenius norm of the represented tensor.

    Computed through a right-to-left orthonormalization pass, which stays
    accurate for trains whose represented tensor is much smaller than the
    individual cores (e.g. differences of nearly equal trains).
    """
    carry: np.ndarray | None = None
    for core in t.cores[:0:-1]:
        if carry is not None:
            core = np.einsum("anb,bc->anc", core, carry)
        carry, _ = _linalg.orthonormal_rows(right_unfold(core))
    final = t.cores[0]
    if carry is not None:
        final = np.einsum("anb,bc->anc", final, carry)
    return float(np.linalg.norm(final))
