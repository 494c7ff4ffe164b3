"""Truncation/entropy diagnostics and the benchmark harness.

The truncation profile of a vector reshaped to given mode sizes collects,
for every cut between modes, the eigenvalues of the cut's Gram matrix
(equivalently, the partial trace of the outer product over the modes
behind the cut), the tail sums bounding the error of rank-limited
tensor-train approximations, and the 1/2-Renyi entropy of the cut. The
benchmark harness runs identification methods over a parameter grid and
records timing, storage, and accuracy per cell.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .coefficients import CoefficientModel, relative_error
from .exceptions import ConfigError, SizeCapExceeded
from .features import build_basis_matrix
from .regression import mandy_identify, sindy_lstsq
from .systems import canonical_dictionary, default_params, exact_coefficients, generate_snapshots
from .tensor_train import DENSE_SIZE_CAP, _check_cap, matricize


@dataclass
class TruncationProfile:
    """Per-cut spectra and truncation-error functionals of a vector.

    For cut ``l`` (between modes ``l`` and ``l + 1``, 1-based over ``d - 1``
    interior cuts), ``spectra[l - 1]`` holds the descending eigenvalues of
    the cut Gram matrix; ``eps_of_r[l - 1][r]`` is the tail sum beyond rank
    ``r`` (index 0 holds the full trace); ``renyi_half[l - 1]`` is the
    1/2-Renyi entropy ``2 log tr(G^(1/2))``.
    """

    mode_sizes: tuple[int, ...]
    spectra: list[np.ndarray]
    eps_of_r: list[np.ndarray]
    renyi_half: list[float]
    squared_norm: float

    @property
    def n_cuts(self) -> int:
        return len(self.spectra)

    def bound(self, rank: int) -> float:
        """Squared-error bound ``2 * sum_l eps_l(rank)`` for uniform-rank
        tensor-train truncation."""
        total = 0.0
        for eps in self.eps_of_r:
            total += eps[min(rank, eps.size - 1)]
        return 2.0 * total

    def to_json_dict(self) -> dict:
        return {
            "mode_sizes": list(self.mode_sizes),
            "squared_norm": self.squared_norm,
            "cuts": [
                {
                    "cut": l + 1,
                    "eigenvalues": self.spectra[l].tolist(),
                    "eps_of_r": self.eps_of_r[l].tolist(),
                    "renyi_half": self.renyi_half[l],
                }
                for l in range(self.n_cuts)
            ],
        }


def truncation_profile(
    values: np.ndarray,
    mode_sizes,
    max_entries: int | None = None,
) -> TruncationProfile:
    """Cut spectra, truncation tails, and entropies of a reshaped vector.

    ``values`` must have exactly ``prod(mode_sizes)`` entries. Each cut's
    Gram matrix is formed from the cut's unfolding, which equals the
    partial trace of the outer product over the trailing modes.
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    mode_sizes = tuple(int(n) for n in mode_sizes)
    if len(mode_sizes) < 2:
        raise ValueError("need at least two modes")
    if values.size != math.prod(mode_sizes):
        raise ValueError(
            f"vector length {values.size} does not match modes {mode_sizes}"
        )
    _check_cap(values.size, max_entries, "the reshaped vector")
    tensor = values.reshape(mode_sizes, order="F")
    spectra, eps_tables, entropies = [], [], []
    for cut in range(1, len(mode_sizes)):
        unfolding = matricize(tensor, cut)
        gram = unfolding @ unfolding.T
        eigenvalues = np.linalg.eigvalsh(gram)[::-1]
        eigenvalues = np.clip(eigenvalues, 0.0, None)
        tails = np.concatenate([
            np.cumsum(eigenvalues[::-1])[::-1][1:], [0.0]
        ])
        # eps(r) = sum of eigenvalues beyond the first r, with eps(0) the trace
        eps = np.concatenate([[eigenvalues.sum()], tails])
        spectra.append(eigenvalues)
        eps_tables.append(eps)
        root_sum = np.sum(np.sqrt(eigenvalues))
        entropies.append(float(2.0 * np.log(max(root_sum, np.finfo(float).tiny))))
    return TruncationProfile(
        mode_sizes=mode_sizes,
        spectra=spectra,
        eps_of_r=eps_tables,
        renyi_half=entropies,
        squared_norm=float(values @ values),
    )


# -- benchmark harness -----------------------------------------------------


@dataclass
class BenchRecord:
    """Outcome of one benchmark cell."""

    method: str
    system: str
    d: int
    m: int
    epsilon: float
    seconds: float
    storage_entries: int
    rel_error: float | None
    status: str
    detail: str = ""


#: CSV column order of benchmark result files.
BENCH_COLUMNS = (
    "method", "d", "m", "epsilon", "seconds", "storage_entries",
    "rel_error", "status",
)

_VALID_METHODS = ("sindy", "mandy")


def _cell_seed(master_seed: int, system: str, d: int, m: int) -> int:
    # methods sharing (system, d, m) must see identical data
    material = [master_seed, d, m, sum(ord(c) for c in system)]
    return int(np.random.SeedSequence(material).generate_state(1)[0])


def run_benchmark(
    cells: list[dict],
    seed: int = 0,
    dense_cap: int | None = None,
) -> list[BenchRecord]:
    """Run identification over a grid of benchmark cells.

    Each cell is a dict with keys ``method`` ("sindy" or "mandy"),
    ``system``, ``d``, ``m``, and optionally ``epsilon`` (tensor-train
    truncation, ignored by the dense method). Cells whose dense feature
    matrix would exceed the cap are recorded as ``skipped``; failing cells
    are recorded as ``failed`` and the run continues. Data is generated
    deterministically per (seed, system, d, m), so both methods of one
    configuration see identical snapshots.
    """
    cap = DENSE_SIZE_CAP if dense_cap is None else int(dense_cap)
    records = []
    for cell in cells:
        unknown = set(cell) - {"method", "system", "d", "m", "epsilon"}
        if unknown:
            raise ConfigError(f"unknown benchmark cell keys: {sorted(unknown)}")
        method = cell["method"]
        system = cell["system"]
        d = int(cell["d"])
        m = int(cell["m"])
        epsilon = float(cell.get("epsilon", 0.0))
        if method not in _VALID_METHODS:
            raise ConfigError(f"unknown method {method!r}")
        try:
            records.append(
                _run_cell(method, system, d, m, epsilon, seed, cap)
            )
        except SizeCapExceeded as exc:
            dictionary = canonical_dictionary(system)
            records.append(BenchRecord(
                method, system, d, m, epsilon, 0.0,
                dictionary.feature_count(d) * m, None, "skipped", str(exc),
            ))
        except Exception as exc:  # noqa: BLE001 - per-cell failures recorded
            records.append(BenchRecord(
                method, system, d, m, epsilon, 0.0, 0, None, "failed", str(exc),
            ))
    return records


def _run_cell(method, system, d, m, epsilon, master_seed, cap) -> BenchRecord:
    if system == "chua" and d != 3:
        raise ConfigError("the circuit system has a fixed dimension of 3")
    dictionary = canonical_dictionary(system)
    params = default_params(system, d=d)
    cell_seed = _cell_seed(master_seed, system, d, m)
    if system == "chua":
        snaps = generate_snapshots(system, params, m=m, dt=0.01)
    else:
        snaps = generate_snapshots(system, params, m=m, seed=cell_seed)
    exact = exact_coefficients(system, params)

    if method == "sindy":
        feature_count = dictionary.feature_count(d)
        if feature_count * m > cap:
            raise SizeCapExceeded(
                f"dense basis matrix needs {feature_count * m} entries (cap {cap})"
            )
        psi = build_basis_matrix(dictionary, snaps.states, max_entries=cap)
        started = time.perf_counter()
        result = sindy_lstsq(psi, snaps.derivatives)
        elapsed = time.perf_counter() - started
        model = CoefficientModel(result.coefficients, dictionary)
        storage = psi.size
    else:
        model = mandy_identify(
            snaps.states, snaps.derivatives, dictionary, threshold=epsilon
        )
        elapsed = model.meta["wall_time"]
        storage = model.meta["storage_entries"]
    err = relative_error(model, exact)
    return BenchRecord(
        method, system, d, m, epsilon, elapsed, int(storage), float(err), "ok"
    )


def write_benchmark_csv(records: list[BenchRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(BENCH_COLUMNS)
        for record in records:
            row = asdict(record)
            writer.writerow([
                row["method"], row["d"], row["m"], row["epsilon"],
                f"{row['seconds']:.6f}", row["storage_entries"],
                "" if row["rel_error"] is None else f"{row['rel_error']:.12e}",
                row["status"],
            ])


def write_benchmark_manifest(records, path, seed, dense_cap=None) -> None:
    manifest = {
        "seed": seed,
        "dense_cap": DENSE_SIZE_CAP if dense_cap is None else dense_cap,
        "columns": list(BENCH_COLUMNS),
        "cells": [asdict(record) for record in records],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2)
