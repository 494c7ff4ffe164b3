import csv
import json

import numpy as np
import pytest

from ttident.diagnostics import (
    BENCH_COLUMNS,
    run_benchmark,
    truncation_profile,
    write_benchmark_csv,
    write_benchmark_manifest,
)
from ttident.exceptions import ConfigError, SizeCapExceeded
from ttident.tensor_train import random_tt, tt_to_full, vectorize


class TestTruncationProfile:
    def test_exact_rank_spectrum_has_zero_tails(self):
        rng = np.random.default_rng(0)
        t = random_tt((3, 3, 3, 3), 2, rng)
        profile = truncation_profile(vectorize(tt_to_full(t)), (3, 3, 3, 3))
        for eps in profile.eps_of_r:
            norm = profile.squared_norm
            assert eps[2] <= 1e-12 * norm  # rank 2 and beyond capture everything
            assert eps[-1] == 0.0

    def test_uniform_gram_entropy(self):
        # a vector whose first-cut Gram matrix is I_k / k has entropy log k
        k = 4
        vec = np.eye(k).reshape(-1, order="F") / np.sqrt(k)
        profile = truncation_profile(vec, (k, k))
        assert profile.renyi_half[0] == pytest.approx(np.log(k), abs=1e-12)
        # eps(r) = (k - r) / k for the flat spectrum
        assert profile.eps_of_r[0][1] == pytest.approx((k - 1) / k, abs=1e-12)

    def test_eps_is_tail_of_own_spectrum(self):
        rng = np.random.default_rng(1)
        vec = rng.standard_normal(36)
        profile = truncation_profile(vec, (6, 6))
        spectrum = profile.spectra[0]
        eps = profile.eps_of_r[0]
        for r in range(eps.size):
            assert eps[r] == pytest.approx(spectrum[r:].sum(), rel=1e-12, abs=1e-12)
            head = spectrum[:r].sum()
            assert spectrum.sum() - eps[r] == pytest.approx(head, rel=1e-12, abs=1e-12)

    def test_eps_non_increasing_and_descending_spectra(self):
        rng = np.random.default_rng(2)
        vec = rng.standard_normal(16)
        profile = truncation_profile(vec, (2, 2, 2, 2))
        for spectrum, eps in zip(profile.spectra, profile.eps_of_r):
            assert np.all(np.diff(spectrum) <= 1e-12)
            assert np.all(spectrum >= 0.0)
            assert np.all(np.diff(eps) <= 1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_truncation_bound_holds(self, seed):
        # the rank-limited sweep truncation obeys the 2 * sum of tails bound
        from ttident.tensor_train import tt_from_full

        rng = np.random.default_rng(seed + 10)
        vec = rng.standard_normal(16)
        tensor = vec.reshape((2, 2, 2, 2), order="F")
        profile = truncation_profile(vec, (2, 2, 2, 2))
        for rank in (1, 2, 3):
            truncated = tt_from_full(tensor, max_rank=rank)
            err_sq = np.linalg.norm(tt_to_full(truncated) - tensor) ** 2
            assert err_sq <= profile.bound(rank) + 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_entropy_inequality(self, seed):
        # log eps_l(r) <= S_half - log(2 r) whenever the tail is positive
        rng = np.random.default_rng(seed + 20)
        vec = rng.standard_normal(16)
        profile = truncation_profile(vec, (2, 2, 2, 2))
        for l in range(profile.n_cuts):
            for rank in (1, 2, 3):
                eps = profile.eps_of_r[l][min(rank, profile.eps_of_r[l].size - 1)]
                if eps > 0.0:
                    assert np.log(eps) <= (
                        profile.renyi_half[l] - np.log(2 * rank) + 1e-10
                    )

    def test_validation(self):
        with pytest.raises(ValueError):
            truncation_profile(np.zeros(5), (2, 3))
        with pytest.raises(ValueError):
            truncation_profile(np.zeros(4), (4,))
        with pytest.raises(SizeCapExceeded):
            truncation_profile(np.zeros(2**24), (2,) * 24, max_entries=1000)


@pytest.fixture(scope="module")
def records():
    # d = 5 keeps the feature matrix tall, where both methods resolve the
    # same well-conditioned solution
    cells = [
        {"method": "sindy", "system": "fpu", "d": 5, "m": 100},
        {"method": "mandy", "system": "fpu", "d": 5, "m": 100, "epsilon": 0.0},
        {"method": "sindy", "system": "fpu", "d": 12, "m": 100},
    ]
    return run_benchmark(cells, seed=5)


class TestBenchmark:
    def test_methods_share_data_and_agree(self, records):
        sindy, mandy = records[0], records[1]
        assert sindy.status == "ok" and mandy.status == "ok"
        assert abs(sindy.rel_error - mandy.rel_error) <= 1e-8

    def test_oversized_dense_cell_skipped(self, records):
        skipped = records[2]
        assert skipped.status == "skipped"
        assert skipped.storage_entries == 4**12 * 100
        assert skipped.rel_error is None

    def test_determinism(self, records):
        cells = [
            {"method": "sindy", "system": "fpu", "d": 5, "m": 100},
            {"method": "mandy", "system": "fpu", "d": 5, "m": 100, "epsilon": 0.0},
            {"method": "sindy", "system": "fpu", "d": 12, "m": 100},
        ]
        again = run_benchmark(cells, seed=5)
        for a, b in zip(records, again):
            assert a.rel_error == b.rel_error
            assert a.storage_entries == b.storage_entries
            assert a.status == b.status

    def test_storage_accounting(self, records):
        assert records[0].storage_entries == 4**5 * 100
        assert records[1].storage_entries == 4 * 100 * 5 + 100

    def test_failed_cell_recorded(self):
        cells = [{"method": "mandy", "system": "chua", "d": 5, "m": 10}]
        records = run_benchmark(cells, seed=0)
        assert records[0].status == "failed"
        assert "dimension" in records[0].detail

    def test_invalid_cells_rejected(self):
        with pytest.raises(ConfigError):
            run_benchmark([{"method": "lasso", "system": "fpu", "d": 3, "m": 10}])
        with pytest.raises(ConfigError):
            run_benchmark([{"method": "sindy", "system": "fpu", "d": 3, "m": 10,
                            "extra": 1}])

    def test_csv_and_manifest(self, records, tmp_path):
        csv_path = tmp_path / "bench.csv"
        manifest_path = tmp_path / "bench.json"
        write_benchmark_csv(records, csv_path)
        write_benchmark_manifest(records, manifest_path, seed=5)
        with open(csv_path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == list(BENCH_COLUMNS)
        assert len(rows) == len(records) + 1
        assert rows[3][7] == "skipped"
        manifest = json.loads(manifest_path.read_text())
        assert manifest["seed"] == 5
        assert len(manifest["cells"]) == len(records)
        assert manifest["cells"][0]["system"] == "fpu"
