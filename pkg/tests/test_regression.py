import itertools

import numpy as np
import pytest

from ttident.coefficients import CoefficientModel, relative_error
from ttident.exceptions import EmptySupportWarning, ModeMismatch, ShapeMismatch
from ttident.features import Dictionary, build_basis_matrix, monomial
from ttident.regression import (
    mandy_identify,
    model_residual,
    sindy_lstsq,
    sindy_threshold,
)
from ttident.systems import (
    ChuaParams,
    FpuParams,
    chua_rhs,
    exact_coefficients,
    fpu_dictionary,
    fpu_rhs,
    generate_snapshots,
)
from ttident.tensor_train import tt_to_full


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


class TestSindyLstsq:
    def test_scalar_linear_system(self):
        # x' = -x sampled at x in {1, 2, 3} with dictionary {1, x}
        d = Dictionary([monomial(0), monomial(1)])
        states = np.array([[1.0, 2.0, 3.0]])
        psi = build_basis_matrix(d, states)
        result = sindy_lstsq(psi, -states)
        assert np.allclose(result.coefficients[:, 0], [0.0, -1.0], atol=1e-12)
        assert result.residual <= 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            sindy_lstsq(np.zeros((4, 5)), np.zeros((2, 6)))

    def test_matches_numpy_pinv(self):
        rng = np.random.default_rng(0)
        for shape in [(40, 12), (12, 40), (15, 15)]:
            psi = rng.standard_normal(shape)
            y = rng.standard_normal((3, shape[1]))
            got = sindy_lstsq(psi, y).coefficients.T
            want = y @ np.linalg.pinv(psi)
            assert rel_err(got, want) <= 1e-10

    def test_minimum_norm_on_rank_deficient_basis(self):
        rng = np.random.default_rng(1)
        base = rng.standard_normal((3, 30))
        psi = np.vstack([base, base[0] + base[1]])  # rank 3, 4 rows
        y = rng.standard_normal((2, 30))
        got = sindy_lstsq(psi, y).coefficients.T
        want = y @ np.linalg.pinv(psi)
        assert rel_err(got, want) <= 1e-10

    def test_interpolation_when_square_full_rank(self):
        rng = np.random.default_rng(2)
        psi = rng.standard_normal((8, 8)) + 2 * np.eye(8)
        y = rng.standard_normal((2, 8))
        result = sindy_lstsq(psi, y)
        assert result.residual <= 1e-8 * np.linalg.norm(y)

    def test_residual_not_beaten_by_random_search(self):
        rng = np.random.default_rng(3)
        psi = rng.standard_normal((5, 40))
        y = rng.standard_normal((2, 40))
        result = sindy_lstsq(psi, y)
        for _ in range(100):
            other = result.coefficients + 1e-3 * rng.standard_normal((5, 2))
            assert (
                np.linalg.norm(y - other.T @ psi)
                >= result.residual - 1e-10
            )


class TestSindyThreshold:
    def test_zero_cutoff_is_plain_lstsq(self):
        rng = np.random.default_rng(4)
        psi = rng.standard_normal((6, 30))
        y = rng.standard_normal((2, 30))
        assert np.array_equal(
            sindy_threshold(psi, y, cutoff=0.0).coefficients,
            sindy_lstsq(psi, y).coefficients,
        )

    def test_recovers_sparse_support_with_brute_force_oracle(self):
        # x' = -x data over {1, x, x^2}: brute-force the best single-feature
        # fits to confirm which support the threshold loop should keep
        d = Dictionary([monomial(k) for k in range(3)])
        states = np.array([[0.5, 1.0, 1.5, 2.0, 2.5]])
        psi = build_basis_matrix(d, states)
        y = -states
        best = None
        for size in (1, 2, 3):
            for support in itertools.combinations(range(3), size):
                sub = np.linalg.pinv(psi[list(support)]).T
                coeff = y @ sub.T if False else y @ np.linalg.pinv(psi[list(support)])
                res = np.linalg.norm(y - coeff @ psi[list(support)])
                if best is None or res < best[0] - 1e-12:
                    best = (res, support)
        assert best[1] == (1,)  # the linear feature alone fits exactly
        result = sindy_threshold(psi, y, cutoff=0.5)
        assert result.active_mask[:, 0].tolist() == [False, True, False]
        assert result.coefficients[1, 0] == pytest.approx(-1.0, abs=1e-12)
        assert np.all(result.coefficients[[0, 2], 0] == 0.0)

    @pytest.mark.filterwarnings("ignore::ttident.exceptions.EmptySupportWarning")
    def test_masked_entries_exactly_zero(self):
        rng = np.random.default_rng(5)
        psi = rng.standard_normal((8, 50))
        y = rng.standard_normal((3, 50))
        result = sindy_threshold(psi, y, cutoff=0.2, max_iter=10)
        assert np.all(result.coefficients[~result.active_mask] == 0.0)

    @pytest.mark.filterwarnings("ignore::ttident.exceptions.EmptySupportWarning")
    def test_residual_nondecreasing_in_cutoff(self):
        rng = np.random.default_rng(6)
        psi = rng.standard_normal((8, 60))
        y = rng.standard_normal((2, 60))
        residuals = [
            sindy_threshold(psi, y, cutoff=lam).residual
            for lam in (0.0, 0.05, 0.1, 0.3, 0.8)
        ]
        for lo, hi in zip(residuals, residuals[1:]):
            assert hi >= lo - 1e-10

    def test_empty_support_warns_and_zeroes(self):
        d = Dictionary([monomial(0), monomial(1)])
        states = np.array([[0.1, 0.2, 0.3]])
        y = 1e-4 * states
        psi = build_basis_matrix(d, states)
        with pytest.warns(EmptySupportWarning):
            result = sindy_threshold(psi, y, cutoff=10.0)
        assert np.all(result.coefficients == 0.0)
        assert result.empty_support_components == (0,)


@pytest.fixture(scope="module")
def chua_data():
    # the default span crosses both scroll lobes, so |x_1| and x_1 are
    # independent on the data
    return generate_snapshots("chua", dt=0.01, t_end=20.0)


class TestChuaIdentification:
    def test_monomials_identify_linear_rows_only(self, chua_data):
        from ttident.systems import chua_monomial_dictionary

        d = chua_monomial_dictionary()
        psi = build_basis_matrix(d, chua_data.states)
        result = sindy_lstsq(psi, chua_data.derivatives)
        xi_t = result.coefficients.T
        # x_1, x_2, x_3 features sit at flat indices 1, 3, 9 over modes (3,3,3)
        assert xi_t[1, 1] == pytest.approx(1.0, abs=1e-6)
        assert xi_t[1, 3] == pytest.approx(-1.0, abs=1e-6)
        assert xi_t[1, 9] == pytest.approx(1.0, abs=1e-6)
        assert xi_t[2, 3] == pytest.approx(-14.87, abs=1e-6)
        row_resid = np.linalg.norm(chua_data.derivatives[0] - xi_t[0] @ psi)
        assert row_resid > 1e-3
        for i in (1, 2):
            assert np.linalg.norm(chua_data.derivatives[i] - xi_t[i] @ psi) <= 1e-6

    def test_abs_dictionary_recovers_exactly(self, chua_data):
        from ttident.systems import chua_dictionary

        d = chua_dictionary()
        psi = build_basis_matrix(d, chua_data.states)
        result = sindy_lstsq(psi, chua_data.derivatives)
        model = CoefficientModel(result.coefficients, d)
        exact = exact_coefficients("chua", ChuaParams())
        assert relative_error(model, exact) <= 1e-8

    def test_threshold_mask_matches_exact_pattern(self, chua_data):
        from ttident.systems import chua_dictionary

        d = chua_dictionary()
        psi = build_basis_matrix(d, chua_data.states)
        result = sindy_threshold(psi, chua_data.derivatives, cutoff=0.1)
        exact = exact_coefficients("chua", ChuaParams()).as_matrix()
        expected = np.abs(exact) > 1e-10 * np.max(np.abs(exact))
        assert np.array_equal(result.active_mask, expected)


class TestMandy:
    def test_matches_sindy_on_small_fpu(self):
        # unit-box states keep the feature matrix well conditioned, so the
        # two routes must agree to near machine precision
        from ttident.systems import fpu_rhs

        params = FpuParams(d=4, beta=0.7)
        rng = np.random.default_rng(11)
        states = rng.uniform(-1.0, 1.0, size=(4, 200))
        derivatives = fpu_rhs(params, states)
        dictionary = fpu_dictionary()
        tt_model = mandy_identify(states, derivatives, dictionary)
        psi = build_basis_matrix(dictionary, states)
        dense = sindy_lstsq(psi, derivatives)
        dense_model = CoefficientModel(dense.coefficients, dictionary)
        assert relative_error(tt_model, dense_model) <= 1e-10

    def test_metadata_recorded(self):
        params = FpuParams(d=3)
        snaps = generate_snapshots("fpu", params, m=60, seed=12)
        model = mandy_identify(snaps.states, snaps.derivatives, fpu_dictionary(),
                               threshold=1e-10)
        assert model.meta["threshold"] == 1e-10
        assert model.meta["m"] == 60
        assert model.meta["d"] == 3
        assert model.meta["wall_time"] > 0
        assert model.meta["storage_entries"] == 4 * 60 * 3 + 60

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            mandy_identify(np.zeros((3, 5)), np.zeros((3, 6)), fpu_dictionary())

    def test_residual_small_for_representable_system(self):
        params = FpuParams(d=3)
        snaps = generate_snapshots("fpu", params, m=150, seed=13)
        model = mandy_identify(snaps.states, snaps.derivatives, fpu_dictionary())
        res = model_residual(model, snaps.states, snaps.derivatives)
        assert res <= 1e-8 * np.linalg.norm(snaps.derivatives)

    @pytest.mark.parametrize("system", ["chua", "fpu", "kuramoto"])
    def test_model_fidelity_on_fresh_states(self, system):
        # exactly representable systems: the fitted model reproduces the
        # governing equations on states it never saw
        from ttident.systems import (
            KuramotoParams,
            canonical_dictionary,
            kuramoto_rhs,
        )

        if system == "chua":
            params, box = ChuaParams(), 2.0
            snaps = generate_snapshots("chua", dt=0.01, t_end=20.0)
            rhs = chua_rhs
        elif system == "fpu":
            params, box = FpuParams(d=6, beta=0.7), 0.1
            snaps = generate_snapshots("fpu", params, m=800, seed=31)
            rhs = fpu_rhs
        else:
            params, box = KuramotoParams(d=6), 2 * np.pi
            snaps = generate_snapshots("kuramoto", params, m=250, dt=0.1, seed=31)
            rhs = kuramoto_rhs
        model = mandy_identify(
            snaps.states, snaps.derivatives, canonical_dictionary(system)
        )
        rng = np.random.default_rng(77)
        d = snaps.d
        states = rng.uniform(-box, box, size=(d, 100))
        predicted = model.rhs_matrix(states)
        truth = rhs(params, states)
        scaled = np.linalg.norm(predicted - truth, axis=0) / (
            1.0 + np.linalg.norm(truth, axis=0)
        )
        assert float(scaled.max()) <= 1e-4


class TestCoefficientModel:
    def test_rhs_matches_dense_variant(self):
        params = FpuParams(d=3)
        snaps = generate_snapshots("fpu", params, m=120, seed=14)
        dictionary = fpu_dictionary()
        tt_model = mandy_identify(snaps.states, snaps.derivatives, dictionary)
        dense_model = CoefficientModel(tt_model.as_matrix(), dictionary)
        rng = np.random.default_rng(15)
        x = rng.uniform(-0.1, 0.1, size=(3, 20))
        assert rel_err(tt_model.rhs_matrix(x), dense_model.rhs_matrix(x)) <= 1e-10

    def test_single_state_evaluation(self):
        exact = exact_coefficients("chua", ChuaParams())
        assert np.allclose(exact.rhs(np.zeros(3)), np.zeros(3), atol=1e-12)
        assert np.allclose(
            exact.rhs(np.array([1.0, 0.0, 0.0])),
            chua_rhs(ChuaParams(), np.array([1.0, 0.0, 0.0])),
            atol=1e-12,
        )

    def test_relative_error_self_is_zero(self):
        exact = exact_coefficients("chua", ChuaParams())
        assert relative_error(exact, exact) <= 1e-12

    def test_relative_error_dense_vs_tt(self):
        exact = exact_coefficients("chua", ChuaParams())
        dense = CoefficientModel(exact.as_matrix(), exact.dictionary)
        assert relative_error(dense, exact) <= 1e-10
        assert relative_error(exact, dense) <= 1e-10

    def test_relative_error_dictionary_guard(self):
        a = exact_coefficients("chua", ChuaParams())
        params = FpuParams(d=3)
        b = exact_coefficients("fpu", params)
        with pytest.raises(ModeMismatch):
            relative_error(a, b)

    def test_json_round_trip(self, tmp_path):
        exact = exact_coefficients("chua", ChuaParams())
        path = tmp_path / "coeff.json"
        exact.save(path)
        loaded = CoefficientModel.load(path)
        assert loaded.variant == "tt"
        assert relative_error(loaded, exact) <= 1e-14
        dense = CoefficientModel(exact.as_matrix(), exact.dictionary)
        dense_path = tmp_path / "dense.json"
        dense.save(dense_path)
        dense_loaded = CoefficientModel.load(dense_path)
        assert dense_loaded.variant == "dense"
        assert relative_error(dense_loaded, exact) <= 1e-10

    def test_tt_lift_round_trip(self):
        exact = exact_coefficients("chua", ChuaParams())
        dense = CoefficientModel(exact.as_matrix(), exact.dictionary)
        lifted = dense.as_tensor_train()
        assert rel_err(
            tt_to_full(lifted), tt_to_full(exact.tensor_train)
        ) <= 1e-12
