import numpy as np
import pytest

from ttident.exceptions import SizeCapExceeded
from ttident.features import (
    BasisFunction,
    Dictionary,
    absolute,
    build_basis_matrix,
    build_basis_tt,
    constant,
    cosine,
    eval_rank_one_cm,
    eval_rank_one_fm,
    monomial,
    sine,
    x_abs_x,
)
from ttident.tensor_train import matricize, tt_to_full


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


class TestBasisFunction:
    def test_evaluations(self):
        x = np.array([-2.0, 0.0, 1.5])
        assert np.array_equal(constant()(x), [1.0, 1.0, 1.0])
        assert np.array_equal(monomial(2)(x), [4.0, 0.0, 2.25])
        assert np.array_equal(absolute()(x), [2.0, 0.0, 1.5])
        assert np.array_equal(x_abs_x()(x), [-4.0, 0.0, 2.25])
        assert np.allclose(sine()(x), np.sin(x))
        assert np.allclose(cosine()(x), np.cos(x))

    def test_config_round_trip(self):
        for f in [constant(), monomial(3), sine(), cosine(), absolute(), x_abs_x()]:
            assert BasisFunction.from_config(f.to_config()) == f

    def test_validation(self):
        with pytest.raises(ValueError):
            BasisFunction("monomial")
        with pytest.raises(ValueError):
            BasisFunction("sine", power=2)
        with pytest.raises(ValueError):
            BasisFunction("sinh")

    def test_labels(self):
        assert monomial(0).label == "1"
        assert monomial(1).label == "x"
        assert monomial(3).label == "x^3"
        assert x_abs_x().label == "x|x|"


class TestDictionary:
    def test_validation(self):
        with pytest.raises(ValueError):
            Dictionary([])
        with pytest.raises(ValueError):
            Dictionary([monomial(1)], layout="diagonal")
        with pytest.raises(ValueError):
            Dictionary([monomial(1)], prepend_constant=True)  # cm layout

    def test_mode_arithmetic(self):
        cm = Dictionary([monomial(k) for k in range(4)])
        assert cm.feature_mode_sizes(10) == (4,) * 10
        assert cm.feature_count(10) == 4**10
        fm = Dictionary([sine(), cosine()], layout="function_major", prepend_constant=True)
        assert fm.feature_mode_sizes(10) == (11, 11)
        assert fm.feature_count(10) == 121

    def test_config_round_trip(self):
        d = Dictionary([monomial(1), absolute()], layout="function_major",
                       prepend_constant=True)
        assert Dictionary.from_config(d.to_config()) == d
        with pytest.raises(ValueError):
            Dictionary.from_config({"functions": [], "shape": "x"})


class TestRankOneEvaluation:
    def test_cm_monomials_at_zero(self):
        d = Dictionary([monomial(k) for k in range(4)])
        vectors = eval_rank_one_cm(d, np.zeros(3))
        for v in vectors:
            assert np.array_equal(v, [1.0, 0.0, 0.0, 0.0])

    def test_cm_outer_product_entry(self):
        d = Dictionary([monomial(k) for k in range(4)])
        v = eval_rank_one_cm(d, np.array([2.0, 3.0]))
        # entry (j_1, j_2) = (2, 3): x_1^2 * x_2^3 ... here entry [2][3] of factors
        assert v[0][2] * v[1][3] == pytest.approx(4.0 * 27.0)
        # the stated product 2 * 9 = 18 at (j_1, j_2) = (1, 2)
        assert v[0][1] * v[1][2] == pytest.approx(18.0)

    def test_fm_with_prepended_constant(self):
        d = Dictionary([monomial(1), absolute()], layout="function_major",
                       prepend_constant=True)
        v1, v2 = eval_rank_one_fm(d, np.array([1.0, -2.0, 3.0]))
        assert np.array_equal(v1, [1.0, 1.0, -2.0, 3.0])
        assert np.array_equal(v2, [1.0, 1.0, 2.0, 3.0])
        # feature x_1 * |x_3|
        assert v1[1] * v2[3] == pytest.approx(3.0)

    def test_fm_trig_at_zero(self):
        d = Dictionary([sine(), cosine()], layout="function_major",
                       prepend_constant=True)
        v1, v2 = eval_rank_one_fm(d, np.zeros(4))
        assert np.array_equal(v1, [1.0, 0.0, 0.0, 0.0, 0.0])
        assert np.array_equal(v2, np.ones(5))

    def test_layout_guards(self):
        cm = Dictionary([monomial(1)])
        fm = Dictionary([monomial(1)], layout="function_major")
        with pytest.raises(ValueError):
            eval_rank_one_fm(cm, np.zeros(2))
        with pytest.raises(ValueError):
            eval_rank_one_cm(fm, np.zeros(2))


class TestBasisMatrix:
    def test_two_mode_enumeration_order(self):
        d = Dictionary([monomial(0), monomial(1)])
        a, b = 0.7, -1.3
        column = build_basis_matrix(d, np.array([[a], [b]]))[:, 0]
        assert np.allclose(column, [1.0, a, b, a * b])

    def test_shape(self):
        d = Dictionary([monomial(k) for k in range(3)])
        rng = np.random.default_rng(0)
        out = build_basis_matrix(d, rng.standard_normal((3, 7)))
        assert out.shape == (27, 7)

    def test_zero_snapshots_select_constant(self):
        d = Dictionary([monomial(k) for k in range(3)])
        out = build_basis_matrix(d, np.zeros((2, 4)))
        expected = np.zeros((9, 4))
        expected[0] = 1.0
        assert np.array_equal(out, expected)

    def test_columns_are_vectorized_rank_one_tensors(self):
        d = Dictionary([sine(), cosine()], layout="function_major",
                       prepend_constant=True)
        rng = np.random.default_rng(1)
        states = rng.uniform(-np.pi, np.pi, size=(3, 5))
        out = build_basis_matrix(d, states)
        for k in range(5):
            v1, v2 = eval_rank_one_fm(d, states[:, k])
            outer = np.outer(v1, v2)
            assert np.allclose(out[:, k], outer.reshape(-1, order="F"))

    def test_size_cap(self):
        d = Dictionary([monomial(k) for k in range(4)])
        with pytest.raises(SizeCapExceeded):
            build_basis_matrix(d, np.zeros((14, 10)))


class TestBasisTensorTrain:
    def test_ranks_equal_sample_count(self):
        d = Dictionary([monomial(k) for k in range(3)])
        basis = build_basis_tt(d, np.zeros((4, 6)))
        assert basis.ranks == (1, 6, 6, 6, 6, 1)
        assert basis.mode_sizes == (3, 3, 3, 3, 6)

    @pytest.mark.parametrize("layout", ["cm", "fm"])
    def test_matricization_matches_basis_matrix(self, layout):
        rng = np.random.default_rng(2)
        if layout == "cm":
            d = Dictionary([monomial(k) for k in range(3)])
            states = rng.uniform(-1, 1, size=(3, 8))
        else:
            d = Dictionary([monomial(1), absolute()], layout="function_major",
                           prepend_constant=True)
            states = rng.uniform(-1, 1, size=(3, 8))
        basis = build_basis_tt(d, states)
        full = tt_to_full(basis.to_tensor_train())
        dense = matricize(full, full.ndim - 1)
        direct = build_basis_matrix(d, states)
        assert np.max(np.abs(dense - direct)) <= 1e-13

    def test_nnz_count_exact(self):
        # one factor matrix per basis core plus one unit vector per snapshot
        d = Dictionary([monomial(k) for k in range(4)])
        basis = build_basis_tt(d, np.zeros((10, 100)))
        assert basis.nnz_count == 4 * 100 * 10 + 100
        assert basis.dense_entry_count() == 4**10 * 100

    def test_chua_fm_storage_counts(self):
        d = Dictionary([monomial(1), absolute()], layout="function_major",
                       prepend_constant=True)
        basis = build_basis_tt(d, np.zeros((3, 2000)))
        assert basis.nnz_count == 18000
        assert basis.dense_entry_count() == 32000

    def test_block_structure(self):
        d = Dictionary([monomial(0), monomial(1)])
        rng = np.random.default_rng(3)
        states = rng.standard_normal((3, 4))
        t = build_basis_tt(d, states).to_tensor_train()
        interior = t.cores[1]
        for k in range(4):
            for j in range(4):
                if j != k:
                    assert np.array_equal(interior[k, :, j], np.zeros(2))
        assert np.array_equal(t.cores[-1][:, :, 0], np.eye(4))

    def test_to_tensor_train_cap(self):
        d = Dictionary([monomial(k) for k in range(4)])
        basis = build_basis_tt(d, np.zeros((3, 2000)))
        with pytest.raises(SizeCapExceeded):
            basis.to_tensor_train(max_entries=10_000)
