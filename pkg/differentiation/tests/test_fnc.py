# differentiation/tests/test_fnc.py

import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from differentiation.exceptions import ConfigError, DataError, NumericError
from differentiation.fnc import (
    FeatureTable, chi2_scores, compute_fnc, fnc_pair_names, fnc_to_matrix, load_fnc_table,
    lower_triangle_indices, minmax_apply, minmax_normalize_fit, pearson, save_fnc_table, select_top_k,
)
from differentiation.records import N_FNC_FEATURES, IcnMatrix


def table(X):
    X = np.asarray(X, dtype=float)
    return FeatureTable(X, [f'f{i}' for i in range(X.shape[1])])


class PearsonTestCase(SimpleTestCase):
    def test_reference_values(self):
        self.assertAlmostEqual(pearson([1, 2, 3, 4], [2, 4, 6, 8]), 1.0)
        self.assertAlmostEqual(pearson([1, 2, 3, 4], [4, 3, 2, 1]), -1.0)
        self.assertAlmostEqual(pearson([1, 2, 3, 4], [1, 3, 2, 4]), 0.8)

    def test_constant_input_is_numeric_error(self):
        with self.assertRaises(NumericError):
            pearson([1, 1, 1], [1, 2, 3])


class FncVectorTestCase(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(0)

    def test_pair_order(self):
        rows, cols = lower_triangle_indices(4)
        self.assertEqual(list(zip(rows, cols)), [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)])
        self.assertEqual(fnc_pair_names(3), ['icn1_icn0', 'icn2_icn0', 'icn2_icn1'])

    def test_length_and_range(self):
        fnc = compute_fnc(IcnMatrix(self.rng.standard_normal((105, 234)), 2.0))
        self.assertEqual(fnc.shape, (N_FNC_FEATURES,))
        self.assertTrue(np.all(np.abs(fnc) <= 1.0))

    def test_identical_channels_correlate_fully(self):
        data = self.rng.standard_normal((105, 234))
        data[9] = data[5]
        fnc = compute_fnc(IcnMatrix(data, 2.0))
        rows, cols = lower_triangle_indices(105)
        position = int(np.flatnonzero((rows == 9) & (cols == 5))[0])
        self.assertAlmostEqual(fnc[position], 1.0)

    def test_matches_pairwise_pearson(self):
        rows, cols = lower_triangle_indices(105)
        for _ in range(20):
            data = self.rng.standard_normal((105, 234))
            fnc = compute_fnc(IcnMatrix(data, 2.0))
            expected = np.array([pearson(data[i], data[j]) for i, j in zip(rows, cols)])
            np.testing.assert_allclose(fnc, expected, rtol=0, atol=1e-12)

    def test_padding_is_excluded(self):
        signal = self.rng.standard_normal((105, 200))
        padded = np.zeros((105, 234))
        padded[:, :200] = signal
        np.testing.assert_array_equal(
            compute_fnc(IcnMatrix(padded, 2.0, original_length=200)),
            compute_fnc(IcnMatrix(signal, 2.0)),
        )

    def test_constant_channel_is_named(self):
        data = self.rng.standard_normal((105, 234))
        data[4] = 3.0
        with self.assertRaisesMessage(NumericError, 'Канал 4'):
            compute_fnc(IcnMatrix(data, 2.0))

    def test_matrix_reconstruction(self):
        data = self.rng.standard_normal((105, 234))
        matrix = fnc_to_matrix(compute_fnc(IcnMatrix(data, 2.0)))
        np.testing.assert_array_equal(matrix, matrix.T)
        np.testing.assert_array_equal(np.diag(matrix), np.ones(105))
        self.assertAlmostEqual(matrix[17, 40], pearson(data[17], data[40]), places=12)


class NormalizationTestCase(SimpleTestCase):
    def test_reference_column(self):
        normalized = minmax_normalize_fit(table([[2.0], [4.0], [6.0]]))
        np.testing.assert_allclose(normalized.X[:, 0], [0.0, 0.5, 1.0])

    def test_constant_column_maps_to_zero(self):
        normalized = minmax_normalize_fit(table([[3.0], [3.0], [3.0]]))
        np.testing.assert_array_equal(normalized.X[:, 0], [0.0, 0.0, 0.0])

    def test_apply_clips_to_unit_interval(self):
        bounds = np.array([[2.0], [6.0]])
        np.testing.assert_array_equal(minmax_apply(bounds, table([[8.0], [0.0], [4.0]])).X[:, 0], [1.0, 0.0, 0.5])

    def test_normalization_is_idempotent(self):
        X = np.random.default_rng(1).uniform(-1, 1, (30, 8))
        once = minmax_normalize_fit(table(X))
        twice = minmax_normalize_fit(once)
        np.testing.assert_allclose(twice.X, once.X, atol=1e-15)

    def test_bounds_shape_is_checked(self):
        with self.assertRaises(DataError):
            minmax_apply(np.zeros((2, 3)), table(np.ones((4, 2))))


class ChiSquareTestCase(SimpleTestCase):
    def test_reference_scores(self):
        scores = chi2_scores(table([[1, 0], [1, 0], [0, 1], [1, 1]]), [0, 0, 1, 1])
        self.assertAlmostEqual(scores[0], 1.0 / 3.0)
        self.assertAlmostEqual(scores[1], 2.0)

    def test_uninformative_and_empty_features_score_zero(self):
        X = [[1, 0], [1, 0], [1, 0], [1, 0]]
        scores = chi2_scores(table(X), [0, 0, 1, 1])
        np.testing.assert_array_equal(scores, [0.0, 0.0])

    def test_single_class_is_rejected(self):
        with self.assertRaises(DataError):
            chi2_scores(table([[1.0], [0.5]]), [1, 1])

    def test_duplicated_feature_scores_equally(self):
        rng = np.random.default_rng(2)
        y = np.repeat([0, 1], 20)
        column = np.clip(0.5 * y + rng.uniform(0, 0.5, 40), 0, 1)
        scores = chi2_scores(table(np.column_stack([column, column])), y)
        self.assertAlmostEqual(scores[0], scores[1], places=12)

    def test_planted_feature_is_selected(self):
        hits = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            y = rng.permutation(np.repeat([0, 1], 50))
            X = rng.uniform(-0.3, 0.3, (100, N_FNC_FEATURES))
            X[:, 7] = np.where(y == 1, 0.6, -0.2) + rng.normal(0.0, 0.1, 100)
            normalized = minmax_normalize_fit(table(X))
            selection = select_top_k(chi2_scores(normalized, y), 20)
            hits += 7 in selection.selected
        self.assertGreaterEqual(hits, 95)


class TopKTestCase(SimpleTestCase):
    def test_ties_break_to_lower_index(self):
        self.assertEqual(select_top_k([0.1, 5.0, 3.0, 3.0], 2).selected, [1, 2])

    def test_full_selection_is_a_permutation(self):
        scores = np.random.default_rng(3).uniform(size=12)
        self.assertEqual(sorted(select_top_k(scores, 12).selected), list(range(12)))

    def test_k_out_of_range_is_rejected(self):
        with self.assertRaises(ConfigError):
            select_top_k([1.0, 2.0], 0)
        with self.assertRaises(ConfigError):
            select_top_k([1.0, 2.0], 3)


class FncTableFileTestCase(SimpleTestCase):
    def test_table_round_trip(self):
        rng = np.random.default_rng(4)
        vectors = [compute_fnc(IcnMatrix(rng.standard_normal((105, 60)), 2.0)) for _ in range(3)]
        with tempfile.TemporaryDirectory() as tmp:
            path = save_fnc_table(Path(tmp) / 'fnc.csv', ['a', 'b', 'c'], vectors)
            ids, values = load_fnc_table(path)
        self.assertEqual(ids, ['a', 'b', 'c'])
        np.testing.assert_array_equal(values, np.vstack(vectors))
