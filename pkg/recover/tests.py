import itertools

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DimensionMismatchError, ParameterError, RankDeficiencyError
from core.random import stream
from instance.gram import gram
from instance.selection import SelectionMatrix, gen_selection_matrix, population_instance
from recover.heavy import (
    PRINTED, HeavyRecoveryConfig, estimator, expected_estimator, expected_square_inner,
    get_heavy_coordinates, normalization_factor, recover_dataset, relative_errors, solve_exact,
    standard_error_bound,
)
from recover.instahide import Dataset, SyntheticDataset, gen_instahide, heaviness_mask, planted_dataset

BALANCED = np.array([3.0, -1.0, 0.0, 2.0, -4.0, 1.0, 0.0, -1.0])


class ExpectationTests(SimpleTestCase):

    def test_square_inner_matches_enumeration(self):
        rng = stream(0, 'esp-test')
        for r in range(2, 7):
            for k in range(1, r + 1):
                p = rng.standard_normal(r)
                values = [p[list(s)].sum() ** 2 for s in itertools.combinations(range(r), k)]
                self.assertAlmostEqual(np.mean(values), expected_square_inner(p, r, k), places=12)

    def test_estimator_expectation_on_population_instance(self):
        W = population_instance(8, 2)
        p = stream(1, 'estimator-test').standard_normal(8)
        z = np.abs(W.dense() @ p)
        self.assertTrue(np.allclose(estimator(W, z), expected_estimator(p, 8, 2)))

    def test_monte_carlo_agreement(self):
        rng = stream(2, 'esp-mc')
        p = rng.standard_normal(20)
        supports = np.argpartition(rng.random((20_000, 20)), 3, axis=1)[:, :4]
        draws = p[supports].sum(axis=1) ** 2
        self.assertTrue(standard_error_bound(draws, expected_square_inner(p, 20, 4)))

    def test_length_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            expected_square_inner(np.ones(3), 4, 2)


class HeavyCoordinateTests(SimpleTestCase):

    def test_exact_on_balanced_vector(self):
        W = population_instance(8, 2, seed=5)
        z = np.abs(W.dense() @ BALANCED)
        self.assertTrue(np.allclose(get_heavy_coordinates(W, z), np.abs(BALANCED)))

    def test_columns_are_independent(self):
        W = population_instance(8, 2, seed=5)
        X = np.column_stack([BALANCED, -BALANCED[::-1]])
        estimate = get_heavy_coordinates(W, np.abs(W.dense() @ X))
        self.assertEqual(estimate.shape, (8, 2))
        self.assertTrue(np.allclose(estimate, np.abs(X)))

    def test_normalizations(self):
        self.assertAlmostEqual(normalization_factor(4, 2, PRINTED), 6.0)
        self.assertAlmostEqual(normalization_factor(8, 2), 8 * 7 * 6 / (2 * 6 * 4))
        with self.assertRaises(ParameterError):
            normalization_factor(3, 2)

    def test_exact_normalization_at_r_equal_2k_uses_printed_factor(self):
        self.assertAlmostEqual(normalization_factor(4, 2), 6.0)
        W = population_instance(4, 2, seed=1)
        p = np.array([2.0, -1.0, 0.5, 3.0])
        estimate = get_heavy_coordinates(W, np.abs(W.dense() @ p))
        self.assertEqual(estimate.shape, (4,))
        self.assertTrue(np.isfinite(estimate).all())
        self.assertTrue((estimate >= 0).all())

    def test_equivariant_under_column_permutation(self):
        W = gen_selection_matrix(400, 10, 3, seed=11)
        p = stream(11, 'perm-p').standard_normal(10)
        permutation = stream(11, 'perm').permutation(10)
        moved = np.empty_like(p)
        moved[permutation] = p
        shuffled = W.permute_columns(permutation)
        before = get_heavy_coordinates(W, np.abs(W.dense() @ p))
        after = get_heavy_coordinates(shuffled, np.abs(shuffled.dense() @ moved))
        self.assertTrue(np.allclose(after[permutation], before))

    def test_estimator_is_unbiased_on_random_rows(self):
        r, k = 12, 3
        W = gen_selection_matrix(20_000, r, k, seed=12)
        p = stream(12, 'unbiased').standard_normal(r)
        dense = W.dense().astype(float)
        squares = (dense @ p) ** 2
        samples = (dense - (k - 1) / (r - 2)) * squares[:, None]
        self.assertTrue(standard_error_bound(samples, expected_estimator(p, r, k)).all())
        self.assertTrue(np.allclose(estimator(W, np.abs(dense @ p)), samples.mean(axis=0)))

    def test_rejects_negative_mixtures(self):
        W = population_instance(8, 2)
        with self.assertRaises(ParameterError):
            get_heavy_coordinates(W, -np.ones(W.m))

    def test_config_validation(self):
        with self.assertRaises(ParameterError):
            HeavyRecoveryConfig(eta=0)
        with self.assertRaises(ParameterError):
            HeavyRecoveryConfig(normalization='other')
        self.assertEqual(HeavyRecoveryConfig.from_settings(c_heavy=2.0).c_heavy, 2.0)


class DatasetTests(SimpleTestCase):

    def test_gen_instahide(self):
        X = Dataset(stream(3, 'x').standard_normal((6, 4)))
        synthetic, M = gen_instahide(X, 30, 3, seed=4)
        self.assertTrue(np.allclose(synthetic.Z, np.abs(synthetic.W.dense() @ X.X)))
        self.assertTrue(np.array_equal(M.dense(), gram(synthetic.W).dense()))
        self.assertIsNone(synthetic.public().W)
        self.assertIsNone(synthetic.public().Y)

    def test_gen_instahide_needs_k_at_least_two(self):
        with self.assertRaises(ParameterError):
            gen_instahide(np.ones((4, 2)), 10, 1, seed=0)

    def test_synthetic_validation(self):
        with self.assertRaises(ParameterError):
            SyntheticDataset(-np.ones((3, 2)))
        with self.assertRaises(ParameterError):
            SyntheticDataset(np.ones((2, 1)), Y=np.array([[1.0], [2.0]]))

    def test_planted_entries_have_the_requested_weight(self):
        X, mask = planted_dataset(20, 5, 2, heavy_per_column=2, heavy_factor=3.0, seed=1)
        self.assertEqual(mask.sum(axis=0).tolist(), [2] * 5)
        mass = np.abs(X.X).sum(axis=0)
        planted = np.abs(np.where(mask, X.X, 0)).max(axis=0)
        self.assertTrue(np.allclose(planted, 3.0 * 2 / 20 * mass))
        self.assertTrue((heaviness_mask(X, 2, 2.9) >= mask).all())

    def test_planted_dataset_rejects_impossible_weight(self):
        with self.assertRaises(ParameterError):
            planted_dataset(10, 3, 2, heavy_per_column=1, heavy_factor=5.0)


class RecoverDatasetTests(SimpleTestCase):

    def test_end_to_end_on_population_instance(self):
        W = population_instance(8, 2, seed=7)
        X = stream(8, 'private').standard_normal((8, 3))
        X -= X.mean(axis=0)
        Z = SyntheticDataset(np.abs(W.dense() @ X))
        estimate, report = recover_dataset(gram(W), Z, 8, 2, truth=Dataset(X), truth_selection=W)
        self.assertTrue(report.success)
        self.assertEqual(report.residual, 0)
        self.assertTrue(np.allclose(estimate.X, np.abs(X[report.permutation])))
        self.assertEqual(len(report.entries), 24)
        self.assertNotIn('seconds', report.to_dict())

    def test_row_count_mismatch(self):
        W = population_instance(8, 2)
        with self.assertRaises(DimensionMismatchError):
            recover_dataset(gram(W), np.ones((5, 2)), 8, 2)

    def test_solve_exact(self):
        W = population_instance(8, 2, seed=9)
        X = stream(9, 'signed').standard_normal((8, 4))
        solved = solve_exact(W, W.dense() @ X)
        self.assertLessEqual(np.abs(solved.X - X).max(), 1e-9)
        self.assertLessEqual(solved.residual, 1e-9)

    def test_solve_exact_needs_full_column_rank(self):
        cycle = SelectionMatrix(m=4, r=4, k=2, rows=((0, 1), (1, 2), (2, 3), (0, 3)))
        with self.assertRaises(RankDeficiencyError):
            solve_exact(cycle, np.ones((4, 1)))

    def test_relative_errors(self):
        errors = relative_errors(np.array([1.1, 5.0, 0.0]), np.array([-1.0, 0.0, 2.0]), np.array([True, True, True]))
        self.assertTrue(np.allclose(errors, [0.1, 1.0]))
