from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from core.conf import ssbmf_setting
from core.exceptions import DegeneracyError, ParameterError, RankDeficiencyError, RoundingError
from instance.gram import GramMatrix, gram
from instance.selection import SelectionMatrix, gen_selection_matrix, population_instance
from jennrich.decompose import _min_gap as min_gap, jennrich_decompose, round_boolean, rounding_margin
from jennrich.pipeline import (
    JennrichConfig, default_anchor_count, extend_from_anchors, match_columns, recover_with_reference,
    sample_size_hint, select_anchors, tensor_recover,
)
from mu.cooccurrence import required_sample_size
from mu.table import mu_table
from tensor.intersection import IntersectionTensor, oracle_tensor


def flip_entry(M, a, b):
    """Copy of M with entry (a, b) toggled and (b, a) left alone."""
    dense = M.dense()
    dense[a, b] ^= 1
    return GramMatrix.from_dense(dense)


class RoundBooleanTests(SimpleTestCase):

    def test_scales_by_signed_pivot(self):
        v = np.array([0.0, 2.0, 2.1, 0.05])
        self.assertEqual(round_boolean(v).tolist(), [0, 1, 1, 0])
        self.assertEqual(round_boolean(-v).tolist(), [0, 1, 1, 0])

    def test_ambiguous_entry(self):
        with self.assertRaises(RoundingError) as caught:
            round_boolean(np.array([1.0, 0.5, 0.0]), tol=0.25)
        self.assertEqual(caught.exception.index, 1)

    def test_zero_vector(self):
        with self.assertRaises(ParameterError):
            round_boolean(np.zeros(3))

    def test_margin(self):
        self.assertAlmostEqual(rounding_margin(np.array([4.0, 0.4, 3.6])), 0.1)


class JennrichDecomposeTests(SimpleTestCase):

    def setUp(self):
        self.W = population_instance(8, 2, seed=3)
        self.T = oracle_tensor(self.W)

    def test_recovers_columns_up_to_order(self):
        decomposition = jennrich_decompose(self.T, 8, seed=1)
        recovered = {tuple(round_boolean(v)) for v in decomposition.vectors}
        columns = {tuple(column) for column in self.W.columns()}
        self.assertEqual(recovered, columns)

    def test_same_seed_same_vectors(self):
        first = jennrich_decompose(self.T, 8, seed=5)
        second = jennrich_decompose(self.T, 8, seed=5)
        self.assertTrue(np.array_equal(first.eigenvalues, second.eigenvalues))

    def test_rank_below_r(self):
        with self.assertRaises(RankDeficiencyError):
            jennrich_decompose(self.T, 9)

    def test_r_out_of_range(self):
        with self.assertRaises(ParameterError):
            jennrich_decompose(self.T, 0)

    def test_gives_up_after_retries(self):
        with self.assertRaises(DegeneracyError) as caught:
            jennrich_decompose(self.T, 8, gap_tol=10.0, retries=2)
        self.assertEqual(caught.exception.attempts, 3)


class AnchorTests(SimpleTestCase):

    def test_default_count(self):
        self.assertEqual(default_anchor_count(1000, 16), 64)
        self.assertEqual(default_anchor_count(30, 16), 30)
        self.assertEqual(default_anchor_count(1000, 2), 18)

    def test_select_anchors(self):
        anchors = select_anchors(50, 10, seed=2)
        self.assertEqual(len(set(anchors.tolist())), 10)
        self.assertEqual(anchors.tolist(), sorted(anchors.tolist()))
        self.assertEqual(anchors.tolist(), select_anchors(50, 10, seed=2).tolist())
        self.assertEqual(select_anchors(5, 10, seed=2).tolist(), [0, 1, 2, 3, 4])

    def test_extend_from_anchors(self):
        W = population_instance(8, 2)
        # a path through all columns plus a triangle: full column rank
        supports = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 2), (3, 7)]
        anchors = np.array(sorted(W.rows.index(s) for s in supports))
        W_anchor = W.dense()[anchors]
        extended = extend_from_anchors(W_anchor, anchors, gram(W), mu_table(8, 2), 2)
        self.assertEqual(extended, W)

    def test_extend_needs_r_anchors(self):
        W = population_instance(8, 2)
        anchors = np.arange(4)
        with self.assertRaises(ParameterError):
            extend_from_anchors(W.dense()[anchors], anchors, gram(W), mu_table(8, 2), 2)

    def test_extend_rejects_rank_deficient_block(self):
        W = population_instance(8, 2)
        # bipartite cycle on 8 columns: rank 7
        supports = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 7)]
        anchors = np.array(sorted(W.rows.index(s) for s in supports))
        with self.assertRaises(RankDeficiencyError):
            extend_from_anchors(W.dense()[anchors], anchors, gram(W), mu_table(8, 2), 2)


class TensorRecoverTests(SimpleTestCase):

    def test_full_mode_on_population_instance(self):
        W = population_instance(8, 2, seed=4)
        result = tensor_recover(gram(W), 8, 2, seed=0)
        self.assertTrue(result.success, result.failure)
        self.assertEqual(result.residual, 0)
        self.assertTrue(match_columns(result.W_hat, W).matched)

    def test_integer_gram_is_accepted(self):
        W = population_instance(8, 2, seed=4)
        result = tensor_recover(gram(W, 'integer'), 8, 2, seed=0)
        self.assertTrue(result.success, result.failure)

    def test_anchored_mode(self):
        W = population_instance(11, 3, seed=6)
        config = JennrichConfig.from_settings(mode='anchored', anchors=60)
        result = recover_with_reference(gram(W), W, 11, 3, config, seed=2)
        self.assertTrue(result.success, result.failure)
        self.assertEqual(result.diagnostics['anchors'], 60)
        self.assertIsNotNone(result.permutation)
        self.assertEqual(result.W_hat.permute_columns(result.permutation), W)

    def test_corrupted_matrix_fails_without_raising(self):
        M = flip_entry(gram(population_instance(8, 2, seed=4)), 0, 1)
        result = tensor_recover(M, 8, 2)
        self.assertFalse(result.success)
        self.assertTrue(result.failure)

    def test_report(self):
        result = tensor_recover(gram(population_instance(8, 2)), 8, 2)
        report = result.to_report()
        self.assertNotIn('seconds', report)
        self.assertIn('seconds', result.to_report(timings=True))
        self.assertTrue(report['success'])

    def test_invalid_parameters_raise(self):
        with self.assertRaises(ParameterError):
            tensor_recover(gram(population_instance(8, 2)), 8, 9)
        with self.assertRaises(ParameterError):
            JennrichConfig(mode='partial')
        with self.assertRaises(ParameterError):
            JennrichConfig(round_tol=0.6)


class MatchColumnsTests(SimpleTestCase):

    def test_permutation(self):
        W = population_instance(8, 2)
        perm = [3, 0, 7, 1, 6, 2, 5, 4]
        shuffled = W.permute_columns(perm)
        match = match_columns(shuffled, W)
        self.assertTrue(match.matched)
        hat, ref = shuffled.dense(), W.dense()
        for j, p in enumerate(match.permutation):
            self.assertTrue(np.array_equal(hat[:, j], ref[:, p]))

    def test_mismatch(self):
        W = SelectionMatrix(m=2, r=2, k=1, rows=((0,), (1,)))
        other = SelectionMatrix(m=2, r=2, k=1, rows=((0,), (0,)))
        match = match_columns(other, W)
        self.assertFalse(match.matched)
        self.assertTrue(match.unmatched)


def cube(*vectors):
    vectors = [np.asarray(v, dtype=np.int64) for v in vectors]
    return IntersectionTensor.from_dense(sum(np.einsum('i,j,k->ijk', v, v, v) for v in vectors))


class ReExpansionTests(SimpleTestCase):

    def assertReExpands(self, T, r, seed=0):
        decomposition = jennrich_decompose(T, r, seed=seed)
        rounded = [round_boolean(v) for v in decomposition.vectors]
        self.assertTrue(np.array_equal(cube(*rounded).to_dense(), T.to_dense()))
        return rounded

    def test_two_disjoint_components(self):
        rounded = self.assertReExpands(cube([1, 1, 0], [0, 0, 1]), 2)
        self.assertEqual({tuple(v) for v in rounded}, {(1, 1, 0), (0, 0, 1)})

    def test_single_component(self):
        rounded = self.assertReExpands(cube([1, 0, 1]), 1)
        self.assertEqual([tuple(v) for v in rounded], [(1, 0, 1)])

    def test_population_tensor(self):
        self.assertReExpands(oracle_tensor(population_instance(8, 2, seed=3)), 8, seed=4)

    def test_eigenvalues_are_contraction_ratios(self):
        W = population_instance(8, 2, seed=3)
        decomposition = jennrich_decompose(oracle_tensor(W), 8, seed=6)
        v1, v2 = decomposition.probes
        columns = W.dense().T.astype(float)
        ratios = np.sort((columns @ v1) / (columns @ v2))
        self.assertTrue(np.allclose(np.sort(decomposition.eigenvalues), ratios, atol=1e-6))

    def test_collision_triggers_a_redraw(self):
        W = population_instance(8, 2, seed=3)
        collided = []

        def first_collides(values):
            if not collided:
                collided.append(True)
                return 0.0
            return min_gap(values)

        with mock.patch('jennrich.decompose._min_gap', side_effect=first_collides):
            decomposition = jennrich_decompose(oracle_tensor(W), 8, seed=1)
        self.assertEqual(decomposition.retries, 1)
        recovered = {tuple(round_boolean(v)) for v in decomposition.vectors}
        self.assertEqual(recovered, {tuple(column) for column in W.columns()})


class RandomInstanceTests(SimpleTestCase):

    def test_anchored_recovery_at_the_calibrated_size(self):
        r, k = 8, 2
        m = required_sample_size(r, k, 3 * k, 0.1, constant=ssbmf_setting('CALIBRATED_SAMPLE_SIZE_CONSTANT'))
        W = gen_selection_matrix(m, r, k, seed=1)
        config = JennrichConfig.from_settings(mode='anchored')
        result = recover_with_reference(gram(W), W, r, k, config, seed=1)
        self.assertTrue(result.success, result.failure)
        self.assertEqual(result.residual, 0)
        self.assertEqual(result.diagnostics['anchors'], default_anchor_count(m, r))
        self.assertEqual(result.W_hat.permute_columns(result.permutation), W)

    def test_sample_size_hint(self):
        hint = sample_size_hint(64, 8, 2)
        self.assertIn('m=64 is below the calibrated sample size', hint)
        needed = required_sample_size(8, 2, 6, 0.1, constant=2.0)
        self.assertIn(str(needed), hint)
        self.assertIsNone(sample_size_hint(needed, 8, 2))
        self.assertIsNotNone(sample_size_hint(needed, 8, 2, constant=8.0))
