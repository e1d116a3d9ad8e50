import math
from collections import Counter
from unittest import mock

import numpy as np
from django.test import SimpleTestCase
from scipy import stats

from core.bits import unpack_rows
from core.exceptions import DimensionMismatchError, ParameterError
from core.random import stream
from core.serializers import gram_from_dict, gram_to_dict, selection_from_dict, selection_to_dict
from instance.gram import Arithmetic, GramMatrix, factorization_error, gram
from instance.selection import SelectionMatrix, gen_selection_matrix, population_instance


def path_matrix():
    return SelectionMatrix(m=3, r=4, k=2, rows=((0, 1), (1, 2), (2, 3)))


class SelectionMatrixTests(SimpleTestCase):

    def test_k_equal_r_forces_all_ones_rows(self):
        W = gen_selection_matrix(3, 4, 4, seed=11)
        self.assertEqual(W.rows, ((0, 1, 2, 3),) * 3)

    def test_same_seed_same_matrix(self):
        self.assertEqual(gen_selection_matrix(5, 4, 2, 1), gen_selection_matrix(5, 4, 2, 1))

    def test_rows_have_exactly_k_ones(self):
        W = gen_selection_matrix(200, 12, 5, seed=3)
        self.assertTrue((W.dense().sum(axis=1) == 5).all())

    def test_supports_are_uniform(self):
        W = gen_selection_matrix(2000, 10, 2, seed=7)
        counts = Counter(W.rows)
        self.assertEqual(len(counts), math.comb(10, 2))
        self.assertGreater(stats.chisquare(list(counts.values())).pvalue, 1e-6)

    def test_invalid_dimensions(self):
        with self.assertRaises(ParameterError):
            gen_selection_matrix(5, 4, 9, seed=0)
        with self.assertRaises(ParameterError):
            gen_selection_matrix(0, 4, 2, seed=0)
        with self.assertRaises(ParameterError):
            SelectionMatrix(m=1, r=4, k=2, rows=((0, 4),))

    def test_from_dense(self):
        W = SelectionMatrix.from_dense(path_matrix().dense())
        self.assertEqual(W, path_matrix())

    def test_hypergraph_views(self):
        W = path_matrix()
        self.assertEqual(W.line_graph_edges(), [(0, 1), (1, 2)])
        self.assertEqual(W.vertex_degrees().tolist(), [1, 2, 2, 1])

    def test_population_instance_holds_every_subset_once(self):
        W = population_instance(6, 3, seed=2)
        self.assertEqual(W.m, 20)
        self.assertEqual(len(set(W.rows)), 20)

    def test_json_format(self):
        W = gen_selection_matrix(4, 6, 3, seed=9)
        payload = selection_to_dict(W)
        self.assertEqual(sorted(payload), ['k', 'm', 'r', 'rows', 'seed'])
        self.assertEqual(selection_from_dict(payload), W)


class GramTests(SimpleTestCase):

    def test_boolean_gram(self):
        M = gram(path_matrix())
        self.assertEqual(M.dense().tolist(), [[1, 1, 0], [1, 1, 1], [0, 1, 1]])
        self.assertIsNone(M.counts)

    def test_integer_gram(self):
        W = SelectionMatrix(m=2, r=3, k=2, rows=((0, 1), (0, 1)))
        M = gram(W, Arithmetic.INTEGER)
        self.assertEqual(M.counts.tolist(), [[2, 2], [2, 2]])
        M.validate(k=2)

    def test_boolean_diagonal_is_all_ones(self):
        M = gram(gen_selection_matrix(50, 9, 3, seed=4))
        self.assertTrue(M.dense().diagonal().all())
        M.validate()

    def test_gram_matches_dense_product(self):
        W = gen_selection_matrix(70, 20, 4, seed=5)
        dense = W.dense().astype(np.int64)
        self.assertTrue(np.array_equal(gram(W, 'integer').counts, dense @ dense.T))

    def test_hex_rows(self):
        M = gram(path_matrix())
        self.assertEqual(M.hex_rows(), ['3', '7', '6'])
        self.assertTrue(np.array_equal(gram_from_dict(gram_to_dict(M)).dense(), M.dense()))

    def test_validate_rejects_asymmetric(self):
        with self.assertRaises(ParameterError):
            GramMatrix.from_dense(np.array([[1, 1], [0, 1]])).validate()

    def test_to_boolean_drops_counts(self):
        M = gram(path_matrix(), Arithmetic.INTEGER).to_boolean()
        self.assertIsNone(M.counts)
        self.assertEqual(M.dense().tolist(), gram(path_matrix()).dense().tolist())

    def test_unknown_arithmetic(self):
        with self.assertRaises(ParameterError):
            gram(path_matrix(), 'tropical')


class FactorizationErrorTests(SimpleTestCase):

    def test_exact_factorization_has_zero_error(self):
        W = gen_selection_matrix(40, 8, 2, seed=6)
        self.assertEqual(factorization_error(gram(W), W), 0)
        self.assertEqual(factorization_error(gram(W, 'integer'), W, 'integer'), 0)

    def test_counts_differing_entries(self):
        W = SelectionMatrix(m=2, r=4, k=2, rows=((0, 1), (2, 3)))
        M = GramMatrix.from_dense(np.ones((2, 2)))
        self.assertEqual(factorization_error(M, W), 2)
        self.assertEqual(factorization_error(M, W, off_diagonal=True), 2)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            factorization_error(gram(path_matrix()), gen_selection_matrix(4, 4, 2, seed=0))


class BlockedGramTests(SimpleTestCase):

    def test_boolean_gram_matches_dense_product(self):
        W = gen_selection_matrix(150, 12, 3, seed=21)
        dense = W.dense().astype(np.int64)
        self.assertTrue(np.array_equal(gram(W).dense(), (dense @ dense.T > 0).astype(np.uint8)))

    def test_boolean_and_integer_grams_agree_on_every_small_population(self):
        for r in range(2, 7):
            for k in range(1, r + 1):
                W = population_instance(r, k, seed=r + k)
                boolean, integer = gram(W), gram(W, Arithmetic.INTEGER)
                self.assertTrue(np.array_equal(boolean.bits, integer.bits))
                self.assertTrue(np.array_equal(boolean.dense(), (integer.counts > 0).astype(np.uint8)))

    def test_gram_is_unchanged_by_column_permutation(self):
        W = gen_selection_matrix(90, 10, 3, seed=22)
        moved = W.permute_columns(stream(22, 'columns').permutation(10))
        self.assertTrue(np.array_equal(gram(moved).bits, gram(W).bits))
        self.assertTrue(np.array_equal(gram(moved, 'integer').counts, gram(W, 'integer').counts))

    def test_small_blocks_give_the_same_results(self):
        W = gen_selection_matrix(130, 9, 2, seed=23)
        expected = gram(W)
        dense = expected.dense()
        dense[3, 7] = dense[7, 3] = 1 - dense[3, 7]
        dense[5, 5] = 0
        corrupted = GramMatrix.from_dense(dense)
        with mock.patch('instance.gram.BLOCK_WORDS', 8):
            self.assertEqual(expected.row_block(), 2)
            self.assertTrue(np.array_equal(gram(W).bits, expected.bits))
            self.assertEqual(factorization_error(corrupted, W), 3)
            self.assertEqual(factorization_error(corrupted, W, off_diagonal=True), 2)

    def test_complement_of_selected_rows(self):
        M = gram(path_matrix())
        self.assertEqual(unpack_rows(M.complement([0, 2]), 3).tolist(), [[0, 0, 1], [1, 0, 0]])
        self.assertEqual(M.zero_counts().tolist(), [1, 0, 1])
