import numpy as np
from django.test import SimpleTestCase

from core.conf import ssbmf_setting
from core.exceptions import DimensionMismatchError, ParameterError, TensorInconsistencyError
from core.random import stream
from instance.gram import gram
from instance.selection import gen_selection_matrix, population_instance
from mu.cooccurrence import required_sample_size
from tensor.intersection import ANCHORED, LAZY, IntersectionTensor, build_tensor, contract, oracle_tensor


class OracleTensorTests(SimpleTestCase):

    def setUp(self):
        self.W = gen_selection_matrix(12, 7, 3, seed=2)
        self.T = oracle_tensor(self.W)

    def test_symmetric(self):
        self.assertTrue(self.T.is_symmetric())

    def test_diagonal_and_gram_entries(self):
        counts = gram(self.W, 'integer').counts
        for a in range(self.W.m):
            self.assertEqual(self.T.entry(a, a, a), 3)
            for b in range(self.W.m):
                self.assertEqual(self.T.entry(a, a, b), counts[a, b])

    def test_lazy_oracle_matches_dense(self):
        lazy = oracle_tensor(self.W, lazy=True)
        for a, b, c in [(0, 1, 2), (3, 3, 5), (11, 0, 7)]:
            self.assertEqual(lazy.entry(a, b, c), self.T.entry(a, b, c))


class BuildTensorTests(SimpleTestCase):
    """Population instances with r >= 4k - 1 invert every union size exactly."""

    def setUp(self):
        self.W = population_instance(8, 2, seed=1)
        self.M = gram(self.W)
        self.truth = oracle_tensor(self.W).to_dense()

    def test_full_mode_equals_oracle(self):
        T = build_tensor(self.M, 8, 2)
        self.assertTrue(np.array_equal(T.to_dense(), self.truth))
        self.assertTrue(T.is_symmetric())

    def test_anchored_mode_restricts_to_anchors(self):
        anchors = [0, 3, 5, 9, 14, 20, 27]
        T = build_tensor(self.M, 8, 2, ANCHORED, anchors=anchors)
        self.assertEqual(T.n, len(anchors))
        self.assertTrue(np.array_equal(T.to_dense(), self.truth[np.ix_(anchors, anchors, anchors)]))
        self.assertEqual(T.metadata()['anchors'], anchors)

    def test_lazy_entries_and_slices(self):
        T = build_tensor(self.M, 8, 2, LAZY)
        self.assertFalse(T.materialized)
        for a, b, c in [(0, 1, 2), (4, 4, 9), (7, 7, 7), (27, 13, 6)]:
            self.assertEqual(T.entry(a, b, c), self.truth[a, b, c])
        self.assertTrue(np.array_equal(T.slice(5), self.truth[:, :, 5]))

    def test_inconsistent_entries_raise_unless_clamped(self):
        # three disjoint pairs cover all of [6]; their union reads as 5
        W = population_instance(6, 2)
        M = gram(W)
        with self.assertRaises(TensorInconsistencyError):
            build_tensor(M, 6, 2)
        T = build_tensor(M, 6, 2, clamp=True)
        dense = T.to_dense()
        self.assertTrue(((dense >= 0) & (dense <= 2)).all())

    def test_anchored_mode_needs_anchors(self):
        with self.assertRaises(ParameterError):
            build_tensor(self.M, 8, 2, ANCHORED)
        with self.assertRaises(ParameterError):
            build_tensor(self.M, 8, 2, ANCHORED, anchors=[0, 28])
        with self.assertRaises(ParameterError):
            build_tensor(self.M, 8, 2, 'sideways')


class RandomInstanceTensorTests(SimpleTestCase):

    def test_lazy_entries_match_the_oracle_at_the_calibrated_size(self):
        r, k = 8, 2
        m = required_sample_size(r, k, 3 * k, 0.1, constant=ssbmf_setting('CALIBRATED_SAMPLE_SIZE_CONSTANT'))
        W = gen_selection_matrix(m, r, k, seed=5)
        T = build_tensor(gram(W), r, k, LAZY)
        truth = oracle_tensor(W, lazy=True)
        for a, b, c in stream(5, 'triples').integers(0, m, size=(200, 3)):
            self.assertEqual(T.entry(a, b, c), truth.entry(a, b, c), (a, b, c))

    def test_small_random_instance_stays_in_range_when_clamped(self):
        W = gen_selection_matrix(40, 8, 2, seed=3)
        dense = build_tensor(gram(W), 8, 2, clamp=True).to_dense()
        self.assertTrue(((dense >= 0) & (dense <= 2)).all())
        self.assertTrue(all(dense[a, a, a] == 2 for a in range(40)))


class ContractTests(SimpleTestCase):

    def test_contraction_against_basis_vector_is_a_slice(self):
        T = oracle_tensor(gen_selection_matrix(9, 6, 2, seed=3))
        e = np.zeros(9)
        e[4] = 1
        self.assertTrue(np.array_equal(contract(T, e), T.slice(4)))

    def test_lazy_and_dense_contractions_agree(self):
        W = gen_selection_matrix(9, 6, 2, seed=3)
        v = np.linspace(-1, 1, 9)
        self.assertTrue(np.allclose(contract(oracle_tensor(W, lazy=True), v), contract(oracle_tensor(W), v)))

    def test_rank_one_example(self):
        w = np.array([1, 1, 0])
        T = IntersectionTensor.from_dense(np.einsum('i,j,k->ijk', w, w, w))
        self.assertEqual(contract(T, np.array([1.0, 0.0, 0.0])).tolist(), [[1, 1, 0], [1, 1, 0], [0, 0, 0]])

    def test_contraction_is_linear(self):
        T = oracle_tensor(gen_selection_matrix(9, 6, 2, seed=4))
        rng = stream(4, 'contract')
        u, v = rng.standard_normal(9), rng.standard_normal(9)
        combined = contract(T, 2.5 * u - 0.5 * v)
        self.assertTrue(np.allclose(combined, 2.5 * contract(T, u) - 0.5 * contract(T, v)))

    def test_length_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            contract(IntersectionTensor.from_dense(np.zeros((3, 3, 3))), np.ones(4))
