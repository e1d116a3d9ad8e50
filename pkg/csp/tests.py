import itertools
import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import AlphabetError, BudgetExceededError, DimensionMismatchError, ParameterError
from core.random import stream
from csp.alphabet import alphabet_size, letter_mask, letter_masks, rank_letter, unrank_letter
from csp.reduction import (
    CspInstance, additive_gap, assignment_to_factors, evaluate, planted_assignment, reduce_asymmetric,
    reduce_symmetric,
)
from csp.solvers import LocalSearchConfig, solve_exact, solve_local, vertex_scores
from instance.gram import Arithmetic, gram
from instance.selection import SelectionMatrix, gen_selection_matrix


class AlphabetTests(SimpleTestCase):

    def test_colex_ranks_round_trip(self):
        for rank in range(alphabet_size(6, 3)):
            self.assertEqual(rank_letter(unrank_letter(rank, 6, 3)), rank)

    def test_colex_order(self):
        self.assertEqual([unrank_letter(i, 5, 3) for i in range(5)],
                         [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3), (0, 1, 4)])

    def test_masks_follow_ranks(self):
        masks = letter_masks(7, 3)
        self.assertEqual(len(masks), math.comb(7, 3))
        for rank, mask in enumerate(masks):
            self.assertEqual(int(mask), letter_mask(unrank_letter(rank, 7, 3)))
        self.assertFalse(masks.flags.writeable)

    def test_out_of_range(self):
        with self.assertRaises(AlphabetError):
            unrank_letter(10, 5, 2)
        with self.assertRaises(ParameterError):
            letter_masks(65, 2)


class SymmetricReductionTests(SimpleTestCase):

    def setUp(self):
        self.W = gen_selection_matrix(4, 4, 2, seed=1)
        self.inst = reduce_symmetric(gram(self.W, Arithmetic.INTEGER), 4, 2, Arithmetic.INTEGER)

    def test_shape(self):
        self.assertEqual(self.inst.n, 4)
        self.assertEqual(self.inst.alphabet_size, 6)
        self.assertEqual(self.inst.edge_count, 6)
        self.assertEqual(self.inst.density, 1.0)
        self.assertEqual(len(self.inst.edges()), 6)

    def test_planted_assignment_satisfies_everything(self):
        planted = planted_assignment(self.inst, self.W)
        self.assertEqual(planted.value, 6)
        self.assertEqual(planted.supports(4, 2), list(self.W.rows))
        factors = assignment_to_factors(self.inst, planted)
        self.assertEqual(factors.off_diagonal, 0)
        self.assertEqual(factors.W, self.W)

    def test_error_is_twice_the_unsatisfied_edges(self):
        for sigma in itertools.product(range(6), repeat=4):
            factors = assignment_to_factors(self.inst, sigma)
            self.assertEqual(factors.off_diagonal, 2 * (6 - evaluate(self.inst, sigma)))
            self.assertEqual(factors.with_diagonal, factors.off_diagonal)

    def test_exact_solver_reaches_the_optimum(self):
        best = solve_exact(self.inst)
        self.assertEqual(best.value, 6)
        self.assertEqual(additive_gap(self.inst, best.value), 0.0)

    def test_budget(self):
        with self.assertRaises(BudgetExceededError):
            solve_exact(self.inst, budget=100)

    def test_local_search(self):
        first = solve_local(self.inst, restarts=3, iters=10, seed=4)
        second = solve_local(self.inst, restarts=3, iters=10, seed=4)
        self.assertEqual(first, second)
        self.assertEqual(first.value, evaluate(self.inst, first.sigma))
        self.assertGreaterEqual(first.value, first.start_value)
        self.assertLessEqual(first.value, self.inst.edge_count)

    def test_vertex_scores_count_satisfied_edges(self):
        sigma = np.array([0, 5, 2, 3])
        partners, targets = self.inst.neighbours(1)
        masks = self.inst.letters
        overlap = [bin(int(masks[sigma[1]]) & int(masks[sigma[v]])).count('1') for v in partners]
        satisfied = sum(int(o == t) for o, t in zip(overlap, targets))
        self.assertEqual(vertex_scores(self.inst, sigma, 1)[5], satisfied)

    def test_instance_json(self):
        payload = self.inst.to_json()
        self.assertEqual(payload['mode'], 'integer')
        self.assertEqual(len(payload['targets']), 6)

    def test_boolean_mode(self):
        inst = reduce_symmetric(gram(self.W), 4, 2, Arithmetic.BOOLEAN)
        self.assertEqual(planted_assignment(inst, self.W).value, 6)
        self.assertEqual(solve_exact(inst).value, 6)

    def test_integer_mode_needs_counts(self):
        with self.assertRaises(ParameterError):
            reduce_symmetric(gram(self.W), 4, 2, Arithmetic.INTEGER)

    def test_rejects_asymmetric_and_out_of_range_targets(self):
        with self.assertRaises(ParameterError):
            reduce_symmetric(np.array([[2, 1], [0, 2]]), 4, 2)
        with self.assertRaises(ParameterError):
            CspInstance(r=4, k=2, targets=np.array([[3, 0], [0, 2]]))

    def test_bad_assignments(self):
        with self.assertRaises(DimensionMismatchError):
            evaluate(self.inst, [0, 1, 2])
        with self.assertRaises(AlphabetError):
            evaluate(self.inst, [0, 1, 2, 6])


class BipartiteReductionTests(SimpleTestCase):

    def setUp(self):
        self.U = SelectionMatrix(m=3, r=4, k=2, rows=((0, 1), (1, 2), (2, 3)))
        self.V = SelectionMatrix(m=2, r=4, k=2, rows=((0, 3), (1, 3)))
        product = self.U.dense().astype(int) @ self.V.dense().T.astype(int)
        self.inst = reduce_asymmetric(product, 4, 2)

    def test_shape(self):
        self.assertTrue(self.inst.bipartite)
        self.assertEqual((self.inst.m, self.inst.m_right, self.inst.n), (3, 2, 5))
        self.assertEqual(self.inst.edge_count, 6)
        self.assertEqual(self.inst.density, 0.5)
        self.assertEqual(self.inst.to_json()['m_right'], 2)

    def test_planted_and_exact(self):
        planted = planted_assignment(self.inst, (self.U, self.V))
        self.assertEqual(planted.value, 6)
        factors = assignment_to_factors(self.inst, planted)
        self.assertEqual((factors.U, factors.V), (self.U, self.V))
        self.assertEqual(factors.off_diagonal, 0)
        self.assertEqual(solve_exact(self.inst).value, 6)

    def test_error_equals_unsatisfied_edges(self):
        sigma = [0, 0, 0, 5, 5]
        factors = assignment_to_factors(self.inst, sigma)
        self.assertEqual(factors.off_diagonal, 6 - evaluate(self.inst, sigma))

    def test_boolean_mode(self):
        product = self.U.dense().astype(int) @ self.V.dense().T.astype(int)
        inst = reduce_asymmetric(product > 0, 4, 2, Arithmetic.BOOLEAN)
        self.assertEqual(planted_assignment(inst, (self.U, self.V)).value, 6)


class LocalSearchConfigTests(SimpleTestCase):

    def test_validation(self):
        with self.assertRaises(ParameterError):
            LocalSearchConfig(restarts=0)
        self.assertEqual(LocalSearchConfig.from_settings(iters=7).iters, 7)


def cycle_counts():
    W = SelectionMatrix(m=4, r=4, k=2, rows=((0, 1), (1, 2), (2, 3), (0, 3)))
    dense = W.dense().astype(np.int64)
    return W, dense @ dense.T


class SolverExampleTests(SimpleTestCase):

    def test_corrupted_target_costs_one_edge(self):
        W, counts = cycle_counts()
        # rows 0 and 1 forced equal, yet row 2 meets row 1 and misses row 0
        counts[0, 1] = counts[1, 0] = 2
        inst = reduce_symmetric(counts, 4, 2)
        best = solve_exact(inst)
        self.assertEqual(best.value, 5)
        self.assertEqual(planted_assignment(inst, W).value, 5)
        factors = assignment_to_factors(inst, best)
        self.assertEqual(factors.off_diagonal, 2)

    def test_single_vertex_instances(self):
        inst = reduce_symmetric(np.array([[2]]), 4, 2)
        self.assertEqual(inst.edge_count, 0)
        self.assertEqual(evaluate(inst, [3]), 0)
        self.assertEqual(solve_exact(inst).value, 0)
        self.assertEqual(solve_local(inst, restarts=2, iters=5, seed=0).value, 0)
        self.assertEqual(assignment_to_factors(inst, [3]).off_diagonal, 0)
        bipartite = reduce_asymmetric(np.array([[1]]), 4, 2)
        self.assertEqual(bipartite.edge_count, 1)
        self.assertEqual(solve_exact(bipartite).value, 1)

    def test_local_search_finds_planted_optimum(self):
        W = gen_selection_matrix(6, 5, 2, seed=8)
        inst = reduce_symmetric(gram(W, Arithmetic.INTEGER), 5, 2)
        self.assertEqual(solve_exact(inst).value, 15)
        optimal = sum(solve_local(inst, restarts=50, seed=seed).value == 15 for seed in range(10))
        self.assertGreaterEqual(optimal, 9)

    def test_zero_iterations_keep_the_best_start(self):
        W = gen_selection_matrix(6, 5, 2, seed=9)
        inst = reduce_symmetric(gram(W, Arithmetic.INTEGER), 5, 2)
        best = solve_local(inst, restarts=5, iters=0, seed=3)
        starts = [
            evaluate(inst, stream(3, 'csp-restart', restart).integers(0, inst.alphabet_size, size=inst.n, dtype=np.int64))
            for restart in range(5)
        ]
        self.assertEqual(best.value, best.start_value)
        self.assertEqual(best.value, max(starts))
        self.assertEqual(best.restart, starts.index(max(starts)))
