import math
from fractions import Fraction
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ParameterError
from core.random import stream
from instance.gram import gram
from instance.selection import gen_selection_matrix, population_instance
from mu.cooccurrence import (
    pairwise_union_sizes, pairwise_zero_counts, required_sample_size, triple_zero_counts, union_size,
    zero_cooccurrence,
)
from mu.table import gap_report, inversion_lut, invert_fraction, mu_table, mu_value


class MuTableTests(SimpleTestCase):

    def test_values(self):
        table = mu_table(10, 2)
        self.assertEqual(table[0], 1)
        self.assertEqual(table[1], Fraction(36, 45))
        self.assertEqual(table.t_max, 6)
        self.assertEqual(mu_value(10, 2, 11), 0)

    def test_strings(self):
        self.assertEqual(mu_table(4, 1).as_strings(), ['1/1', '3/4', '1/2', '1/4'])

    def test_extend(self):
        table = mu_table(10, 2)
        self.assertIs(table.extend(3), table)
        self.assertEqual(table.extend(10).t_max, 10)

    def test_invalid(self):
        with self.assertRaises(ParameterError):
            mu_table(3, 4)
        with self.assertRaises(ParameterError):
            mu_value(10, 2, -1)

    def test_invert_fraction(self):
        table = mu_table(10, 2)
        self.assertEqual(invert_fraction(Fraction(36, 45), table), 1)
        self.assertEqual(invert_fraction(0.99, table), 0)
        # halfway between mu_0 and mu_1 goes to the smaller union size
        self.assertEqual(invert_fraction(Fraction(9, 10), table), 0)

    def test_invert_fraction_picks_the_nearest_value(self):
        table = mu_table(10, 2)
        self.assertEqual(invert_fraction(0.63, table), 2)
        self.assertEqual(invert_fraction(0.45, table), 3)

    def test_inversion_is_stable_next_to_a_midpoint(self):
        table = mu_table(10, 2)
        midpoint = (table[2] + table[3]) / 2
        self.assertEqual(midpoint, Fraction(49, 90))
        epsilon = Fraction(1, 10**9)
        self.assertEqual(invert_fraction(midpoint + epsilon, table), 2)
        self.assertEqual(invert_fraction(midpoint - epsilon, table), 3)
        self.assertEqual(invert_fraction(float(midpoint + epsilon), table), 2)

    def test_lut_agrees_with_inversion(self):
        table = mu_table(10, 2)
        lut = inversion_lut(45, table)
        expected = [invert_fraction(Fraction(c, 45), table) for c in range(46)]
        self.assertEqual(lut.tolist(), expected)

    def test_gap_in_regime(self):
        for k in (1, 2, 3):
            report = gap_report(64 * k * k, k)
            self.assertTrue(report.in_regime)
            self.assertTrue(report.ok, report.violations)
            self.assertGreaterEqual(report.min_gap, Fraction(k, 4 * 64 * k * k))


class CooccurrenceTests(SimpleTestCase):

    def setUp(self):
        self.W = population_instance(10, 2)
        self.M = gram(self.W)
        self.table = mu_table(10, 2)

    def index(self, support):
        return self.W.rows.index(support)

    def test_zero_cooccurrence_counts_disjoint_rows(self):
        a, b = self.index((0, 1)), self.index((2, 3))
        self.assertEqual(zero_cooccurrence(self.M, [a]), math.comb(8, 2))
        self.assertEqual(zero_cooccurrence(self.M, [a, b]), math.comb(6, 2))
        c = self.index((1, 4))
        self.assertEqual(zero_cooccurrence(self.M, [a, b, c]), math.comb(5, 2))

    def test_pairwise_union_sizes_are_exact(self):
        sizes = pairwise_union_sizes(self.M, self.table)
        truth = np.array([[len(set(s) | set(t)) for t in self.W.rows] for s in self.W.rows])
        self.assertTrue(np.array_equal(sizes, truth))

    def test_union_size_of_triples(self):
        rows = [self.index((0, 1)), self.index((2, 3)), self.index((4, 5))]
        self.assertEqual(union_size(self.M, rows, self.table.extend(6)), 6)
        self.assertEqual(union_size(self.M, rows[:1] * 3, self.table), 2)

    def test_triple_zero_counts(self):
        a = self.index((0, 1))
        counts = triple_zero_counts(self.M, a)
        b, c = self.index((2, 3)), self.index((4, 5))
        self.assertEqual(counts[b, c], zero_cooccurrence(self.M, [a, b, c]))

    def test_pair_sizes_are_pinned_by_the_gram_matrix(self):
        W = gen_selection_matrix(40, 8, 2, seed=3)
        M = gram(W)
        sizes = pairwise_union_sizes(M, mu_table(8, 2))
        dense = M.dense().astype(bool)
        off = ~np.eye(40, dtype=bool)
        self.assertTrue((sizes[~dense] == 4).all())
        meets = sizes[dense & off]
        self.assertTrue(((meets >= 2) & (meets <= 3)).all())
        self.assertTrue((sizes.diagonal() == 2).all())
        rows, cols = [1, 5, 9], [0, 5, 30, 39]
        part = pairwise_union_sizes(M, mu_table(8, 2), rows=rows, cols=cols)
        self.assertTrue(np.array_equal(part, sizes[np.ix_(rows, cols)]))

    def test_blocked_counts_match(self):
        W = gen_selection_matrix(150, 8, 2, seed=4)
        M = gram(W)
        pairs, triples = pairwise_zero_counts(M), triple_zero_counts(M, 7)
        with mock.patch('instance.gram.BLOCK_WORDS', 5):
            self.assertEqual(M.row_block(), 1)
            self.assertTrue(np.array_equal(pairwise_zero_counts(M), pairs))
            self.assertTrue(np.array_equal(triple_zero_counts(M, 7), triples))
        self.assertEqual(pairs[3, 11], zero_cooccurrence(M, [3, 11]))
        self.assertEqual(triples[3, 11], zero_cooccurrence(M, [7, 3, 11]))

    def test_zero_fractions_concentrate_around_mu(self):
        m, r, k = 4000, 10, 2
        W = gen_selection_matrix(m, r, k, seed=6)
        M = gram(W)
        table = mu_table(r, k)
        close = 0
        for a, b in stream(6, 'pairs').integers(0, m, size=(100, 2)):
            mu = float(table[len(set(W.rows[a]) | set(W.rows[b]))])
            spread = 4 * math.sqrt(mu * (1 - mu) / m) + 2 / m
            close += abs(zero_cooccurrence(M, [a, b]) / m - mu) <= spread
        self.assertGreaterEqual(close, 99)

    def test_row_out_of_range(self):
        with self.assertRaises(ParameterError):
            zero_cooccurrence(self.M, [0, 45])


class SampleSizeTests(SimpleTestCase):

    def test_fixed_point(self):
        m = required_sample_size(12, 2, 6, 0.1, constant=8)
        scale = 8 * 36 * 12 / 2
        self.assertGreaterEqual(m, scale * math.log(m ** 3 / 0.1))
        self.assertLess(m - 1, scale * math.log((m - 1) ** 3 / 0.1))

    def test_grows_with_union_size(self):
        self.assertLess(required_sample_size(16, 3, 3, 0.1, 1), required_sample_size(16, 3, 9, 0.1, 1))

    def test_monotone_in_r_and_delta(self):
        self.assertLessEqual(required_sample_size(8, 2, 6, 0.1, 2), required_sample_size(16, 2, 6, 0.1, 2))
        self.assertLessEqual(required_sample_size(8, 2, 6, 0.5, 2), required_sample_size(8, 2, 6, 0.01, 2))
        sizes = [required_sample_size(12, 2, t, 0.1, 2) for t in range(1, 7)]
        self.assertEqual(sizes, sorted(sizes))

    def test_floor_at_one(self):
        self.assertEqual(required_sample_size(2, 1, 1, 0.999999, constant=1e-9), 1)

    def test_invalid(self):
        with self.assertRaises(ParameterError):
            required_sample_size(12, 2, 6, 1.5)
        with self.assertRaises(ParameterError):
            required_sample_size(12, 2, 6, 0.1, constant=0)
