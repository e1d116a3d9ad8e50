import itertools
import math
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ParameterError
from core.random import stream
from instance.selection import SelectionMatrix, gen_selection_matrix, population_instance
from probes.experiments import (
    anticoncentration_estimate, anticoncentration_exact, envelope, envelope_scan, fibre_stats, planted_fibre_vector,
    singularity_experiment, wilson_interval,
)
from probes.krawtchouk import (
    KrawtchoukValue, f2_zero_probability, krawtchouk, krawtchouk_bound_check, krawtchouk_values,
    parity_dichotomy_check,
)
from probes.rank import is_prime, random_primes, rank_bareiss, rank_f2, rank_mod_p, rank_real, rank_report


class KrawtchoukTests(SimpleTestCase):

    def test_values(self):
        self.assertEqual(krawtchouk(4, 2, 0), 6)
        self.assertEqual(krawtchouk(4, 2, 2), -2)
        self.assertEqual(krawtchouk(5, 3, 5), -10)

    def test_value_rows(self):
        values = krawtchouk_values(4, 2)
        self.assertEqual([v.value for v in values], [6, 0, -2, 0, 6])
        self.assertEqual(values[0], KrawtchoukValue(4, 2, 0, 6))
        self.assertEqual(values[2].as_row(), {'lambda': 2, 'value': -2, 'f2_zero_probability': Fraction(1, 3)})
        self.assertEqual(krawtchouk_values(5, 3, [5]), [KrawtchoukValue(5, 3, 5, -10)])

    def test_symmetry(self):
        for r in range(1, 13):
            for k in range(r + 1):
                for lam in range(r + 1):
                    self.assertEqual(krawtchouk(r, k, r - lam), (-1) ** k * krawtchouk(r, k, lam))

    def test_parity_probability(self):
        self.assertEqual(f2_zero_probability(4, 2, 0), 1)
        self.assertEqual(f2_zero_probability(4, 2, 2), Fraction(1, 3))
        self.assertEqual(f2_zero_probability(4, 2, 4), 1)

    def test_parity_probability_matches_enumeration(self):
        for r in range(1, 8):
            for k in range(r + 1):
                supports = list(itertools.combinations(range(r), k))
                for lam in range(r + 1):
                    even = sum(1 for s in supports if sum(1 for j in s if j < lam) % 2 == 0)
                    self.assertEqual(f2_zero_probability(r, k, lam), Fraction(even, len(supports)))

    def test_parity_probability_through_krawtchouk(self):
        for r in range(2, 11):
            for k in range(r + 1):
                for lam in range(r // 2 + 1):
                    expected = Fraction(1, 2) + Fraction(krawtchouk(r, k, lam), 2 * math.comb(r, k))
                    self.assertEqual(f2_zero_probability(r, k, lam), expected)

    def test_bound(self):
        self.assertTrue(krawtchouk_bound_check(64, 4).ok)
        self.assertTrue(krawtchouk_bound_check(32, 5).ok)
        self.assertEqual(krawtchouk_bound_check(64, 4).checked, 33)
        with self.assertRaises(ParameterError):
            krawtchouk_bound_check(10, 5)

    def test_dichotomy(self):
        self.assertTrue(parity_dichotomy_check(32, 3, 8).ok)
        self.assertFalse(parity_dichotomy_check(20, 2, 4).ok)

    def test_range(self):
        with self.assertRaises(ParameterError):
            krawtchouk(4, 2, 5)
        with self.assertRaises(ParameterError):
            f2_zero_probability(4, 5, 0)


class RankTests(SimpleTestCase):

    def test_identical_rows(self):
        W = SelectionMatrix(m=2, r=2, k=1, rows=((0,), (0,)))
        report = rank_report(W, primes=[5])
        self.assertEqual((report.rank_f2, report.rank_real, report.rank_modq[5]), (1, 1, 1))
        self.assertTrue(report.certified)

    def test_even_k_has_forced_kernel_over_f2(self):
        W = population_instance(6, 2)
        report = rank_report(W)
        self.assertLessEqual(report.rank_f2, 5)
        self.assertEqual(report.rank_real, 6)
        self.assertEqual(report.full(6), {'f2': False, 'real': True})

    def test_permutation_matrix(self):
        W = SelectionMatrix(m=5, r=5, k=1, rows=((3,), (0,), (4,), (1,), (2,)))
        report = rank_report(W, primes=[2, 3])
        self.assertEqual((report.rank_f2, report.rank_real), (5, 5))
        self.assertEqual(report.rank_modq, {2: 5, 3: 5})

    def test_rank_mod_two_is_f2_rank(self):
        for seed in range(5):
            dense = gen_selection_matrix(12, 10, 3, seed).dense()
            self.assertEqual(rank_mod_p(dense, 2), rank_f2(dense))

    def test_large_primes_use_exact_integers(self):
        (p,) = random_primes(1, bits=62, seed=3)
        dense = gen_selection_matrix(15, 9, 3, seed=3).dense()
        self.assertEqual(rank_mod_p(dense, p), np.linalg.matrix_rank(dense.astype(float)))

    def test_bareiss_matches_floating_rank(self):
        rng = stream(4, 'bareiss')
        for _ in range(5):
            A = rng.integers(0, 2, size=(7, 6))
            self.assertEqual(rank_bareiss(A), np.linalg.matrix_rank(A.astype(float)))

    def test_rank_real_certifies_deficient_matrices(self):
        dense = np.array([[1, 1, 0], [0, 1, 1], [1, 0, -1]])
        rank, certified, per_prime = rank_real(dense, primes=[7, 11])
        self.assertEqual(rank, 2)
        self.assertTrue(certified)
        self.assertEqual(set(per_prime), {7, 11})

    def test_primes(self):
        for n in (2, 3, 97, 2**61 - 1):
            self.assertTrue(is_prime(n))
        for n in (0, 1, 561, 2**61 + 1, 91):
            self.assertFalse(is_prime(n))
        primes = random_primes(4, bits=20, seed=1)
        self.assertEqual(len(set(primes)), 4)
        self.assertTrue(all(is_prime(p) and p.bit_length() == 20 for p in primes))
        with self.assertRaises(ParameterError):
            random_primes(1, bits=70)


class ExperimentTests(SimpleTestCase):

    def test_wilson_interval(self):
        low, high = wilson_interval(0, 10)
        self.assertAlmostEqual(low, 0.0)
        self.assertLess(high, 0.35)
        low, high = wilson_interval(30, 100)
        self.assertLess(low, 0.3)
        self.assertGreater(high, 0.3)
        with self.assertRaises(ParameterError):
            wilson_interval(11, 10)

    def test_even_k_never_full_over_f2(self):
        records = singularity_experiment(20, 8, 2, trials=10, seed=1)
        by_notion = {record.notion: record for record in records}
        self.assertEqual(by_notion['f2'].frequency, 0.0)
        self.assertAlmostEqual(by_notion['f2'].ci_low, 0.0)

    def test_singletons_match_the_distinct_row_probability(self):
        (record,) = singularity_experiment(4, 4, 1, trials=1000, seed=2, notions=('real',))
        p = 24 / 256
        self.assertLessEqual(abs(record.frequency - p), 4 * math.sqrt(p * (1 - p) / 1000))
        row = record.as_row()
        self.assertLessEqual(row['ci_low'], row['frequency'])
        self.assertGreaterEqual(row['ci_high'], row['frequency'])

    def test_unknown_notion(self):
        with self.assertRaises(ParameterError):
            singularity_experiment(4, 4, 1, trials=1, seed=0, notions=('complex',))

    def test_fibre_stats(self):
        self.assertEqual(fibre_stats([1, 1, 2, 0, 0, 0]), (3, 3))
        self.assertEqual(fibre_stats([7] * 5), (5, 5))
        self.assertEqual(fibre_stats([0] * 5), (5, 0))
        self.assertEqual(fibre_stats(np.arange(1, 6))[0], 1)

    def test_constant_vector_has_a_single_atom(self):
        report = anticoncentration_estimate(np.full(10, 3), 10, 4, samples=500, seed=1)
        self.assertEqual(report.max_atom, 1.0)
        self.assertEqual(report.s, 0)
        self.assertTrue(report.within)
        self.assertEqual(anticoncentration_exact(np.full(10, 3), 10, 4), 1)

    def test_estimate_matches_enumeration(self):
        x = np.arange(1, 13)
        exact = float(anticoncentration_exact(x, 12, 3))
        report = anticoncentration_estimate(x, 12, 3, samples=20_000, seed=5)
        self.assertLess(abs(report.max_atom - exact), 0.01)
        self.assertEqual(report.largest_fibre, 1)

    def test_modular_atoms(self):
        x = np.arange(1, 13)
        self.assertEqual(anticoncentration_exact(x, 12, 3, q=1000), anticoncentration_exact(x, 12, 3))
        parity = anticoncentration_estimate(x, 12, 3, q=2, samples=5000, seed=6)
        self.assertGreater(parity.max_atom, 0.45)
        with self.assertRaises(ParameterError):
            anticoncentration_estimate(x, 12, 3, q='one')

    def test_planted_fibres(self):
        for s in (1, 5, 11):
            x = planted_fibre_vector(12, s, seed=s)
            self.assertEqual(fibre_stats(x), (12 - s if s < 12 else 1, s))

    def test_envelope(self):
        self.assertEqual(envelope(12, 3, 0), math.inf)
        self.assertAlmostEqual(envelope(12, 3, 4, constant=3.0), 3.0)

    def test_planted_fibres_sit_under_the_envelope(self):
        self.assertGreaterEqual(envelope_scan(12, 3, trials=3, samples=2000, seed=0), 0.95)
        self.assertGreaterEqual(envelope_scan(10, 2, trials=2, samples=2000, seed=1, q=7), 0.95)
