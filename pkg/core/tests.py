import json
import os
import tempfile
import unittest
from fractions import Fraction
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

import ssbmf
from core.bench import run_criteria
from core.bits import (
    complement_rows, int_to_row, pack_rows, pairwise_and_popcount, popcount, row_popcount, row_to_int,
    unpack_rows,
)
from core.conf import ssbmf_setting
from core.exceptions import ParameterError
from core.models import ExperimentRun
from core.random import check_seed, floyd_subset, stream
from core.serializers import (
    dumps, gram_from_dict, gram_to_dict, matrix_from_csv, matrix_to_csv, read_json, selection_to_dict,
)
from instance.gram import GramMatrix, gram
from instance.selection import gen_selection_matrix, population_instance

ACCEPTANCE = os.environ.get('SSBMF_ACCEPTANCE') == '1'


def run(name, *args):
    out = StringIO()
    call_command(name, *args, stdout=out, stderr=StringIO())
    return out.getvalue()


class SettingsTests(SimpleTestCase):

    def test_defaults(self):
        self.assertEqual(ssbmf_setting('ETA'), 0.25)
        self.assertEqual(ssbmf_setting('SAMPLE_SIZE_CONSTANT'), 8.0)
        self.assertEqual(ssbmf_setting('CALIBRATED_SAMPLE_SIZE_CONSTANT'), 2.0)
        self.assertEqual(ssbmf_setting('CSP_EXACT_BUDGET'), 10**7)

    @override_settings(SSBMF={'ETA': 0.1})
    def test_override(self):
        self.assertEqual(ssbmf_setting('ETA'), 0.1)
        self.assertEqual(ssbmf_setting('C_HEAVY'), 6.0)

    def test_unknown_key(self):
        with self.assertRaises(KeyError):
            ssbmf_setting('NOT_A_SETTING')


class RandomTests(SimpleTestCase):

    def test_streams_are_reproducible_and_independent(self):
        self.assertEqual(stream(5, 'a').integers(0, 2**62), stream(5, 'a').integers(0, 2**62))
        self.assertNotEqual(stream(5, 'a').integers(0, 2**62), stream(5, 'b').integers(0, 2**62))

    def test_seed_range(self):
        with self.assertRaises(ParameterError):
            check_seed(-1)
        with self.assertRaises(ParameterError):
            check_seed(2**64)

    def test_floyd_subset(self):
        rng = stream(1, 'floyd')
        for _ in range(50):
            subset = floyd_subset(rng, 9, 4)
            self.assertEqual(len(set(subset)), 4)
            self.assertEqual(list(subset), sorted(subset))
            self.assertTrue(all(0 <= j < 9 for j in subset))


class BitsTests(SimpleTestCase):

    def setUp(self):
        self.dense = stream(2, 'bits').integers(0, 2, size=(7, 130)).astype(np.uint8)

    def test_pack_and_unpack(self):
        packed = pack_rows(self.dense)
        self.assertEqual(packed.shape, (7, 3))
        self.assertTrue(np.array_equal(unpack_rows(packed, 130), self.dense))

    def test_popcounts(self):
        packed = pack_rows(self.dense)
        self.assertEqual(row_popcount(packed).tolist(), self.dense.sum(axis=1).tolist())
        self.assertEqual(int(popcount(np.array([0xFF00FF], dtype=np.uint64))[0]), 16)

    def test_complement_keeps_padding_clear(self):
        complement = complement_rows(pack_rows(self.dense), 130)
        self.assertTrue(np.array_equal(unpack_rows(complement, 130), 1 - self.dense))
        self.assertEqual(row_popcount(complement).tolist(), (130 - self.dense.sum(axis=1)).tolist())

    def test_pairwise_and_popcount(self):
        packed = pack_rows(self.dense)
        product = self.dense.astype(np.int64) @ self.dense.T.astype(np.int64)
        self.assertTrue(np.array_equal(pairwise_and_popcount(packed, block=2), product))

    def test_pairwise_and_popcount_tiles(self):
        left = pack_rows(self.dense)
        other = stream(3, 'bits').integers(0, 2, size=(11, 130)).astype(np.uint8)
        right = pack_rows(other)
        product = self.dense.astype(np.int64) @ other.T.astype(np.int64)
        for block, right_block in ((1, 1), (2, 3), (7, 4), (3, 11)):
            tiled = pairwise_and_popcount(left, right, block=block, right_block=right_block)
            self.assertTrue(np.array_equal(tiled, product))
        with mock.patch('core.bits.BLOCK_WORDS', 9):
            self.assertTrue(np.array_equal(pairwise_and_popcount(left, right), product))

    def test_integer_rows(self):
        row = pack_rows(self.dense)[3]
        self.assertTrue(np.array_equal(int_to_row(row_to_int(row), 130), row))


class SerializerTests(SimpleTestCase):

    def test_dumps_is_canonical(self):
        text = dumps({'b': np.int64(2), 'a': [Fraction(1, 3), np.float64(0.5)]})
        self.assertTrue(text.endswith('\n'))
        self.assertEqual(json.loads(text), {'a': ['1/3', 0.5], 'b': 2})
        self.assertLess(text.index('"a"'), text.index('"b"'))

    def test_counts_must_agree_with_bits(self):
        payload = gram_to_dict(gram(gen_selection_matrix(5, 6, 2, seed=1), 'integer'))
        payload['counts'][0][0] = 0
        with self.assertRaises(ParameterError):
            gram_from_dict(payload)

    def test_missing_and_malformed_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ParameterError):
                read_json(Path(tmp) / 'absent.json')
            bad = Path(tmp) / 'bad.json'
            bad.write_text('{not json')
            with self.assertRaises(ParameterError):
                read_json(bad)
            with self.assertRaises(ParameterError):
                gram_from_dict({'m': 2})

    def test_matrix_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'x.csv'
            path.write_text(matrix_to_csv(np.array([[1.5, -2.0], [0.25, 3.0]])))
            self.assertEqual(matrix_from_csv(path).tolist(), [[1.5, -2.0], [0.25, 3.0]])
            self.assertEqual(matrix_to_csv(np.array([[1, 0]])), '1,0\n')


class CommandTests(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def path(self, name):
        return str(self.tmp / name)

    def write_population(self, r=8, k=2, seed=3, arithmetic='boolean'):
        W = population_instance(r, k, seed=seed)
        Path(self.path('w.json')).write_text(dumps(selection_to_dict(W)))
        Path(self.path('m.json')).write_text(dumps(gram_to_dict(gram(W, arithmetic))))
        return W

    def test_gen_gram_attack_chain(self):
        run('gen', '--population', '--r', '8', '--k', '2', '--seed', '3', '--out', self.path('w.json'))
        run('gram', '--in', self.path('w.json'), '--out', self.path('m.json'))
        report = json.loads(run('attack', '--gram', self.path('m.json'), '--r', '8', '--k', '2',
                                '--reference', self.path('w.json'), '--factors', self.path('hat.json')))
        self.assertTrue(report['success'])
        self.assertEqual(report['residual'], 0)
        self.assertEqual(sorted(report['permutation']), list(range(8)))
        self.assertNotIn('seconds', report)
        self.assertEqual(read_json(self.path('hat.json'))['m'], 28)

    def test_gen_is_deterministic(self):
        for name in ('a.json', 'b.json'):
            run('gen', '--m', '64', '--r', '8', '--k', '2', '--seed', '3', '--out', self.path(name))
        self.assertEqual(Path(self.path('a.json')).read_bytes(), Path(self.path('b.json')).read_bytes())
        self.assertEqual(read_json(self.path('a.json'))['m'], 64)

    def test_parameter_errors_exit_with_two(self):
        with self.assertRaises(CommandError) as caught:
            run('gen', '--m', '3', '--k', '9', '--r', '4')
        self.assertEqual(caught.exception.returncode, 2)
        with self.assertRaises(CommandError) as caught:
            run('gram', '--in', self.path('absent.json'))
        self.assertEqual(caught.exception.returncode, 2)

    def test_corrupted_gram_exits_with_three(self):
        self.write_population()
        payload = read_json(self.path('m.json'))
        row = payload['hex_rows'][0]
        payload['hex_rows'][0] = format(int(row, 16) ^ 2, f'0{len(row)}x')
        Path(self.path('m.json')).write_text(dumps(payload))
        with self.assertRaises(CommandError) as caught:
            run('attack', '--gram', self.path('m.json'), '--r', '8', '--k', '2')
        self.assertEqual(caught.exception.returncode, 3)

    def test_failed_small_random_attack_prints_a_hint(self):
        run('gen', '--m', '64', '--r', '8', '--k', '2', '--seed', '3', '--out', self.path('w.json'))
        run('gram', '--in', self.path('w.json'), '--out', self.path('m.json'))
        out, err = StringIO(), StringIO()
        try:
            call_command('attack', '--gram', self.path('m.json'), '--r', '8', '--k', '2', stdout=out, stderr=err)
        except CommandError as exc:
            self.assertEqual(exc.returncode, 3)
            report = json.loads(out.getvalue())
            self.assertIn('m=64 is below the calibrated sample size', report['hint'])
            self.assertIn('calibrated sample size', err.getvalue())
        else:
            self.assertNotIn('hint', json.loads(out.getvalue()))

    def test_main_returns_exit_codes(self):
        self.assertEqual(ssbmf.main(['gen', '--m', '3', '--k', '9', '--r', '4']), 2)
        self.assertEqual(ssbmf.main(['gen', '--m', '3', '--r', '4', '--k', '2', '--no-such-flag']), 2)
        self.assertEqual(ssbmf.main(['gen', '--m', '3', '--r', '4', '--k', '2', '--out', self.path('w.json')]), 0)

    def test_attack_with_timings(self):
        self.write_population()
        report = json.loads(run('attack', '--gram', self.path('m.json'), '--r', '8', '--k', '2', '--timings'))
        self.assertIn('seconds', report)
        self.assertIn('recover_seconds', report)

    def test_recover(self):
        W = self.write_population()
        X = stream(4, 'cli-private').standard_normal((8, 2))
        X -= X.mean(axis=0)
        Path(self.path('z.csv')).write_text(matrix_to_csv(np.abs(W.dense() @ X)))
        Path(self.path('x.csv')).write_text(matrix_to_csv(X))
        report = json.loads(run(
            'recover', '--gram', self.path('m.json'), '--synthetic', self.path('z.csv'), '--r', '8', '--k', '2',
            '--truth', self.path('x.csv'), '--truth-selection', self.path('w.json'),
            '--estimate', self.path('xhat.csv'),
        ))
        self.assertTrue(report['success'])
        self.assertEqual(len(report['entries']), 16)
        estimate = matrix_from_csv(self.path('xhat.csv'))
        self.assertTrue(np.allclose(estimate, np.abs(X[report['permutation']])))
        csv_text = run('recover', '--gram', self.path('m.json'), '--synthetic', self.path('z.csv'),
                       '--r', '8', '--k', '2', '--truth', self.path('x.csv'),
                       '--truth-selection', self.path('w.json'), '--report', 'csv')
        self.assertTrue(csv_text.startswith('row,column,estimate,heavy_flag'))
        self.assertEqual(len(csv_text.splitlines()), 17)

    def test_synth(self):
        summary = json.loads(run('synth', '--r', '8', '--d', '2', '--k', '2', '--m', '40',
                                 '--heavy-factor', '2', '--dir', self.path('data')))
        self.assertEqual(summary['planted'], 2)
        self.assertEqual(matrix_from_csv(summary['files']['synthetic']).shape, (40, 2))
        self.assertEqual(gram_from_dict(read_json(summary['files']['gram'])).m, 40)

    def test_csp_symmetric(self):
        W = gen_selection_matrix(4, 4, 2, seed=1)
        Path(self.path('m.json')).write_text(dumps(gram_to_dict(gram(W, 'integer'))))
        report = json.loads(run('csp', '--gram', self.path('m.json'), '--r', '4', '--k', '2', '--mode', 'int',
                                '--instance-out', self.path('inst.json'), '--factors', self.path('f.json')))
        self.assertEqual((report['value'], report['edges'], report['residual']), (6, 6, 0))
        self.assertEqual(report['additive_gap'], 0.0)
        self.assertEqual(len(read_json(self.path('inst.json'))['targets']), 6)
        local = json.loads(run('csp', '--gram', self.path('m.json'), '--r', '4', '--k', '2', '--mode', 'bool',
                               '--solver', 'local', '--restarts', '5', '--seed', '2'))
        self.assertEqual(local['mode'], 'boolean')
        self.assertLessEqual(local['value'], 6)

    def test_csp_bipartite(self):
        Path(self.path('uv.csv')).write_text('1,1\n2,1\n1,1\n')
        report = json.loads(run('csp', '--matrix', self.path('uv.csv'), '--r', '4', '--k', '2'))
        self.assertTrue(report['bipartite'])
        self.assertEqual(report['edges'], 6)
        self.assertEqual(report['residual'], 6 - report['value'])

    def test_csp_integer_mode_needs_counts(self):
        self.write_population()
        with self.assertRaises(CommandError) as caught:
            run('csp', '--gram', self.path('m.json'), '--r', '8', '--k', '2', '--mode', 'int')
        self.assertEqual(caught.exception.returncode, 2)

    def test_probe_krawtchouk_and_gap(self):
        report = json.loads(run('probe', 'krawtchouk', '--r', '4', '--k', '2', '--lam', '2'))
        self.assertEqual(report['values'][0]['value'], -2)
        self.assertEqual(report['values'][0]['f2_zero_probability'], '1/3')
        self.assertTrue(json.loads(run('probe', 'gap', '--r', '64', '--k', '1'))['ok'])
        self.assertTrue(json.loads(run('probe', 'bound', '--r', '64', '--k', '4'))['ok'])

    def test_probe_rank(self):
        self.write_population(r=6)
        report = json.loads(run('probe', 'rank', '--in', self.path('w.json'), '--primes', '3,5'))
        self.assertEqual(report['rank_real'], 6)
        self.assertEqual(report['full'], {'f2': False, 'real': True})

    def test_probe_singularity_csv(self):
        text = run('probe', 'singularity', '--m', '20', '--r', '8', '--k', '2', '--trials', '5', '--report', 'csv')
        lines = text.splitlines()
        self.assertEqual(lines[0], 'notion,parameter,frequency,ci_low,ci_high')
        self.assertEqual(len(lines), 3)

    def test_probe_anticoncentration(self):
        report = json.loads(run('probe', 'anticoncentration', '--r', '6', '--k', '2', '--x', '5,5,5,5,5,5',
                                '--samples', '200', '--exact'))
        self.assertEqual(report['max_atom'], 1.0)
        self.assertEqual(report['exact_max_atom'], 1.0)
        with self.assertRaises(CommandError) as caught:
            run('probe', 'anticoncentration', '--r', '6', '--k', '2')
        self.assertEqual(caught.exception.returncode, 2)

    def test_anticoncentration_envelope_scan_command(self):
        report = json.loads(run('probe', 'anticoncentration', '--r', '8', '--k', '2', '--scan',
                                '--trials', '2', '--samples', '500'))
        self.assertGreaterEqual(report['within_fraction'], 0.95)
        self.assertEqual(report['trials'], 2)

    def test_pretty_report(self):
        text = run('probe', 'gap', '--r', '64', '--k', '1', '--report', 'pretty')
        self.assertIn('ok: True', text.splitlines())
        self.assertIn('violations: <0 items>', text.splitlines())

    def test_bench_cheap_criteria(self):
        report = json.loads(run('bench', '--criteria', '3,10,12'))
        self.assertTrue(report['passed'])
        self.assertEqual([row['criterion'] for row in report['criteria']], [3, 10, 12])
        with self.assertRaises(CommandError) as caught:
            run('bench', '--criteria', '99')
        self.assertEqual(caught.exception.returncode, 2)


class LedgerTests(TestCase):

    def test_record_flag_saves_a_run(self):
        run('probe', 'krawtchouk', '--r', '4', '--k', '2', '--seed', '7', '--record')
        entry = ExperimentRun.objects.get()
        self.assertEqual(entry.command, 'probe')
        self.assertEqual(entry.seed, '7')
        self.assertTrue(entry.success)
        self.assertEqual(entry.parameters['kind'], 'krawtchouk')
        self.assertEqual(str(entry), 'probe seed=7 (ok)')

    def test_record_keeps_the_largest_seed(self):
        seed = 2**64 - 1
        run('probe', 'krawtchouk', '--r', '4', '--k', '2', '--seed', str(seed), '--record')
        entry = ExperimentRun.objects.get()
        self.assertEqual(int(entry.seed), seed)
        self.assertTrue(ExperimentRun.objects.filter(seed=str(seed)).exists())

    def test_failed_runs_are_recorded(self):
        with tempfile.TemporaryDirectory() as tmp:
            W = population_instance(8, 2, seed=3)
            M = gram(W).dense()
            M[0, 1] ^= 1
            payload = gram_to_dict(GramMatrix.from_dense(M))
            path = Path(tmp) / 'm.json'
            path.write_text(dumps(payload))
            with self.assertRaises(CommandError):
                run('attack', '--gram', str(path), '--r', '8', '--k', '2', '--record')
        entry = ExperimentRun.objects.get()
        self.assertFalse(entry.success)
        self.assertEqual(str(entry), 'attack seed=0 (failed)')


@unittest.skipUnless(ACCEPTANCE, 'set SSBMF_ACCEPTANCE=1 to run the acceptance experiments')
class AcceptanceTests(SimpleTestCase):

    def assertCriterion(self, number):
        (row,) = run_criteria([number], seed=0)
        self.assertTrue(row['passed'], row['detail'])

    def test_tensor_exactness(self):
        self.assertCriterion(1)

    def test_end_to_end_recovery(self):
        self.assertCriterion(2)

    def test_krawtchouk_identity(self):
        self.assertCriterion(4)

    def test_krawtchouk_bound(self):
        self.assertCriterion(5)

    def test_even_kernel(self):
        self.assertCriterion(6)

    def test_odd_independence(self):
        self.assertCriterion(7)

    def test_expected_square_inner(self):
        self.assertCriterion(8)

    def test_heavy_recovery(self):
        self.assertCriterion(9)

    def test_exact_solve(self):
        self.assertCriterion(11)
