import numpy as np

from core.exceptions import ParameterError
from core.management.base import CommandResult, SsbmfCommand
from core.serializers import read_json, selection_from_dict
from mu.table import gap_report
from probes.experiments import (
    REAL, anticoncentration_estimate, anticoncentration_exact, envelope_scan, fibre_stats, planted_fibre_vector,
    singularity_experiment,
)
from probes.krawtchouk import krawtchouk_bound_check, krawtchouk_values, parity_dichotomy_check
from probes.rank import rank_report

FREQUENCY_FIELDS = ['notion', 'parameter', 'frequency', 'ci_low', 'ci_high']
KINDS = ('rank', 'krawtchouk', 'bound', 'dichotomy', 'singularity', 'anticoncentration', 'gap')


def _int_list(text):
    try:
        return [int(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise ParameterError(f'expected a comma-separated list of integers, got {text!r}') from None


class Command(SsbmfCommand):
    help = 'Exact and Monte-Carlo probes of the rank and anti-concentration theory'

    def add_command_arguments(self, parser):
        parser.add_argument('kind', choices=KINDS)
        parser.add_argument('--in', dest='source', help='Selection matrix JSON (rank)')
        parser.add_argument('--primes', default='', help='Comma-separated primes (rank)')
        parser.add_argument('--m', type=int)
        parser.add_argument('--r', type=int)
        parser.add_argument('--k', type=int)
        parser.add_argument('--lam', type=int, help='Single lambda (krawtchouk); default all')
        parser.add_argument('--trials', type=int, default=100)
        parser.add_argument('--samples', type=int, default=10_000)
        parser.add_argument('--q', default=REAL, help='Modulus, or "real"')
        parser.add_argument('--x', help='Comma-separated integer vector (anticoncentration)')
        parser.add_argument('--planted-s', type=int, help='Plant a vector with s entries off its largest fibre')
        parser.add_argument('--exact', action='store_true', help='Also enumerate every support')
        parser.add_argument('--scan', action='store_true',
                            help='Scan planted fibres s = 1..r-1 (--trials each) against the envelope')

    def run(self, **options):
        kind = options['kind']
        handler = getattr(self, f'probe_{kind}')
        return handler(**options)

    def _require(self, options, *names):
        missing = [f'--{name}' for name in names if options.get(name) is None]
        if missing:
            raise ParameterError(f'{options["kind"]} needs {", ".join(missing)}')
        return [options[name] for name in names]

    def probe_rank(self, **options):
        if not options['source']:
            raise ParameterError('rank needs --in')
        W = selection_from_dict(read_json(options['source']))
        report = rank_report(W, _int_list(options['primes']), options['seed'])
        payload = {
            'm': W.m, 'r': W.r, 'k': W.k,
            'rank_f2': report.rank_f2,
            'rank_real': report.rank_real,
            'rank_modq': {str(p): rank for p, rank in report.rank_modq.items()},
            'certified': report.certified,
            'full': report.full(W.r),
            'notes': report.notes,
        }
        return CommandResult(payload)

    def probe_krawtchouk(self, **options):
        r, k = self._require(options, 'r', 'k')
        lams = [options['lam']] if options['lam'] is not None else None
        rows = [value.as_row() for value in krawtchouk_values(r, k, lams)]
        return CommandResult({'r': r, 'k': k, 'values': rows}, records=rows,
                             fieldnames=['lambda', 'value', 'f2_zero_probability'])

    def probe_bound(self, **options):
        r, k = self._require(options, 'r', 'k')
        report = krawtchouk_bound_check(r, k)
        payload = {'r': r, 'k': k, 'checked': report.checked, 'ok': report.ok}
        if report.violation:
            payload['violation'] = list(report.violation)
        return CommandResult(payload)

    def probe_dichotomy(self, **options):
        r, k, m = self._require(options, 'r', 'k', 'm')
        report = parity_dichotomy_check(r, k, m)
        return CommandResult({'r': r, 'k': k, 'm': m, 'ok': report.ok, 'rows': report.rows},
                             records=report.rows, fieldnames=['lambda', 'min_ok', 'max_ok'])

    def probe_singularity(self, **options):
        m, r, k = self._require(options, 'm', 'r', 'k')
        records = [row.as_row() for row in singularity_experiment(m, r, k, options['trials'], options['seed'])]
        return CommandResult({'trials': options['trials'], 'records': records},
                             records=records, fieldnames=FREQUENCY_FIELDS)

    def probe_anticoncentration(self, **options):
        r, k = self._require(options, 'r', 'k')
        if options['scan']:
            fraction = envelope_scan(r, k, options['trials'], options['samples'], options['seed'], options['q'])
            return CommandResult({
                'r': r, 'k': k, 'q': options['q'], 'trials': options['trials'],
                'samples': options['samples'], 'within_fraction': fraction,
            })
        if options['x']:
            x = np.array(_int_list(options['x']), dtype=np.int64)
        elif options['planted_s'] is not None:
            x = planted_fibre_vector(r, options['planted_s'], options['seed'])
        else:
            raise ParameterError('anticoncentration needs --x or --planted-s')
        report = anticoncentration_estimate(x, r, k, options['q'], options['samples'], options['seed'])
        largest, support = fibre_stats(x)
        payload = {
            'r': r, 'k': k, 'q': options['q'], 'samples': report.samples,
            'max_atom': report.max_atom,
            'largest_fibre': largest,
            'support': support,
            'envelope': report.envelope,
            'within': report.within,
        }
        if options['exact']:
            payload['exact_max_atom'] = float(anticoncentration_exact(x, r, k, options['q']))
        return CommandResult(payload)

    def probe_gap(self, **options):
        r, k = self._require(options, 'r', 'k')
        report = gap_report(r, k)
        payload = {
            'r': r, 'k': k,
            'in_regime': report.in_regime,
            'min_gap': report.min_gap,
            'ok': report.ok,
            'violations': [list(item) for item in report.violations],
        }
        return CommandResult(payload)
