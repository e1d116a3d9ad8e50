from core.exceptions import ParameterError
from core.management.base import CommandResult, SsbmfCommand
from core.serializers import dumps, gram_from_dict, matrix_from_csv, read_json, selection_to_dict, write_text
from csp.reduction import additive_gap, assignment_to_factors, reduce_asymmetric, reduce_symmetric
from csp.solvers import LocalSearchConfig, solve_exact, solve_local
from instance.gram import Arithmetic

MODE_ALIASES = {
    'int': Arithmetic.INTEGER,
    'integer': Arithmetic.INTEGER,
    'bool': Arithmetic.BOOLEAN,
    'boolean': Arithmetic.BOOLEAN,
}


class Command(SsbmfCommand):
    help = 'Reduces factorization of M to Max 2-CSP and solves it exactly or by local search'

    def add_command_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--gram', help='Gram matrix JSON (symmetric reduction)')
        source.add_argument('--matrix', help='Rectangular integer matrix CSV (bipartite reduction)')
        parser.add_argument('--r', type=int, required=True)
        parser.add_argument('--k', type=int, required=True)
        parser.add_argument('--mode', choices=sorted(MODE_ALIASES), default='int')
        parser.add_argument('--solver', choices=('exact', 'local'), default='exact')
        parser.add_argument('--budget', type=int, help='Largest q^n the exact solver may enumerate')
        parser.add_argument('--restarts', type=int)
        parser.add_argument('--iters', type=int)
        parser.add_argument('--instance-out', help='Write the CSP instance JSON here')
        parser.add_argument('--factors', help='Write the factor(s) read off the assignment here')

    def run(self, **options):
        r, k = options['r'], options['k']
        if not 1 <= k <= r:
            raise ParameterError(f'need 1 <= k <= r, got r={r}, k={k}')
        mode = MODE_ALIASES[options['mode']]
        if options['gram']:
            inst = reduce_symmetric(gram_from_dict(read_json(options['gram'])), r, k, mode)
        else:
            inst = reduce_asymmetric(matrix_from_csv(options['matrix'], dtype=int), r, k, mode)
        if options['instance_out']:
            write_text(options['instance_out'], dumps(inst.to_json()))

        if options['solver'] == 'exact':
            assignment = solve_exact(inst, options['budget'])
        else:
            config = LocalSearchConfig.from_settings(restarts=options['restarts'], iters=options['iters'])
            assignment = solve_local(inst, seed=options['seed'], config=config)
        factors = assignment_to_factors(inst, assignment)
        if options['factors']:
            if inst.bipartite:
                written = {'U': selection_to_dict(factors.U), 'V': selection_to_dict(factors.V)}
            else:
                written = selection_to_dict(factors.W) if factors.W is not None else {}
            write_text(options['factors'], dumps(written))

        payload = {
            'solver': options['solver'],
            'mode': inst.mode.value,
            'bipartite': inst.bipartite,
            'vertices': inst.n,
            'alphabet_size': inst.alphabet_size,
            'edges': inst.edge_count,
            'value': assignment.value,
            'residual': factors.off_diagonal,
            'residual_with_diagonal': factors.with_diagonal,
            'additive_gap': additive_gap(inst, assignment.value),
            'sigma': list(assignment.sigma),
        }
        return CommandResult(payload)
