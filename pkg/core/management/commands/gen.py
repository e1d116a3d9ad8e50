from core.exceptions import ParameterError
from core.management.base import CommandResult, SsbmfCommand
from core.serializers import selection_to_dict
from instance.selection import gen_selection_matrix, population_instance


class Command(SsbmfCommand):
    help = 'Generates a random m x r selection matrix with k ones per row'

    def add_command_arguments(self, parser):
        parser.add_argument('--m', type=int, help='Number of rows')
        parser.add_argument('--r', type=int, required=True, help='Number of columns')
        parser.add_argument('--k', type=int, required=True, help='Ones per row')
        parser.add_argument('--population', action='store_true',
                            help='Every k-subset of [r] as a row instead of random rows')
        parser.add_argument('--repeats', type=int, default=1, help='Copies of each subset with --population')

    def run(self, **options):
        if options['population']:
            W = population_instance(options['r'], options['k'], options['repeats'], options['seed'])
        else:
            if options['m'] is None:
                raise ParameterError('--m is required unless --population is given')
            W = gen_selection_matrix(options['m'], options['r'], options['k'], options['seed'])
        return CommandResult(selection_to_dict(W), artifact=True)
