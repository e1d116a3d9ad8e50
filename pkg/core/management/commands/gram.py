from core.management.base import CommandResult, SsbmfCommand
from core.serializers import gram_to_dict, read_json, selection_from_dict
from instance.gram import gram


class Command(SsbmfCommand):
    help = 'Computes the Gram matrix W W^T of a selection matrix'

    def add_command_arguments(self, parser):
        parser.add_argument('--in', dest='source', required=True, help='Selection matrix JSON')
        parser.add_argument('--arithmetic', choices=('boolean', 'integer'), default='boolean')

    def run(self, **options):
        W = selection_from_dict(read_json(options['source']))
        return CommandResult(gram_to_dict(gram(W, options['arithmetic'])), artifact=True)
