from pathlib import Path

from core.management.base import CommandResult, SsbmfCommand
from core.serializers import dumps, gram_to_dict, matrix_to_csv, selection_to_dict
from recover.instahide import gen_instahide, planted_dataset


class Command(SsbmfCommand):
    help = 'Plants heavy entries in a private dataset, mixes it and simulates the similarity oracle'

    def add_command_arguments(self, parser):
        parser.add_argument('--r', type=int, required=True, help='Private vectors')
        parser.add_argument('--d', type=int, required=True, help='Dimension of each vector')
        parser.add_argument('--k', type=int, required=True, help='Vectors mixed into each synthetic row')
        parser.add_argument('--m', type=int, required=True, help='Synthetic rows')
        parser.add_argument('--heavy-per-column', type=int, default=1)
        parser.add_argument('--heavy-factor', type=float, default=10.0)
        parser.add_argument('--arithmetic', choices=('boolean', 'integer'), default='boolean')
        parser.add_argument('--dir', required=True, help='Directory for the generated files')

    def run(self, **options):
        seed = options['seed']
        X, mask = planted_dataset(
            options['r'], options['d'], options['k'],
            options['heavy_per_column'], options['heavy_factor'], seed,
        )
        synthetic, M = gen_instahide(X, options['m'], options['k'], seed, options['arithmetic'])
        target = Path(options['dir'])
        target.mkdir(parents=True, exist_ok=True)
        files = {
            'dataset': ('dataset.csv', matrix_to_csv(X.X)),
            'planted': ('planted.csv', matrix_to_csv(mask.astype(int))),
            'synthetic': ('synthetic.csv', matrix_to_csv(synthetic.Z)),
            'signed': ('signed.csv', matrix_to_csv(synthetic.Y)),
            'selection': ('selection.json', dumps(selection_to_dict(synthetic.W))),
            'gram': ('gram.json', dumps(gram_to_dict(M))),
        }
        for name, text in files.values():
            (target / name).write_text(text, encoding='utf-8')
        payload = {
            'r': X.r, 'd': X.d, 'k': options['k'], 'm': synthetic.m,
            'planted': int(mask.sum()),
            'files': {key: str(target / name) for key, (name, _) in files.items()},
        }
        return CommandResult(payload)
