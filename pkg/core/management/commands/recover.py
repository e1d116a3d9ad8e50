from core.management.base import CommandResult, SsbmfCommand
from core.serializers import gram_from_dict, matrix_from_csv, matrix_to_csv, read_json, selection_from_dict, write_text
from jennrich.pipeline import JennrichConfig
from recover.heavy import EXACT, PRINTED, HeavyRecoveryConfig, recover_dataset
from recover.instahide import Dataset, SyntheticDataset

ENTRY_FIELDS = ['row', 'column', 'estimate', 'heavy_flag', 'true_heavy', 'true_heavy_signed', 'relative_error']


class Command(SsbmfCommand):
    help = 'Recovers heavy magnitudes of the private dataset from the similarity matrix and |W X|'

    def add_command_arguments(self, parser):
        parser.add_argument('--gram', required=True, help='Similarity (Gram) matrix JSON')
        parser.add_argument('--synthetic', required=True, help='Synthetic dataset CSV (m x d)')
        parser.add_argument('--r', type=int, required=True)
        parser.add_argument('--k', type=int, required=True)
        parser.add_argument('--mode', choices=('full', 'anchored'), default='full')
        parser.add_argument('--anchors', type=int)
        parser.add_argument('--eta', type=float)
        parser.add_argument('--c-heavy', type=float)
        parser.add_argument('--normalization', choices=(EXACT, PRINTED), default=EXACT)
        parser.add_argument('--truth', help='Private dataset CSV (r x d) for per-entry comparison')
        parser.add_argument('--truth-selection', help='Planted selection matrix JSON, needed with --truth')
        parser.add_argument('--estimate', help='Write the r x d magnitude estimate here as CSV')

    def run(self, **options):
        M = gram_from_dict(read_json(options['gram']))
        Z = SyntheticDataset(matrix_from_csv(options['synthetic']))
        cfg = HeavyRecoveryConfig.from_settings(
            eta=options['eta'], c_heavy=options['c_heavy'], normalization=options['normalization'],
        )
        jennrich_config = JennrichConfig.from_settings(mode=options['mode'], anchors=options['anchors'])
        truth = Dataset(matrix_from_csv(options['truth'])) if options['truth'] else None
        truth_selection = None
        if options['truth_selection']:
            truth_selection = selection_from_dict(read_json(options['truth_selection']))

        estimate, report = recover_dataset(
            M, Z, options['r'], options['k'], cfg, jennrich_config, options['seed'],
            truth=truth, truth_selection=truth_selection,
        )
        if estimate is not None and options['estimate']:
            write_text(options['estimate'], matrix_to_csv(estimate.X))
        payload = report.to_dict()
        return CommandResult(
            payload, records=report.entries, fieldnames=ENTRY_FIELDS, success=report.success,
            message=report.failure or '', timings={'recover_seconds': round(report.seconds or 0.0, 6)},
        )
