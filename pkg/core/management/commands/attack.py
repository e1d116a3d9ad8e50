from core.management.base import CommandResult, SsbmfCommand
from core.serializers import dumps, gram_from_dict, read_json, selection_from_dict, selection_to_dict, write_text
from jennrich.pipeline import JennrichConfig, recover_with_reference, sample_size_hint, tensor_recover


class Command(SsbmfCommand):
    help = 'Recovers the selection matrix W from its Boolean Gram matrix'

    def add_command_arguments(self, parser):
        parser.add_argument('--gram', required=True, help='Gram matrix JSON')
        parser.add_argument('--r', type=int, required=True)
        parser.add_argument('--k', type=int, required=True)
        parser.add_argument('--mode', choices=('full', 'anchored'), default='full')
        parser.add_argument('--anchors', type=int, help='Anchor rows in anchored mode')
        parser.add_argument('--clamp', action='store_true', help='Clamp tensor entries into 0..k')
        parser.add_argument('--round-tol', type=float)
        parser.add_argument('--retries', type=int)
        parser.add_argument('--reference', help='Planted selection matrix JSON to match columns against')
        parser.add_argument('--factors', help='Write the recovered W here')

    def run(self, **options):
        M = gram_from_dict(read_json(options['gram']))
        config = JennrichConfig.from_settings(
            mode=options['mode'], anchors=options['anchors'], clamp=options['clamp'],
            round_tol=options['round_tol'], retries=options['retries'],
        )
        r, k, seed = options['r'], options['k'], options['seed']
        if options['reference']:
            W_ref = selection_from_dict(read_json(options['reference']))
            result = recover_with_reference(M, W_ref, r, k, config, seed)
        else:
            result = tensor_recover(M, r, k, config, seed)

        payload = result.to_report()
        payload.update({'m': M.m, 'r': r, 'k': k, 'mode': config.mode})
        if 'anchors' in result.diagnostics:
            payload['anchors'] = result.diagnostics['anchors']
        if result.diagnostics.get('unmatched'):
            payload['unmatched'] = result.diagnostics['unmatched']
        success = result.success and (not options['reference'] or result.permutation is not None)
        payload['success'] = success
        if not success:
            hint = sample_size_hint(M.m, r, k)
            if hint:
                payload['hint'] = hint
                self.stderr.write(self.style.WARNING(hint))
        if result.W_hat is not None and options['factors']:
            write_text(options['factors'], dumps(selection_to_dict(result.W_hat)))
        timings = {'recover_seconds': round(result.diagnostics.get('seconds', 0.0), 6)}
        return CommandResult(payload, success=success, message=result.failure or 'columns do not match the reference',
                             timings=timings)
