from core.bench import CRITERIA, run_criteria
from core.exceptions import ParameterError
from core.management.base import CommandResult, SsbmfCommand


class Command(SsbmfCommand):
    help = 'Runs the acceptance experiments and reports one row per criterion'

    def add_command_arguments(self, parser):
        parser.add_argument('--criteria', default='', help='Comma-separated criterion numbers (default: all)')
        parser.add_argument('--quick', action='store_true', help='Fewer seeds and trials')
        parser.add_argument('--constant', type=float, help='Sample-size constant for the calibrated runs')

    def run(self, **options):
        try:
            numbers = [int(item) for item in options['criteria'].split(',') if item.strip()]
        except ValueError:
            raise ParameterError(f'bad criterion list {options["criteria"]!r}') from None
        unknown = sorted(set(numbers) - set(CRITERIA))
        if unknown:
            raise ParameterError(f'unknown criteria: {unknown}; choose from 1..{max(CRITERIA)}')
        rows = run_criteria(numbers, options['seed'], options['quick'], options['constant'])
        passed = all(row['passed'] for row in rows)
        failed = [row['criterion'] for row in rows if not row['passed']]
        return CommandResult(
            {'passed': passed, 'criteria': rows}, records=rows,
            fieldnames=['criterion', 'name', 'passed', 'detail'],
            success=passed, message=f'criteria failed: {failed}',
        )
