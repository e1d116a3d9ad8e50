"""Shared plumbing for the ssbmf management commands."""
import json
import time
from dataclasses import dataclass, field

from django.core.management.base import BaseCommand, CommandError
from django.db.utils import DatabaseError

from core.exceptions import ParameterError, RecoveryError
from core.serializers import dumps, records_to_csv, write_text

PARAMETER_EXIT = 2
RECOVERY_EXIT = 3


@dataclass
class CommandResult:
    """What a command produced.

    ``payload`` is the JSON document; ``records``/``fieldnames`` back the CSV
    report. ``artifact`` payloads (instances, Gram matrices) are always
    written as JSON.
    """
    payload: dict
    records: list = None
    fieldnames: list = None
    artifact: bool = False
    success: bool = True
    message: str = ''
    timings: dict = field(default_factory=dict)


class SsbmfCommand(BaseCommand):
    """Base class: common flags, output writing, run ledger and exit codes."""

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, default=0, help='Root seed for every random stream')
        parser.add_argument('--out', default='-', help='Output file (default: stdout)')
        parser.add_argument('--report', choices=('json', 'csv', 'pretty'), default='json')
        parser.add_argument('--record', action='store_true', help='Save the run in the experiment ledger')
        parser.add_argument('--timings', action='store_true', help='Include wall-clock timings in the output')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run(self, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        started = time.perf_counter()
        try:
            result = self.run(**options)
        except ParameterError as exc:
            raise CommandError(str(exc), returncode=PARAMETER_EXIT)
        except RecoveryError as exc:
            raise CommandError(str(exc), returncode=RECOVERY_EXIT)
        seconds = time.perf_counter() - started
        if options['timings']:
            result.payload['seconds'] = round(seconds, 6)
            result.payload.update(result.timings)

        text = self.render(result, options['report'])
        write_text(options['out'], text)
        if options['out'] == '-':
            self.stdout.write(text, ending='')
        elif result.success:
            self.stdout.write(self.style.SUCCESS(f'Wrote {options["out"]}'))
        if options['record']:
            self.record(result, options, seconds)
        if not result.success:
            raise CommandError(result.message or 'recovery failed', returncode=RECOVERY_EXIT)

    def render(self, result, report):
        if result.artifact or report == 'json':
            return dumps(result.payload)
        if report == 'csv':
            records = result.records if result.records is not None else [result.payload]
            if result.fieldnames:
                fieldnames = result.fieldnames
            else:
                fieldnames = sorted(records[0]) if records else []
            return records_to_csv(records, fieldnames)
        lines = []
        for key in sorted(result.payload):
            value = result.payload[key]
            if isinstance(value, (dict, list)):
                value = f'<{len(value)} items>'
            lines.append(f'{key}: {value}')
        return '\n'.join(lines) + '\n'

    def record(self, result, options, seconds):
        from core.models import ExperimentRun

        ignored = {'out', 'report', 'record', 'timings', 'verbosity', 'settings', 'pythonpath',
                   'traceback', 'no_color', 'force_color', 'skip_checks'}
        parameters = {key: value for key, value in options.items() if key not in ignored}
        summary = {key: value for key, value in result.payload.items() if not isinstance(value, (dict, list))}
        summary['success'] = result.success
        summary = json.loads(dumps(summary))
        parameters = json.loads(dumps(parameters))
        try:
            ExperimentRun.record(self.name, options['seed'], parameters, summary, seconds)
        except DatabaseError:
            self.stderr.write(self.style.WARNING('Run ledger unavailable; run "manage.py migrate" first'))

    @property
    def name(self):
        return self.__module__.rsplit('.', 1)[-1]
