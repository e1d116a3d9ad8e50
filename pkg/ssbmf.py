#!/usr/bin/env python
"""Command-line front end: ``ssbmf <gen|gram|synth|attack|recover|csp|probe|bench> ...``."""
import os
import sys


def main(argv=None):
    """Run one ssbmf subcommand and return its exit code."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'SSBMF.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        execute_from_command_line(['ssbmf', *argv])
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    return 0


if __name__ == '__main__':
    sys.exit(main())
