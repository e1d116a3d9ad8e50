"""JSON and CSV formats for instances, Gram matrices, datasets and reports."""
import csv
import io
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from core.exceptions import ParameterError


def dumps(payload):
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(_plain(payload), sort_keys=True, indent=2) + '\n'


def _plain(value):
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Fraction):
        return f'{value.numerator}/{value.denominator}'
    return value


def write_text(path, text):
    if path is None or str(path) == '-':
        return text
    Path(path).write_text(text, encoding='utf-8')
    return text


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise ParameterError(f'no such file: {path}') from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f'{path} is not valid JSON: {exc}') from None


def _require(payload, *keys):
    missing = [key for key in keys if key not in payload]
    if missing:
        raise ParameterError(f'missing field(s): {", ".join(missing)}')


# Selection matrices

def selection_to_dict(W):
    return {'m': W.m, 'r': W.r, 'k': W.k, 'rows': [list(row) for row in W.rows], 'seed': W.seed}


def selection_from_dict(payload):
    from instance.selection import SelectionMatrix

    _require(payload, 'm', 'r', 'k', 'rows')
    return SelectionMatrix(
        m=int(payload['m']), r=int(payload['r']), k=int(payload['k']),
        rows=tuple(tuple(row) for row in payload['rows']),
        seed=payload.get('seed'),
    )


# Gram matrices

def gram_to_dict(M):
    payload = {'m': M.m, 'hex_rows': M.hex_rows()}
    if M.counts is not None:
        payload['counts'] = M.counts.tolist()
    return payload


def gram_from_dict(payload):
    from instance.gram import GramMatrix

    _require(payload, 'm', 'hex_rows')
    m = int(payload['m'])
    M = GramMatrix.from_hex_rows(m, payload['hex_rows'])
    if 'counts' in payload:
        counts = GramMatrix.from_counts(payload['counts'])
        if not np.array_equal(counts.bits, M.bits):
            raise ParameterError('counts disagree with hex_rows')
        M = counts
    return M


# Matrices as CSV

def matrix_to_csv(matrix):
    matrix = np.asarray(matrix)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    for row in matrix:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def _cell(value):
    if isinstance(value, (np.integer, int, np.bool_, bool)):
        return str(int(value))
    return repr(float(value))


def matrix_from_csv(path, dtype=float):
    try:
        text = Path(path).read_text(encoding='utf-8')
    except FileNotFoundError:
        raise ParameterError(f'no such file: {path}') from None
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows:
        raise ParameterError(f'{path} is empty')
    try:
        return np.array([[dtype(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise ParameterError(f'{path}: {exc}') from None


def records_to_csv(records, fieldnames):
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator='\n', extrasaction='ignore')
    writer.writeheader()
    for record in records:
        writer.writerow({key: _plain(record.get(key)) for key in fieldnames})
    return buffer.getvalue()
