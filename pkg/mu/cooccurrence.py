import logging
import math

import numpy as np

from core.bits import pairwise_and_popcount, row_popcount
from core.conf import ssbmf_setting
from core.exceptions import ParameterError
from mu.table import inversion_lut

logger = logging.getLogger(__name__)


def _check_rows(M, rows):
    rows = [int(a) for a in rows]
    if not rows:
        raise ParameterError('need at least one row index')
    for a in rows:
        if not 0 <= a < M.m:
            raise ParameterError(f'row index {a} out of range for m={M.m}')
    return rows


def _index(M, rows):
    return np.arange(M.m, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)


def zero_cooccurrence(M, rows):
    """Number of columns l with M[a, l] = 0 for every a in rows.

    Complemented packed rows are AND-ed together and popcounted.
    """
    comp = M.complement(_check_rows(M, rows))
    acc = np.bitwise_and.reduce(comp, axis=0)
    return int(row_popcount(acc[None, :])[0])


def pairwise_zero_counts(M, rows=None, cols=None, mask=None):
    """counts[i, j] = zero_cooccurrence(M, {rows[i], cols[j]}) for index lists.

    Complements are built one row block at a time. ``mask``, when given, is a
    packed row AND-ed into every complemented row first.
    """
    rows, cols = _index(M, rows), _index(M, cols)
    out = np.empty((len(rows), len(cols)), dtype=np.int64)
    block = M.row_block()
    for col in range(0, len(cols), block):
        right = M.complement(cols[col:col + block])
        if mask is not None:
            right &= mask
        for start in range(0, len(rows), block):
            left = M.complement(rows[start:start + block])
            if mask is not None:
                left &= mask
            out[start:start + block, col:col + block] = pairwise_and_popcount(left, right)
    return out


def triple_zero_counts(M, a, rows=None):
    """counts[i, j] = zero_cooccurrence(M, {a, rows[i], rows[j]})."""
    return pairwise_zero_counts(M, rows, rows, mask=M.complement([a])[0])


def pairwise_union_sizes(M, table, rows=None, cols=None):
    """Estimated |S_a | S_b| for all pairs by mu-inversion of zero fractions.

    Entries pairing a row with itself are set to k. M itself pins the rest:
    disjoint pairs (M_ab = 0) have union exactly 2k and intersecting pairs lie
    in [k, 2k - 1].
    """
    counts = pairwise_zero_counts(M, rows, cols)
    sizes = inversion_lut(M.m, table)[counts]
    row_index, col_index = _index(M, rows), _index(M, cols)
    k = table.k
    word, shift = col_index >> 6, (col_index & 63).astype(np.uint64)
    block = M.row_block()
    for start in range(0, len(row_index), block):
        words = M.bits[row_index[start:start + block]][:, word]
        meets = ((words >> shift) & np.uint64(1)).astype(bool)
        part = sizes[start:start + block]
        sizes[start:start + block] = np.where(meets, np.clip(part, k, 2 * k - 1), 2 * k)
    sizes[row_index[:, None] == col_index[None, :]] = k
    logger.debug('inverted %d pairwise zero counts', sizes.size)
    return sizes


def union_size(M, rows, table, lut=None):
    """Estimated |union of S_a over the distinct rows|; a single row has size k."""
    distinct = sorted(set(_check_rows(M, rows)))
    if len(distinct) == 1:
        return table.k
    lut = inversion_lut(M.m, table) if lut is None else lut
    return int(lut[zero_cooccurrence(M, distinct)])


def required_sample_size(r, k, t, delta, constant=None, max_iter=200):
    """Smallest m with m >= C0 * (t^2 r / k) * ln(m^3 / delta).

    Found by iterating m <- ceil(C0 (t^2 r/k) ln(m^3/delta)) upward from 1;
    the right side is increasing in m, so the iteration climbs monotonically
    to the smallest integer fixed point.
    """
    if not 0 < delta < 1:
        raise ParameterError(f'need 0 < delta < 1, got {delta}')
    if t < 1:
        raise ParameterError(f'need t >= 1, got {t}')
    if not 1 <= k <= r:
        raise ParameterError(f'need 1 <= k <= r, got r={r}, k={k}')
    constant = ssbmf_setting('SAMPLE_SIZE_CONSTANT') if constant is None else constant
    if constant <= 0:
        raise ParameterError('sample-size constant must be positive')
    scale = constant * t * t * r / k

    def bound(m):
        return scale * math.log(m ** 3 / delta)

    m = 1
    for _ in range(max_iter):
        needed = max(1, math.ceil(bound(m)))
        if needed <= m:
            return m
        m = needed
    return m
