import itertools
import logging

import numpy as np

from core.bits import row_popcount
from core.exceptions import DimensionMismatchError, ParameterError, TensorInconsistencyError
from mu.cooccurrence import (
    pairwise_union_sizes, triple_zero_counts, zero_cooccurrence,
)
from mu.table import inversion_lut, mu_table

logger = logging.getLogger(__name__)

FULL = 'full'
ANCHORED = 'anchored'
LAZY = 'lazy'
ORACLE = 'oracle'


class IntersectionTensor:
    """Third-order tensor T[a, b, c] = |S_a & S_b & S_c|.

    Either materialized (an n x n x n integer array, n = m or the anchor
    count) or a lazy handle that evaluates entries and slices on demand.
    ``index`` maps tensor positions back to rows of the source matrix.
    """

    def __init__(self, n, k, dense=None, entry_fn=None, slice_fn=None, mode=FULL, index=None):
        if dense is None and entry_fn is None:
            raise ValueError('need a materialized array or an entry function')
        self.n = n
        self.k = k
        self.mode = mode
        self.index = np.arange(n) if index is None else np.asarray(index, dtype=np.int64)
        self._dense = dense
        self._entry_fn = entry_fn
        self._slice_fn = slice_fn

    def __repr__(self):
        return f'<IntersectionTensor n={self.n} k={self.k} mode={self.mode}>'

    @property
    def m(self):
        return self.n

    @property
    def materialized(self):
        return self._dense is not None

    @classmethod
    def from_dense(cls, array, k=None):
        array = np.asarray(array)
        if array.ndim != 3 or len(set(array.shape)) != 1:
            raise DimensionMismatchError('tensor must be n x n x n')
        if k is None:
            k = int(array.max()) if array.size else 0
        return cls(array.shape[0], k, dense=array)

    def entry(self, a, b, c):
        if self._dense is not None:
            return int(self._dense[a, b, c])
        return int(self._entry_fn(a, b, c))

    def slice(self, c):
        """Matrix T[:, :, c]."""
        if self._dense is not None:
            return self._dense[:, :, c]
        if self._slice_fn is None:
            return np.array([[self._entry_fn(a, b, c) for b in range(self.n)] for a in range(self.n)])
        return self._slice_fn(c)

    def to_dense(self):
        if self._dense is None:
            self._dense = np.stack([self.slice(c) for c in range(self.n)], axis=2)
        return self._dense

    def is_symmetric(self):
        dense = self.to_dense()
        return all(
            np.array_equal(dense, dense.transpose(axes))
            for axes in itertools.permutations(range(3))
        )

    def metadata(self):
        return {'m': self.n, 'k': self.k, 'mode': self.mode, 'anchors': self.index.tolist()}


def _checked(values, k, positions, clamp):
    """Validate inclusion-exclusion output; positions maps (i, j) -> (a, b, c)."""
    if clamp:
        return np.clip(values, 0, k)
    bad = np.argwhere((values < 0) | (values > k))
    if len(bad):
        i, j = bad[0]
        raise TensorInconsistencyError(positions(i, j), values[i, j], k)
    return values


def _anchor_slice(M, lut, pairs, pos, index, k):
    """Slice at anchor index[pos] by restricting to the zero columns of that row.

    ``pairs`` holds the estimated pairwise union sizes among ``index``. Each
    triple union is clipped to [largest pair union, smallest pair union + k].
    """
    a = int(index[pos])
    triple = lut[triple_zero_counts(M, a, index)]
    row = pairs[pos]
    lo = np.maximum(np.maximum(row[:, None], row[None, :]), pairs)
    hi = np.minimum(np.minimum(row[:, None], row[None, :]), pairs) + k
    triple = np.clip(triple, lo, hi)
    triple[pos, :] = row
    triple[:, pos] = row
    np.fill_diagonal(triple, row)
    return triple - row[:, None] - row[None, :] - pairs + 3 * k


def build_tensor(M, r, k, mode=FULL, anchors=None, clamp=False, table=None):
    """Bootstrap T from the Boolean Gram matrix.

    Every union size |S_a|S_b| and |S_a|S_b|S_c| is recovered by inverting the
    fraction of columns on which the rows are simultaneously zero against the
    mu table, and T[a,b,c] = t_abc - t_ab - t_ac - t_bc + 3k. Slices are built
    per anchor row a from the columns L_a where row a is zero.

    mode 'full' materializes all m slices, 'anchored' materializes the tensor
    restricted to ``anchors`` (statistics still use all m columns) and 'lazy'
    returns a handle computing entries on demand.
    """
    if M.m < 1:
        raise ParameterError('empty Gram matrix')
    table = mu_table(r, k) if table is None else table
    table = table.extend(min(3 * k, r))
    lut = inversion_lut(M.m, table)

    if mode == LAZY:
        return _lazy_tensor(M, k, table, lut, clamp)
    if mode == ANCHORED:
        if anchors is None:
            raise ParameterError('anchored mode needs an anchor set')
        index = np.asarray(sorted(set(int(a) for a in anchors)), dtype=np.int64)
        if index.size == 0 or index[0] < 0 or index[-1] >= M.m:
            raise ParameterError('anchor indices out of range')
    elif mode == FULL:
        index = np.arange(M.m, dtype=np.int64)
    else:
        raise ParameterError(f'unknown tensor mode {mode!r}')

    n = len(index)
    pairs = pairwise_union_sizes(M, table, rows=index, cols=index)
    dense = np.empty((n, n, n), dtype=np.int16)
    for pos in range(n):
        values = _anchor_slice(M, lut, pairs, pos, index, k)
        dense[pos] = _checked(values, k, lambda i, j: (index[pos], index[i], index[j]), clamp)
        if pos and pos % 100 == 0:
            logger.debug('built %d of %d tensor slices', pos, n)
    logger.info('built %s tensor with %d slices from m=%d', mode, n, M.m)
    return IntersectionTensor(n, k, dense=dense, mode=mode, index=index)


def _lazy_tensor(M, k, table, lut, clamp):
    def size(*rows):
        distinct = sorted(set(rows))
        if len(distinct) == 1:
            return k
        if len(distinct) == 2:
            return int(pairwise_union_sizes(M, table, rows=distinct[:1], cols=distinct[1:])[0, 0])
        return int(lut[zero_cooccurrence(M, distinct)])

    def entry(a, b, c):
        ab, ac, bc = size(a, b), size(a, c), size(b, c)
        abc = min(max(size(a, b, c), ab, ac, bc), min(ab, ac, bc) + k)
        value = abc - ab - ac - bc + 3 * k
        if clamp:
            return min(max(value, 0), k)
        if not 0 <= value <= k:
            raise TensorInconsistencyError((a, b, c), value, k)
        return value

    cache = {}

    def slice_at(c):
        if 'pairs' not in cache:
            cache['pairs'] = pairwise_union_sizes(M, table)
        values = _anchor_slice(M, lut, cache['pairs'], c, np.arange(M.m), k)
        return _checked(values, k, lambda i, j: (i, j, c), clamp)

    return IntersectionTensor(M.m, k, entry_fn=entry, slice_fn=slice_at, mode=LAZY)


def oracle_tensor(W, lazy=False):
    """Exact T[a,b,c] = |S_a & S_b & S_c| computed from the supports."""
    if lazy:
        masks = W.masks

        def entry(a, b, c):
            both = np.bitwise_and(np.bitwise_and(masks[a], masks[b]), masks[c])
            return int(row_popcount(both[None, :])[0])

        return IntersectionTensor(W.m, W.k, entry_fn=entry, mode=ORACLE)
    dense = W.dense().astype(np.int64)
    values = np.einsum('ai,bi,ci->abc', dense, dense, dense).astype(np.int16)
    return IntersectionTensor(W.m, W.k, dense=values, mode=ORACLE)


def contract(T, v):
    """Sum over c of v[c] * T[:, :, c]."""
    v = np.asarray(v, dtype=float)
    if v.shape != (T.n,):
        raise DimensionMismatchError(f'vector has length {v.shape}, tensor dimension is {T.n}')
    if T.materialized:
        return np.tensordot(T.to_dense().astype(float), v, axes=([2], [0]))
    out = np.zeros((T.n, T.n))
    for c in np.flatnonzero(v):
        out += v[c] * T.slice(c)
    return out
