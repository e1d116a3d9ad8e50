import enum
import logging
import numpy as np

from core.bits import (
    BLOCK_WORDS, complement_rows, int_to_row, n_words, pack_rows, pairwise_and_popcount,
    row_popcount, row_to_int, unpack_rows,
)
from core.exceptions import DimensionMismatchError, ParameterError

logger = logging.getLogger(__name__)


class Arithmetic(str, enum.Enum):
    BOOLEAN = 'boolean'
    INTEGER = 'integer'

    @classmethod
    def parse(cls, value):
        try:
            return cls(value)
        except ValueError:
            raise ParameterError(f'unknown arithmetic {value!r}; use boolean or integer') from None


class GramMatrix:
    """Symmetric m x m matrix W W^T.

    ``bits`` always holds the Boolean-semiring entries (1 iff S_a and S_b
    intersect) as packed rows. ``counts`` optionally holds the integer entries
    |S_a & S_b|.
    """

    def __init__(self, m, bits, counts=None):
        bits = np.asarray(bits, dtype=np.uint64)
        if bits.shape != (m, n_words(m)):
            raise DimensionMismatchError(f'packed rows must have shape {(m, n_words(m))}, got {bits.shape}')
        if counts is not None:
            counts = np.asarray(counts, dtype=np.int64)
            if counts.shape != (m, m):
                raise DimensionMismatchError(f'counts must be {m} x {m}, got {counts.shape}')
        self.m = m
        self.bits = bits
        self.counts = counts

    def __repr__(self):
        kind = 'integer' if self.counts is not None else 'boolean'
        return f'<GramMatrix m={self.m} {kind}>'

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise DimensionMismatchError('Gram matrix must be square')
        return cls(dense.shape[0], pack_rows(dense != 0))

    @classmethod
    def from_counts(cls, counts):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DimensionMismatchError('Gram matrix must be square')
        if (counts < 0).any():
            raise ParameterError('integer Gram entries must be nonnegative')
        return cls(counts.shape[0], pack_rows(counts > 0), counts)

    @classmethod
    def from_hex_rows(cls, m, hex_rows):
        if len(hex_rows) != m:
            raise DimensionMismatchError(f'expected {m} hex rows, got {len(hex_rows)}')
        bits = np.zeros((m, n_words(m)), dtype=np.uint64)
        for a, text in enumerate(hex_rows):
            value = int(text, 16) if text else 0
            if value >> m:
                raise ParameterError(f'hex row {a} has bits beyond column {m - 1}')
            bits[a] = int_to_row(value, m)
        return cls(m, bits)

    def hex_rows(self):
        width = -(-self.m // 4)
        return [format(row_to_int(row), f'0{width}x') for row in self.bits]

    def dense(self):
        return unpack_rows(self.bits, self.m)

    def entry(self, a, b):
        return int((int(self.bits[a, b // 64]) >> (b % 64)) & 1)

    def complement(self, rows=None):
        """Packed rows of 1 - M (zeros of M as set bits), for ``rows`` or every row.

        Computed on each call; callers work in row blocks.
        """
        bits = self.bits if rows is None else self.bits[np.asarray(rows, dtype=np.int64)]
        return complement_rows(bits, self.m)

    def row_block(self):
        """Rows per block so one block of packed rows stays within BLOCK_WORDS."""
        return max(1, BLOCK_WORDS // self.bits.shape[1])

    def zero_counts(self):
        """Number of zeros in each row."""
        return self.m - row_popcount(self.bits)

    def to_boolean(self):
        """Drop integer entries, keeping the Boolean-semiring matrix 1{M > 0}."""
        return GramMatrix(self.m, self.bits.copy())

    def validate(self, k=None):
        """Check symmetry and the forced diagonal; raise ParameterError otherwise."""
        dense = self.dense()
        if not np.array_equal(dense, dense.T):
            raise ParameterError('Gram matrix is not symmetric')
        if not dense.diagonal().all():
            raise ParameterError('Boolean Gram diagonal must be all ones')
        if self.counts is not None:
            if not np.array_equal(self.counts, self.counts.T):
                raise ParameterError('integer Gram matrix is not symmetric')
            if not np.array_equal(self.counts > 0, dense.astype(bool)):
                raise ParameterError('integer and Boolean entries disagree')
            if k is not None and (self.counts.diagonal() != k).any():
                raise ParameterError(f'integer Gram diagonal must equal k={k}')
        return self


def boolean_row_blocks(W):
    """Yield (start, packed rows) blocks of the Boolean Gram matrix of W.

    Row a is the OR of the packed row sets of the columns in S_a.
    """
    if W.m == 0:
        return
    column_rows = pack_rows(W.dense().T)
    supports = np.asarray(W.rows, dtype=np.int64).reshape(W.m, W.k)
    block = max(1, BLOCK_WORDS // (max(1, W.k) * column_rows.shape[1]))
    for start in range(0, W.m, block):
        yield start, np.bitwise_or.reduce(column_rows[supports[start:start + block]], axis=1)


def _boolean_rows(W):
    bits = np.zeros((W.m, n_words(W.m)), dtype=np.uint64)
    for start, rows in boolean_row_blocks(W):
        bits[start:start + len(rows)] = rows
    return bits


def gram(W, arithmetic=Arithmetic.BOOLEAN):
    """W W^T over the Boolean semiring, or over the integers.

    Boolean rows are ORs of packed column row-sets; integer entries come from
    AND + popcount of the packed row supports.
    """
    arithmetic = Arithmetic.parse(arithmetic)
    counts = None
    if arithmetic is Arithmetic.INTEGER:
        masks = W.masks
        counts = pairwise_and_popcount(masks, masks)
    return GramMatrix(W.m, _boolean_rows(W), counts)


def factorization_error(M, W, arithmetic=Arithmetic.BOOLEAN, off_diagonal=False):
    """||M - gram(W)||_0 over the full matrix (or off the diagonal only)."""
    arithmetic = Arithmetic.parse(arithmetic)
    if M.m != W.m:
        raise DimensionMismatchError(f'Gram matrix is {M.m} x {M.m} but W has {W.m} rows')
    if arithmetic is Arithmetic.INTEGER:
        if M.counts is None:
            raise ParameterError('integer comparison needs a Gram matrix with integer entries')
        differ = M.counts != gram(W, arithmetic).counts
        total = int(differ.sum())
        diagonal = int(differ.diagonal().sum())
    else:
        total = diagonal = 0
        for start, rows in boolean_row_blocks(W):
            differ = np.bitwise_xor(M.bits[start:start + len(rows)], rows)
            total += int(row_popcount(differ).sum())
            for offset in range(len(rows)):
                a = start + offset
                diagonal += (int(differ[offset, a // 64]) >> (a % 64)) & 1
    return total - diagonal if off_diagonal else total
