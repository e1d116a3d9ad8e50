"""Bit-packed Boolean matrices.

Rows are packed little-endian into uint64 words: bit ``j % 64`` of word
``j // 64`` holds column ``j``. Padding bits past the last column are zero.
"""
import numpy as np

WORD_BITS = 64

# Largest temporary (in uint64 words) a blocked kernel may allocate.
BLOCK_WORDS = 1 << 22

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


def n_words(n_cols):
    return max(1, -(-n_cols // WORD_BITS))


def pack_rows(dense):
    """Pack a 2-D 0/1 array into an (n_rows, n_words) uint64 array."""
    dense = np.asarray(dense, dtype=bool)
    if dense.ndim != 2:
        raise ValueError('expected a 2-D array')
    rows, cols = dense.shape
    width = n_words(cols)
    packed = np.packbits(dense, axis=1, bitorder='little')
    padded = np.zeros((rows, width * 8), dtype=np.uint8)
    padded[:, :packed.shape[1]] = packed
    return padded.view('<u8').astype(np.uint64, copy=False)


def unpack_rows(words, n_cols):
    """Inverse of pack_rows."""
    words = np.ascontiguousarray(words, dtype='<u8')
    as_bytes = words.view(np.uint8).reshape(words.shape[0], -1)
    return np.unpackbits(as_bytes, axis=1, count=n_cols, bitorder='little').astype(np.uint8)


def padding_mask(n_cols):
    """Word mask with ones exactly on valid column positions."""
    width = n_words(n_cols)
    mask = np.full(width, np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    tail = n_cols % WORD_BITS
    if tail:
        mask[-1] = np.uint64((1 << tail) - 1)
    if n_cols == 0:
        mask[:] = 0
    return mask


def complement_rows(words, n_cols):
    """Bitwise NOT restricted to the valid columns."""
    return np.bitwise_and(np.bitwise_not(words), padding_mask(n_cols))


def _swar_popcount(arr):
    arr = arr - ((arr >> np.uint64(1)) & _M1)
    arr = (arr & _M2) + ((arr >> np.uint64(2)) & _M2)
    arr = (arr + (arr >> np.uint64(4))) & _M4
    return (arr * _H01) >> np.uint64(56)


def popcount(words):
    """Per-word population count."""
    words = np.asarray(words, dtype=np.uint64)
    if hasattr(np, 'bitwise_count'):
        return np.bitwise_count(words)
    return _swar_popcount(words)


def row_popcount(words):
    """Number of set bits per row (sum over the last axis)."""
    return popcount(words).sum(axis=-1, dtype=np.int64)


def pairwise_and_popcount(left, right=None, block=None, right_block=None):
    """Matrix of popcount(left[i] & right[j]).

    The all-pairs AND/popcount is the counting kernel behind every co-occurrence
    statistic. It runs over tiles of ``block`` x ``right_block`` rows so the
    temporary AND array never exceeds BLOCK_WORDS words.
    """
    if right is None:
        right = left
    width = max(1, left.shape[1])
    if right_block is None:
        right_block = max(1, min(right.shape[0], BLOCK_WORDS // width))
    if block is None:
        block = max(1, BLOCK_WORDS // (right_block * width))
    out = np.empty((left.shape[0], right.shape[0]), dtype=np.int64)
    for start in range(0, left.shape[0], block):
        chunk = left[start:start + block, None, :]
        for col in range(0, right.shape[0], right_block):
            both = np.bitwise_and(chunk, right[None, col:col + right_block, :])
            out[start:start + block, col:col + right_block] = row_popcount(both)
    return out


def row_to_int(word_row):
    """Pack one row of words into a Python integer (bit j = column j)."""
    value = 0
    for position, word in enumerate(word_row):
        value |= int(word) << (WORD_BITS * position)
    return value


def int_to_row(value, n_cols):
    width = n_words(n_cols)
    row = np.zeros(width, dtype=np.uint64)
    for position in range(width):
        row[position] = np.uint64((value >> (WORD_BITS * position)) & 0xFFFFFFFFFFFFFFFF)
    return row
