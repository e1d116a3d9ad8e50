"""The k-sparse alphabet: k-subsets of [r] addressed by colexicographic rank."""
import math
from functools import lru_cache

import numpy as np

from core.exceptions import AlphabetError, ParameterError

MAX_COLUMNS = 64


def alphabet_size(r, k):
    return math.comb(r, k)


def rank_letter(support):
    """Colex rank sum_i C(s_i, i + 1) of a sorted support s_0 < ... < s_{k-1}."""
    support = sorted(int(j) for j in support)
    if len(set(support)) != len(support) or (support and support[0] < 0):
        raise AlphabetError(f'not a set of column indices: {support}')
    return sum(math.comb(j, i + 1) for i, j in enumerate(support))


def unrank_letter(rank, r, k):
    """Inverse of rank_letter over the k-subsets of range(r)."""
    rank = int(rank)
    if not 0 <= rank < math.comb(r, k):
        raise AlphabetError(f'letter {rank} outside the alphabet of size C({r}, {k})')
    support = []
    c = r - 1
    for i in range(k, 0, -1):
        while math.comb(c, i) > rank:
            c -= 1
        support.append(c)
        rank -= math.comb(c, i)
        c -= 1
    return tuple(reversed(support))


def letter_mask(support):
    mask = 0
    for j in support:
        mask |= 1 << int(j)
    return mask


@lru_cache(maxsize=8)
def letter_masks(r, k):
    """uint64 bit masks of every letter, indexed by rank."""
    if r > MAX_COLUMNS:
        raise ParameterError(f'alphabets are limited to r <= {MAX_COLUMNS} columns, got r={r}')
    if not 1 <= k <= r:
        raise ParameterError(f'need 1 <= k <= r, got r={r}, k={k}')
    masks = np.zeros(math.comb(r, k), dtype=np.uint64)
    support = list(range(k))
    for rank in range(len(masks)):
        masks[rank] = letter_mask(support)
        # colex successor: bump the lowest position that can move, reset those below it
        i = 0
        while i < k - 1 and support[i] + 1 == support[i + 1]:
            i += 1
        support[i] += 1
        support[:i] = range(i)
    masks.flags.writeable = False
    return masks


def check_letters(sigma, r, k):
    sigma = np.asarray(sigma, dtype=np.int64)
    q = math.comb(r, k)
    bad = np.flatnonzero((sigma < 0) | (sigma >= q))
    if bad.size:
        raise AlphabetError(f'vertex {bad[0]} has letter {sigma[bad[0]]} outside the alphabet of size {q}')
    return sigma
