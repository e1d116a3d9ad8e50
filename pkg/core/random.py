"""Seeded, splittable random streams.

Every random draw in the project comes from a counter-based Philox generator
keyed by the user seed plus a stable label path, so parallel units (rows,
restarts, trials) get independent streams that do not depend on scheduling.
"""
import zlib

import numpy as np

from core.exceptions import ParameterError

SEED_MAX = 2**64 - 1


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ParameterError(f'seed must be a 64-bit unsigned integer, got {seed}')
    return seed


def _label_word(label):
    if isinstance(label, (int, np.integer)):
        return int(label) & SEED_MAX
    return zlib.crc32(str(label).encode('utf-8'))


def stream(seed, *labels):
    """Independent generator for (seed, label, label, ...)."""
    entropy = [check_seed(seed)] + [_label_word(label) for label in labels]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def row_stream(seed, row):
    """Generator for one row of a selection matrix, keyed directly by (seed, row)."""
    key = np.array([check_seed(seed), int(row)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def floyd_subset(rng, r, k):
    """Uniform k-subset of range(r) by Floyd's algorithm, returned sorted."""
    chosen = set()
    for j in range(r - k, r):
        t = int(rng.integers(0, j + 1))
        chosen.add(j if t in chosen else t)
    return tuple(sorted(chosen))
