"""Rank of 0/1 matrices over F2, modulo primes and over the rationals."""
import logging
from dataclasses import dataclass, field

import numpy as np

from core.bits import pack_rows, row_to_int
from core.conf import ssbmf_setting
from core.exceptions import ParameterError
from core.random import stream
from instance.selection import SelectionMatrix

logger = logging.getLogger(__name__)

# Deterministic Miller-Rabin witnesses for every n < 3.3e24.
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_INT64_SAFE = 1 << 31


def _dense(W):
    return W.dense() if isinstance(W, SelectionMatrix) else np.asarray(W)


def is_prime(n):
    if n < 2:
        return False
    for p in _WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def random_primes(count, bits=62, seed=0):
    """``count`` distinct random primes in [2^(bits-1), 2^bits)."""
    if not 3 <= bits <= 62:
        raise ParameterError(f'prime size must be 3..62 bits, got {bits}')
    rng = stream(seed, 'primes', bits)
    primes = []
    while len(primes) < count:
        candidate = int(rng.integers(1 << (bits - 1), 1 << bits)) | 1
        if candidate not in primes and is_prime(candidate):
            primes.append(candidate)
    return primes


def rank_f2(W):
    """Rank over F2 by elimination on rows packed into Python integers."""
    basis = {}
    for packed in pack_rows(_dense(W)):
        value = row_to_int(packed)
        while value:
            lead = value.bit_length() - 1
            if lead not in basis:
                basis[lead] = value
                break
            value ^= basis[lead]
    return len(basis)


def rank_mod_p(W, p):
    """Rank modulo a prime p by Gaussian elimination.

    Primes below 2^31 run in int64; larger primes fall back to Python integers.
    """
    dtype = np.int64 if p < _INT64_SAFE else object
    A = np.array(_dense(W), dtype=dtype) % p
    rows, cols = A.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        nonzero = np.flatnonzero(A[rank:, col] != 0)
        if not nonzero.size:
            continue
        pivot = rank + nonzero[0]
        if pivot != rank:
            A[[rank, pivot]] = A[[pivot, rank]]
        inverse = pow(int(A[rank, col]), -1, p)
        A[rank] = (A[rank] * inverse) % p
        below = A[rank + 1:, col].copy()
        if below.any():
            A[rank + 1:] = (A[rank + 1:] - below[:, None] * A[rank][None, :]) % p
        rank += 1
    return rank


def rank_bareiss(W):
    """Exact rank over the rationals by fraction-free (Bareiss) elimination."""
    A = [[int(v) for v in row] for row in _dense(W)]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    rank, previous = 0, 1
    for col in range(cols):
        pivot = next((i for i in range(rank, rows) if A[i][col]), None)
        if pivot is None:
            continue
        A[rank], A[pivot] = A[pivot], A[rank]
        for i in range(rank + 1, rows):
            A[i] = [
                (A[rank][col] * A[i][j] - A[i][col] * A[rank][j]) // previous
                for j in range(cols)
            ]
        previous = A[rank][col]
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass
class RankReport:
    rank_f2: int
    rank_real: int
    rank_modq: dict = field(default_factory=dict)
    certified: bool = False
    notes: str = ''

    def full(self, r):
        return {'f2': self.rank_f2 == r, 'real': self.rank_real == r}


def rank_real(W, primes=None, seed=0, bits=62, certify_max_r=None):
    """Rank over the reals as the largest rank modulo several random primes.

    A modular rank equal to min(m, r) is exact; anything lower is confirmed by
    Bareiss elimination when r <= certify_max_r. Returns (rank, certified, ranks per prime).
    """
    dense = _dense(W)
    certify_max_r = ssbmf_setting('CERTIFY_RANK_MAX_R') if certify_max_r is None else certify_max_r
    if primes is None:
        primes = random_primes(ssbmf_setting('RANK_PRIMES'), bits, seed)
    per_prime = {p: rank_mod_p(dense, p) for p in primes}
    rank = max(per_prime.values(), default=0)
    if rank == min(dense.shape):
        return rank, True, per_prime
    if dense.shape[1] <= certify_max_r:
        logger.debug('modular rank %d below %d, certifying by exact elimination', rank, min(dense.shape))
        return rank_bareiss(dense), True, per_prime
    return rank, False, per_prime


def rank_report(W, primes=(), seed=0):
    """F2 rank, rank modulo each requested prime, and the real rank."""
    dense = _dense(W)
    requested = {int(p): rank_mod_p(dense, int(p)) for p in primes}
    real, certified, used = rank_real(dense, seed=seed)
    if certified:
        notes = 'real rank exact'
    else:
        notes = f'real rank is a lower bound from {len(used)} random primes'
    return RankReport(
        rank_f2=rank_f2(dense), rank_real=real, rank_modq=requested, certified=certified, notes=notes,
    )
