"""Monte-Carlo experiments: singularity frequencies, fibres and anti-concentration."""
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from core.conf import ssbmf_setting
from core.exceptions import ParameterError
from core.random import stream
from instance.selection import gen_selection_matrix
from probes.rank import random_primes, rank_f2, rank_real

logger = logging.getLogger(__name__)

REAL = 'real'
NOTIONS = ('f2', REAL)


def wilson_interval(successes, trials, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ParameterError('need at least one trial')
    if not 0 <= successes <= trials:
        raise ParameterError('successes must lie in 0..trials')
    z = stats.norm.ppf(0.5 + confidence / 2)
    phat = successes / trials
    denominator = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denominator
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denominator
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class FrequencyRecord:
    notion: str
    parameter: str
    successes: int
    trials: int
    ci_low: float
    ci_high: float

    @property
    def frequency(self):
        return self.successes / self.trials

    def as_row(self):
        return {
            'notion': self.notion,
            'parameter': self.parameter,
            'frequency': self.frequency,
            'successes': self.successes,
            'trials': self.trials,
            'ci_low': self.ci_low,
            'ci_high': self.ci_high,
        }


def trial_seed(seed, label, trial):
    return int(stream(seed, label, trial).integers(0, 2**63))


def singularity_experiment(m, r, k, trials, seed, notions=NOTIONS, prime_bits=31):
    """Fraction of random selection matrices with full column rank, per rank notion.

    Real rank uses ``RANK_PRIMES`` random primes of ``prime_bits`` bits shared
    across trials, certified exactly whenever it falls short of r.
    """
    if trials < 1:
        raise ParameterError('need at least one trial')
    unknown = set(notions) - set(NOTIONS)
    if unknown:
        raise ParameterError(f'unknown rank notion(s): {", ".join(sorted(unknown))}')
    primes = random_primes(ssbmf_setting('RANK_PRIMES'), prime_bits, seed)
    full = Counter()
    for trial in range(trials):
        dense = gen_selection_matrix(m, r, k, trial_seed(seed, 'singularity', trial)).dense()
        if 'f2' in notions:
            full['f2'] += rank_f2(dense) == r
        if REAL in notions:
            full[REAL] += rank_real(dense, primes=primes)[0] == r
    parameter = f'm={m},r={r},k={k}'
    logger.info('singularity experiment %s over %d trials: %s', parameter, trials, dict(full))
    return [
        FrequencyRecord(notion, parameter, int(full[notion]), trials, *wilson_interval(int(full[notion]), trials))
        for notion in notions
    ]


def fibre_stats(x):
    """(size of the largest fibre, number of nonzero entries)."""
    x = np.asarray(x).ravel()
    if x.size == 0:
        return 0, 0
    largest = Counter(x.tolist()).most_common(1)[0][1]
    return largest, int(np.count_nonzero(x))


def _modulus(q):
    if q is None or q == REAL:
        return None
    try:
        q = int(q)
    except (TypeError, ValueError):
        raise ParameterError(f"modulus must be an integer or 'real', got {q!r}") from None
    if q < 2:
        raise ParameterError(f'modulus must be at least 2, got {q}')
    return q


def _atoms(values, q):
    if q is not None:
        values = np.mod(values, q)
    _, counts = np.unique(values, return_counts=True)
    return counts


def envelope(r, k, s, constant=None):
    """C * sqrt(r / (s k)) for a vector whose largest fibre has size r - s."""
    constant = ssbmf_setting('ANTICONCENTRATION_CONSTANT') if constant is None else constant
    if s == 0:
        return math.inf
    return constant * math.sqrt(r / (s * k))


@dataclass(frozen=True)
class AnticoncentrationReport:
    max_atom: float
    largest_fibre: int
    s: int
    envelope: float
    samples: int = None

    @property
    def within(self):
        return self.max_atom <= self.envelope


def _check_vector(x, r, k):
    x = np.asarray(x)
    if x.shape != (r,):
        raise ParameterError(f'x must have length r={r}')
    if not 1 <= k <= r:
        raise ParameterError(f'need 1 <= k <= r, got r={r}, k={k}')
    if not np.issubdtype(x.dtype, np.integer):
        x = x.astype(float)
    return x


def anticoncentration_estimate(x, r, k, q=REAL, samples=10_000, seed=0, constant=None):
    """Monte-Carlo max_a Pr[<w, x> = a] (mod q, or over the reals) for uniform k-sparse w.

    Supports are the k smallest of r uniform keys per sample.
    """
    if samples < 1:
        raise ParameterError('need at least one sample')
    x = _check_vector(x, r, k)
    modulus = _modulus(q)
    rng = stream(seed, 'anticoncentration')
    block = max(1, (1 << 20) // r)
    sums = []
    for start in range(0, samples, block):
        size = min(block, samples - start)
        keys = rng.random((size, r))
        supports = np.argpartition(keys, k - 1, axis=1)[:, :k]
        sums.append(x[supports].sum(axis=1))
    counts = _atoms(np.concatenate(sums), modulus)
    largest, _ = fibre_stats(x)
    s = r - largest
    return AnticoncentrationReport(
        max_atom=float(counts.max() / samples), largest_fibre=largest, s=s,
        envelope=envelope(r, k, s, constant), samples=samples,
    )


def anticoncentration_exact(x, r, k, q=REAL):
    """Exact max atom over all C(r, k) supports."""
    x = _check_vector(x, r, k)
    modulus = _modulus(q)
    sums = np.array([x[list(support)].sum() for support in itertools.combinations(range(r), k)])
    counts = _atoms(sums, modulus)
    return Fraction(int(counts.max()), math.comb(r, k))


def planted_fibre_vector(r, s, seed=0):
    """Integer vector with r - s zeros and s distinct nonzero entries at random positions."""
    if not 0 <= s <= r:
        raise ParameterError(f'need 0 <= s <= r, got s={s}')
    rng = stream(seed, 'fibre', s)
    x = np.zeros(r, dtype=np.int64)
    positions = rng.choice(r, size=s, replace=False)
    x[positions] = rng.choice(np.arange(1, 1000 * r), size=s, replace=False)
    return x


def envelope_scan(r, k, trials, samples, seed, q=REAL, constant=None):
    """Fraction of planted-fibre vectors (s = 1..r-1) whose estimate sits under the envelope."""
    within = 0
    total = 0
    for s in range(1, r):
        for trial in range(trials):
            unit = s * trials + trial
            x = planted_fibre_vector(r, s, trial_seed(seed, 'envelope', unit))
            report = anticoncentration_estimate(x, r, k, q, samples, trial_seed(seed, 'envelope-w', unit), constant)
            within += report.within
            total += 1
    logger.debug('envelope scan r=%d k=%d: %d of %d within', r, k, within, total)
    return within / total if total else 1.0
