import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from core.exceptions import ParameterError


def mu_value(r, k, t):
    """mu_t = C(r - t, k) / C(r, k): a uniform k-subset of [r] misses a fixed t-set."""
    if t < 0:
        raise ParameterError(f'union size must be nonnegative, got {t}')
    if t > r:
        return Fraction(0)
    return Fraction(math.comb(r - t, k), math.comb(r, k))


@dataclass(frozen=True)
class MuTable:
    """Exact values mu_0 .. mu_{t_max} for fixed (r, k)."""
    r: int
    k: int
    t_max: int
    values: tuple = field(repr=False)

    def __getitem__(self, t):
        if 0 <= t <= self.t_max:
            return self.values[t]
        return mu_value(self.r, self.k, t)

    def __len__(self):
        return len(self.values)

    def extend(self, t_max):
        """Table covering at least union sizes 0..t_max."""
        if t_max <= self.t_max:
            return self
        return mu_table(self.r, self.k, t_max)

    def midpoints(self):
        return [(self.values[t] + self.values[t + 1]) / 2 for t in range(self.t_max)]

    def as_strings(self):
        return [f'{value.numerator}/{value.denominator}' for value in self.values]


def mu_table(r, k, t_max=None):
    if not 1 <= k <= r:
        raise ParameterError(f'need 1 <= k <= r, got r={r}, k={k}')
    if t_max is None:
        t_max = min(3 * k, r - k)
    if not 0 <= t_max <= r:
        raise ParameterError(f'need 0 <= t_max <= r, got t_max={t_max}')
    values = tuple(mu_value(r, k, t) for t in range(t_max + 1))
    return MuTable(r=r, k=k, t_max=t_max, values=values)


def invert_fraction(frac, table):
    """Union size t whose mu_t is closest to frac; ties go to the smaller t."""
    frac = frac if isinstance(frac, Fraction) else Fraction(frac)
    best_t, best_distance = 0, None
    for t, value in enumerate(table.values):
        distance = abs(value - frac)
        if best_distance is None or distance < best_distance:
            best_t, best_distance = t, distance
    return best_t


def inversion_lut(m, table):
    """lut[c] = invert_fraction(c / m, table) for every count c in 0..m.

    mu is nonincreasing, so the nearest value is the number of midpoints
    (mu_t + mu_{t+1}) / 2 lying strictly above c / m, and each midpoint turns
    into an exact integer threshold on c.
    """
    if m < 1:
        raise ParameterError('need at least one column')
    counts = np.arange(m + 1, dtype=np.int64)
    lut = np.zeros(m + 1, dtype=np.int64)
    for midpoint in table.midpoints():
        bound = math.ceil(midpoint * m)
        lut += counts < bound
    return lut


@dataclass(frozen=True)
class GapReport:
    r: int
    k: int
    in_regime: bool
    min_gap: Fraction
    violations: tuple

    @property
    def ok(self):
        return not self.violations


def gap_report(r, k):
    """Exact check of the mu separation for union sizes t <= 3k.

    Checks, for every t <= 3k: mu_t - mu_{t+1} >= k / (4r), the explicit lower
    bound (1 - (t+1)(k-1)/(r-k+2)) * k/(r-k+1), and mu_t >= 1 - tk/(r-k+1).
    The inequalities are only promised when r >= 64 k^2 (``in_regime``).
    """
    if not 1 <= k <= r:
        raise ParameterError(f'need 1 <= k <= r, got r={r}, k={k}')
    violations = []
    gaps = []
    for t in range(3 * k + 1):
        gap = mu_value(r, k, t) - mu_value(r, k, t + 1)
        gaps.append(gap)
        if gap < Fraction(k, 4 * r):
            violations.append(('gap', t, gap))
        explicit = (1 - Fraction((t + 1) * (k - 1), r - k + 2)) * Fraction(k, r - k + 1)
        if gap < explicit:
            violations.append(('explicit', t, gap))
        if mu_value(r, k, t) < 1 - Fraction(t * k, r - k + 1):
            violations.append(('lower', t, mu_value(r, k, t)))
    return GapReport(r=r, k=k, in_regime=r >= 64 * k * k, min_gap=min(gaps), violations=tuple(violations))
