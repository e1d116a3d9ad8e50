"""Binary Krawtchouk polynomials and the parity of <w, u> for random k-sparse w."""
import math
from dataclasses import dataclass, field
from fractions import Fraction

from core.exceptions import ParameterError


@dataclass(frozen=True)
class KrawtchoukValue:
    r: int
    k: int
    lam: int
    value: int

    def as_row(self):
        return {
            'lambda': self.lam,
            'value': self.value,
            'f2_zero_probability': f2_zero_probability(self.r, self.k, self.lam),
        }


def _check(r, k, lam):
    if r < 0 or not 0 <= k <= r:
        raise ParameterError(f'need 0 <= k <= r, got r={r}, k={k}')
    if not 0 <= lam <= r:
        raise ParameterError(f'need 0 <= lambda <= r, got lambda={lam}')


def krawtchouk(r, k, lam):
    """K_k^r(lam) = sum_i (-1)^i C(lam, i) C(r - lam, k - i), exactly."""
    _check(r, k, lam)
    return sum((-1) ** i * math.comb(lam, i) * math.comb(r - lam, k - i) for i in range(k + 1))


def krawtchouk_values(r, k, lams=None):
    """K_k^r(lam) for each lam in lams (default 0..r)."""
    lams = range(r + 1) if lams is None else lams
    return [KrawtchoukValue(r, k, lam, krawtchouk(r, k, lam)) for lam in lams]


def f2_zero_probability(r, k, lam):
    """Pr[<w, u> = 0 mod 2] for uniform k-sparse w and a fixed u of weight lam.

    Sums the even overlaps i = 0, 2, ... up to and including k.
    """
    _check(r, k, lam)
    even = sum(math.comb(lam, i) * math.comb(r - lam, k - i) for i in range(0, k + 1, 2))
    return Fraction(even, math.comb(r, k))


@dataclass(frozen=True)
class KrawtchoukBoundReport:
    r: int
    k: int
    checked: int
    violation: tuple = None

    @property
    def ok(self):
        return self.violation is None


def krawtchouk_bound_check(r, k):
    """Check |K_k^r(lam)| <= C(r, k) (1 - 2k/r)^lam for every lam <= r/2."""
    if r < 1 or k < 0 or 100 * k > 16 * r:
        raise ParameterError(f'the bound needs k <= 0.16 r, got r={r}, k={k}')
    total = math.comb(r, k)
    ratio = 1 - Fraction(2 * k, r)
    checked = 0
    for lam in range(r // 2 + 1):
        value = abs(krawtchouk(r, k, lam))
        bound = total * ratio ** lam
        checked += 1
        if value > bound:
            return KrawtchoukBoundReport(r, k, checked, violation=(lam, value, bound))
    return KrawtchoukBoundReport(r, k, checked)


@dataclass(frozen=True)
class DichotomyReport:
    """Per-lam checks of min(P_lam, P_{r-lam}) <= 2^-m and the upper envelope."""
    r: int
    k: int
    m: int
    rows: list = field(default_factory=list)

    @property
    def ok(self):
        return all(row['min_ok'] and row['max_ok'] for row in self.rows)


def parity_dichotomy_check(r, k, m):
    """For 1 <= lam <= r/2 compare P_mu = f2_zero_probability(r, k, mu)^m with
    (1/2)^m (smaller of the pair) and (1/2 + (1/2)(1 - 2k/r)^lam)^m (larger).

    Holds for odd k, where K_k^r(r - lam) = -K_k^r(lam); for even k the pair
    coincides and the first check fails whenever K_k^r(lam) > 0.
    """
    if m < 1:
        raise ParameterError('m must be positive')
    half = Fraction(1, 2)
    rows = []
    for lam in range(1, r // 2 + 1):
        p_low = f2_zero_probability(r, k, lam) ** m
        p_high = f2_zero_probability(r, k, r - lam) ** m
        envelope = (half + half * (1 - Fraction(2 * k, r)) ** lam) ** m
        rows.append({
            'lambda': lam,
            'min_ok': min(p_low, p_high) <= half ** m,
            'max_ok': max(p_low, p_high) <= envelope,
        })
    return DichotomyReport(r, k, m, rows)
