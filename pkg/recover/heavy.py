"""Heavy-coordinate recovery of a private dataset from |W X| and the recovered W."""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from core.conf import ssbmf_setting
from core.exceptions import DimensionMismatchError, ParameterError, RankDeficiencyError
from instance.selection import SelectionMatrix
from jennrich.pipeline import match_columns, tensor_recover
from recover.instahide import Dataset, SyntheticDataset, heaviness_mask

logger = logging.getLogger(__name__)

EXACT = 'exact'
PRINTED = 'printed'


@dataclass(frozen=True)
class HeavyRecoveryConfig:
    """eta is the target relative error; an entry is heavy when
    |p_i| >= c_heavy * (k / r) * sum_j |p_j|.

    ``normalization`` picks the factor turning the averaged estimator into an
    estimate of p_i^2: 'exact' is the reciprocal of its true p_i^2
    coefficient k(r-k)(r-2k) / (r(r-1)(r-2)), 'printed' is r(r-1) / (k(r-2k+1)).
    """
    eta: float = 0.25
    c_heavy: float = 6.0
    normalization: str = EXACT

    def __post_init__(self):
        if self.eta <= 0 or self.c_heavy <= 0:
            raise ParameterError('eta and c_heavy must be positive')
        if self.normalization not in (EXACT, PRINTED):
            raise ParameterError(f'unknown normalization {self.normalization!r}')

    @classmethod
    def from_settings(cls, **overrides):
        values = {'eta': ssbmf_setting('ETA'), 'c_heavy': ssbmf_setting('C_HEAVY')}
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


def expected_square_inner(p, r, k):
    """E_S <e_S, p>^2 over uniform k-subsets S of [r]."""
    if r < 2:
        raise ParameterError(f'need r >= 2, got r={r}')
    if not 1 <= k <= r:
        raise ParameterError(f'need 1 <= k <= r, got r={r}, k={k}')
    p = np.asarray(p, dtype=float)
    if p.shape != (r,):
        raise DimensionMismatchError(f'p must have length {r}')
    total = p.sum()
    return float(k * (r - k) / (r * (r - 1)) * (p @ p) + k * (k - 1) / (r * (r - 1)) * total ** 2)


def expected_estimator(p, r, k):
    """E_S[(e_S - (k-1)/(r-2) 1) <e_S, p>^2] in closed form.

    Entry i is a p_i^2 + b p_i sum(p) + c sum(p)^2; the ||p||^2 terms cancel.
    """
    if r < 3:
        raise ParameterError(f'need r >= 3, got r={r}')
    p = np.asarray(p, dtype=float)
    if p.shape != (r,):
        raise DimensionMismatchError(f'p must have length {r}')
    denominator = r * (r - 1) * (r - 2)
    total = p.sum()
    return (
        k * (r - k) * (r - 2 * k) / denominator * p ** 2
        + 2 * k * (k - 1) * (r - k) / denominator * p * total
        - k * (k - 1) / denominator * total ** 2
    )


def normalization_factor(r, k, normalization=EXACT):
    """Scale turning the averaged estimator into an estimate of p_i^2.

    At r = 2k the exact p_i^2 coefficient vanishes, so 'exact' falls back to
    the printed factor there.
    """
    if r < 2 * k or r < 3:
        raise ParameterError(f'need r >= 2k and r >= 3, got r={r}, k={k}')
    if normalization == PRINTED or r == 2 * k:
        return r * (r - 1) / (k * (r - 2 * k + 1))
    return r * (r - 1) * (r - 2) / (k * (r - k) * (r - 2 * k))


def _selection_dense(W):
    if isinstance(W, SelectionMatrix):
        return W.dense().astype(float), W.k
    dense = np.asarray(W, dtype=float)
    return dense, int(dense[0].sum())


def estimator(W, z):
    """(1/m) sum_i (w_i - (k-1)/(r-2) 1) z_i^2, one column per column of z."""
    dense, k = _selection_dense(W)
    m, r = dense.shape
    z = np.asarray(z, dtype=float)
    if z.shape[0] != m:
        raise DimensionMismatchError(f'z has {z.shape[0]} entries, W has {m} rows')
    squares = z ** 2
    return (dense.T @ squares - (k - 1) / (r - 2) * squares.sum(axis=0)) / m


def get_heavy_coordinates(W, z, cfg=None):
    """Magnitude estimates |p_i| from z = |W p|.

    Accepts one column z (length m) or several (m x d) and returns r or
    r x d estimates sqrt(max(q_hat, 0)).
    """
    cfg = HeavyRecoveryConfig.from_settings() if cfg is None else cfg
    dense, k = _selection_dense(W)
    r = dense.shape[1]
    scale = normalization_factor(r, k, cfg.normalization)
    z = np.asarray(z, dtype=float)
    if (z < 0).any():
        raise ParameterError('z holds absolute values and must be nonnegative')
    q_hat = estimator(dense, z) * scale
    return np.sqrt(np.maximum(q_hat, 0.0))


@dataclass
class RecoveryReport:
    success: bool
    residual: int = None
    failure: str = None
    permutation: list = None
    heavy: np.ndarray = None
    entries: list = field(default_factory=list)
    retries: int = None
    seconds: float = None

    def to_dict(self, timings=False):
        report = {
            'success': self.success,
            'residual': self.residual,
            'retries': self.retries,
            'heavy_count': None if self.heavy is None else int(self.heavy.sum()),
        }
        if self.failure:
            report['failure'] = self.failure
        if self.permutation is not None:
            report['permutation'] = self.permutation
        if self.entries:
            report['entries'] = self.entries
        if timings:
            report['seconds'] = self.seconds
        return report


def _entry_records(X_hat, heavy, truth, permutation, k, c_heavy):
    """Per-entry comparison of estimates (in W_hat column order) with the truth."""
    aligned = truth.X[permutation]
    true_heavy = heaviness_mask(aligned, k, c_heavy)
    true_heavy_signed = heaviness_mask(aligned, k, c_heavy, signed=True)
    records = []
    for i, j in np.ndindex(X_hat.shape):
        magnitude = abs(aligned[i, j])
        records.append({
            'row': i,
            'column': j,
            'estimate': float(X_hat[i, j]),
            'heavy_flag': bool(heavy[i, j]),
            'true_heavy': bool(true_heavy[i, j]),
            'true_heavy_signed': bool(true_heavy_signed[i, j]),
            'relative_error': float(abs(X_hat[i, j] - magnitude) / magnitude) if magnitude else None,
        })
    return records


def recover_dataset(M, Z, r, k, cfg=None, jennrich_config=None, seed=0, truth=None, truth_selection=None):
    """Recover W from the similarity matrix, then heavy magnitudes of X column by column.

    Rows of the estimate follow the column order of the recovered W. When a
    ground-truth dataset and selection matrix are supplied, the report
    carries per-entry records aligned through the column matching.
    """
    cfg = HeavyRecoveryConfig.from_settings() if cfg is None else cfg
    Z = Z if isinstance(Z, SyntheticDataset) else SyntheticDataset(Z)
    if Z.m != M.m:
        raise DimensionMismatchError(f'similarity matrix is {M.m} x {M.m} but Z has {Z.m} rows')
    # fail on degenerate (r, k) before the tensor stage
    normalization_factor(r, k, cfg.normalization)

    factors = tensor_recover(M, r, k, jennrich_config, seed)
    report = RecoveryReport(
        success=factors.success,
        residual=factors.residual,
        failure=factors.failure,
        retries=factors.diagnostics.get('retries'),
        seconds=factors.diagnostics.get('seconds'),
    )
    if not factors.success:
        return None, report

    X_hat = get_heavy_coordinates(factors.W_hat, Z.Z, cfg)
    report.heavy = heaviness_mask(X_hat, k, cfg.c_heavy)
    if truth is not None and truth_selection is not None:
        match = match_columns(factors.W_hat, truth_selection)
        if match.matched:
            report.permutation = match.permutation
            report.entries = _entry_records(X_hat, report.heavy, truth, match.permutation, k, cfg.c_heavy)
        else:
            logger.warning('recovered columns do not match the reference selection matrix')
    logger.info('recovered %d x %d magnitudes, %d flagged heavy', r, Z.d, int(report.heavy.sum()))
    return Dataset(X_hat), report


def solve_exact(W, Y):
    """Least-squares solve of W X = Y for signed mixtures Y."""
    dense, _ = _selection_dense(W)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != dense.shape[0]:
        raise DimensionMismatchError(f'Y has {Y.shape[0]} rows, W has {dense.shape[0]}')
    X, _, rank, _ = linalg.lstsq(dense, Y)
    if rank < dense.shape[1]:
        raise RankDeficiencyError(rank, dense.shape[1], 'selection matrix')
    residual = float(np.abs(dense @ X - Y).max()) if Y.size else 0.0
    logger.debug('exact solve residual %.3e', residual)
    return Dataset(X, residual=residual)


def relative_errors(estimate, truth, mask):
    """| |estimate| - |truth| | / |truth| over the masked entries."""
    estimate = np.abs(np.asarray(estimate, dtype=float))
    truth = np.abs(np.asarray(truth, dtype=float))
    selected = mask & (truth > 0)
    return np.abs(estimate[selected] - truth[selected]) / truth[selected] if selected.any() else np.array([])


def standard_error_bound(samples, expected, n_sigma=5):
    """True when the sample mean lies within n_sigma standard errors of expected."""
    samples = np.asarray(samples, dtype=float)
    spread = samples.std(ddof=1, axis=0) / math.sqrt(len(samples))
    return np.abs(samples.mean(axis=0) - expected) <= n_sigma * np.maximum(spread, 1e-12)
