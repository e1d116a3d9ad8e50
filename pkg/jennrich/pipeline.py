import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from core.conf import ssbmf_setting
from core.exceptions import (
    DimensionMismatchError, ExtensionError, ParameterError, RankDeficiencyError, RecoveryError,
)
from core.random import stream
from instance.gram import Arithmetic, factorization_error
from instance.selection import SelectionMatrix, check_dimensions
from jennrich.decompose import jennrich_decompose, round_boolean, rounding_margin
from mu.cooccurrence import pairwise_union_sizes, required_sample_size
from mu.table import mu_table
from tensor.intersection import ANCHORED, FULL, build_tensor

logger = logging.getLogger(__name__)

MODES = (FULL, ANCHORED)


@dataclass(frozen=True)
class JennrichConfig:
    mode: str = FULL
    anchors: int = None
    round_tol: float = 0.25
    svd_cutoff: float = 1e-8
    gap_tol: float = 1e-6
    retries: int = 5
    clamp: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f'unknown mode {self.mode!r}; use full or anchored')
        if self.anchors is not None and self.anchors < 1:
            raise ParameterError('anchor count must be positive')
        if not 0 < self.round_tol < 0.5:
            raise ParameterError('rounding tolerance must lie in (0, 0.5)')
        if self.retries < 0:
            raise ParameterError('retries must be nonnegative')

    @classmethod
    def from_settings(cls, **overrides):
        values = {
            'round_tol': ssbmf_setting('ROUNDING_TOL'),
            'svd_cutoff': ssbmf_setting('SVD_CUTOFF'),
            'gap_tol': ssbmf_setting('EIGEN_GAP_TOL'),
            'retries': ssbmf_setting('JENNRICH_RETRIES'),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass
class RecoveredFactors:
    """Outcome of the average-case pipeline.

    ``W_hat`` is None when no candidate could be assembled; ``failure`` then
    names the stage that gave up.
    """
    W_hat: SelectionMatrix = None
    success: bool = False
    residual: int = None
    permutation: list = None
    failure: str = None
    diagnostics: dict = field(default_factory=dict)

    def to_report(self, timings=False):
        report = {
            'success': self.success,
            'residual': self.residual,
            'retries': self.diagnostics.get('retries'),
        }
        if timings:
            report['seconds'] = self.diagnostics.get('seconds')
        if self.permutation is not None:
            report['permutation'] = list(self.permutation)
        if self.failure:
            report['failure'] = self.failure
        return report


@dataclass(frozen=True)
class ColumnMatch:
    permutation: list = None
    unmatched: list = field(default_factory=list)

    @property
    def matched(self):
        return self.permutation is not None


def default_anchor_count(m, r):
    return min(m, max(4 * r, r + 16))


def select_anchors(m, n0, seed):
    """Sorted uniform subset of n0 row indices."""
    if n0 < 1:
        raise ParameterError('anchor count must be positive')
    if n0 >= m:
        return np.arange(m, dtype=np.int64)
    chosen = stream(seed, 'anchors').choice(m, size=n0, replace=False)
    return np.sort(chosen).astype(np.int64)


def extend_from_anchors(W_anchor, anchors, M, table, k):
    """Assemble all m rows from the recovered anchor rows.

    For each non-anchor row a the intersection sizes c_ab = 2k - t_ab against
    every anchor b satisfy W_anchor x = c with x the indicator of S_a; x is
    solved by least squares, rounded, and must have k ones and reproduce c.
    """
    W_anchor = np.asarray(W_anchor)
    anchors = np.asarray(anchors, dtype=np.int64)
    n0, r = W_anchor.shape
    if n0 != len(anchors):
        raise DimensionMismatchError(f'{n0} anchor rows but {len(anchors)} anchor indices')
    if n0 < r:
        raise ParameterError(f'need at least r={r} anchors, got {n0}')
    rank = np.linalg.matrix_rank(W_anchor.astype(float))
    if rank < r:
        raise RankDeficiencyError(rank, r, 'anchor block')

    table = table.extend(min(2 * k, r))
    full = np.zeros((M.m, r), dtype=np.uint8)
    full[anchors] = W_anchor
    rest = np.setdiff1d(np.arange(M.m), anchors)
    if rest.size:
        c = 2 * k - pairwise_union_sizes(M, table, rows=anchors, cols=rest)
        x, *_ = linalg.lstsq(W_anchor.astype(float), c.astype(float))
        rounded = (x > 0.5).astype(np.int64)
        ones = rounded.sum(axis=0)
        reproduced = W_anchor.astype(np.int64) @ rounded
        for column, a in enumerate(rest):
            if ones[column] != k:
                raise ExtensionError(a, f'rounded row has {ones[column]} ones, expected {k}')
            if not np.array_equal(reproduced[:, column], c[:, column]):
                raise ExtensionError(a, 'rounded row does not reproduce its anchor intersections')
        full[rest] = rounded.T
    logger.debug('extended %d anchor rows to %d rows', n0, M.m)
    return SelectionMatrix.from_dense(full)


def _assemble(columns, k):
    block = np.column_stack(columns).astype(np.uint8)
    ones = block.sum(axis=1)
    bad = np.flatnonzero(ones != k)
    if bad.size:
        raise ExtensionError(bad[0], f'recovered row has {ones[bad[0]]} ones, expected {k}')
    return block


def tensor_recover(M, r, k, config=None, seed=0):
    """Recover W from M = W W^T: bootstrap T, decompose, round, extend, verify.

    Stage failures (inconsistent tensor, rank deficiency, degenerate
    eigenvalues, rounding, extension) come back as a failed result; only
    invalid parameters raise.
    """
    config = JennrichConfig.from_settings() if config is None else config
    check_dimensions(M.m, r, k)
    started = time.perf_counter()
    diagnostics = {'mode': config.mode}
    result = RecoveredFactors(diagnostics=diagnostics)
    table = mu_table(r, k).extend(min(3 * k, r))
    try:
        if config.mode == ANCHORED:
            n0 = config.anchors or default_anchor_count(M.m, r)
            anchors = select_anchors(M.m, n0, seed)
            diagnostics['anchors'] = len(anchors)
            T = build_tensor(M, r, k, ANCHORED, anchors=anchors, clamp=config.clamp, table=table)
        else:
            T = build_tensor(M, r, k, FULL, clamp=config.clamp, table=table)
        if T.n < r:
            raise RankDeficiencyError(T.n, r, 'tensor')
        decomposition = jennrich_decompose(
            T, r, seed, svd_cutoff=config.svd_cutoff, gap_tol=config.gap_tol, retries=config.retries,
        )
        diagnostics['retries'] = decomposition.retries
        diagnostics['min_gap'] = decomposition.min_gap
        diagnostics['rounding_margin'] = max(rounding_margin(v) for v in decomposition.vectors)
        block = _assemble([round_boolean(v, config.round_tol) for v in decomposition.vectors], k)
        if config.mode == ANCHORED:
            W_hat = extend_from_anchors(block, T.index, M, table, k)
        else:
            W_hat = SelectionMatrix.from_dense(block)
    except RecoveryError as exc:
        logger.warning('recovery failed: %s', exc)
        result.failure = str(exc)
        diagnostics['seconds'] = time.perf_counter() - started
        return result

    result.W_hat = W_hat
    result.residual = factorization_error(M, W_hat, Arithmetic.BOOLEAN)
    result.success = result.residual == 0
    if not result.success:
        result.failure = f'verification failed with residual {result.residual}'
        logger.warning(result.failure)
    diagnostics['seconds'] = time.perf_counter() - started
    logger.info('tensor_recover m=%d r=%d k=%d success=%s', M.m, r, k, result.success)
    return result


def sample_size_hint(m, r, k, delta=0.1, constant=None):
    """Message for a failed run whose m is below the calibrated random-instance size, else None."""
    constant = ssbmf_setting('CALIBRATED_SAMPLE_SIZE_CONSTANT') if constant is None else constant
    needed = required_sample_size(r, k, min(3 * k, r), delta, constant)
    if m >= needed:
        return None
    return (
        f'm={m} is below the calibrated sample size {needed} for r={r}, k={k} '
        f'(constant {constant:g}, delta {delta:g}); random instances this small usually fail'
    )


def match_columns(W_hat, W_ref):
    """Match each recovered column to an identical reference column.

    ``permutation[j]`` is the reference column equal to column j of W_hat.
    """
    hat = W_hat.dense() if isinstance(W_hat, SelectionMatrix) else np.asarray(W_hat)
    ref = W_ref.dense() if isinstance(W_ref, SelectionMatrix) else np.asarray(W_ref)
    if hat.shape != ref.shape:
        raise DimensionMismatchError(f'shapes differ: {hat.shape} vs {ref.shape}')
    available = defaultdict(list)
    for j, column in enumerate(ref.T):
        available[column.tobytes()].append(j)
    permutation, missing = [], []
    for j, column in enumerate(hat.T):
        candidates = available.get(column.tobytes())
        if candidates:
            permutation.append(candidates.pop(0))
        else:
            permutation.append(None)
            missing.append(j)
    if not missing:
        return ColumnMatch(permutation=permutation)
    leftover = sorted(j for indices in available.values() for j in indices)
    return ColumnMatch(unmatched=list(zip(missing, leftover)))


def recover_with_reference(M, W_ref, r, k, config=None, seed=0):
    """tensor_recover followed by match_columns against a known W."""
    result = tensor_recover(M, r, k, config, seed)
    if result.success:
        match = match_columns(result.W_hat, W_ref)
        result.permutation = match.permutation
        result.diagnostics['unmatched'] = match.unmatched
    return result
