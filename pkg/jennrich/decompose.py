"""Jennrich's simultaneous-diagonalization decomposition of T = sum_i w_i^(x3)."""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from core.conf import ssbmf_setting
from core.exceptions import DegeneracyError, ParameterError, RankDeficiencyError, RoundingError
from core.random import stream
from tensor.intersection import contract

logger = logging.getLogger(__name__)


@dataclass
class Decomposition:
    vectors: list
    eigenvalues: np.ndarray
    retries: int
    min_gap: float
    probes: tuple = field(default=(), repr=False)


def pinv(matrix, cutoff):
    """Pseudo-inverse dropping singular values below cutoff * sigma_max."""
    u, s, vt = linalg.svd(matrix, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros_like(matrix.T)
    keep = s > cutoff * s[0]
    return (vt[keep].T / s[keep]) @ u[:, keep].T


def numerical_rank(singular_values, cutoff):
    if singular_values.size == 0 or singular_values[0] == 0:
        return 0
    return int((singular_values > cutoff * singular_values[0]).sum())


def _unit_vector(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _min_gap(values):
    if len(values) < 2:
        return np.inf
    diffs = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(diffs, np.inf)
    return float(diffs.min())


def jennrich_decompose(T, r, seed=0, svd_cutoff=None, gap_tol=None, retries=None):
    """Components w_1..w_r of T, up to order and scale.

    Both random contractions are projected onto an orthonormal basis U of the
    column space of T(I, I, v1); the r x r eigenproblem of
    (U'M1U)(U'M2U)^+ then has the columns of U'W as eigenvectors, which are
    lifted back through U.
    """
    svd_cutoff = ssbmf_setting('SVD_CUTOFF') if svd_cutoff is None else svd_cutoff
    gap_tol = ssbmf_setting('EIGEN_GAP_TOL') if gap_tol is None else gap_tol
    retries = ssbmf_setting('JENNRICH_RETRIES') if retries is None else retries
    if not 1 <= r <= T.n:
        raise ParameterError(f'need 1 <= r <= {T.n}, got r={r}')

    rng = stream(seed, 'jennrich')
    smallest_gap = 0.0
    for attempt in range(retries + 1):
        v1, v2 = _unit_vector(rng, T.n), _unit_vector(rng, T.n)
        M1, M2 = contract(T, v1), contract(T, v2)
        u, s, _ = linalg.svd(M1)
        rank = numerical_rank(s, svd_cutoff)
        if rank < r:
            raise RankDeficiencyError(rank, r)
        basis = u[:, :r]
        A1 = basis.T @ M1 @ basis
        A2 = basis.T @ M2 @ basis
        eigenvalues, eigenvectors = linalg.eig(A1 @ pinv(A2, svd_cutoff))
        scale = float(np.abs(eigenvalues).max())
        smallest_gap = _min_gap(eigenvalues)
        complex_part = float(np.abs(eigenvalues.imag).max())
        if scale == 0 or smallest_gap < gap_tol * scale or complex_part > gap_tol * scale:
            logger.info('eigenvalue gap %.3e too small on attempt %d, redrawing', smallest_gap, attempt)
            continue
        order = np.argsort(eigenvalues.real)
        lifted = basis @ eigenvectors[:, order].real
        return Decomposition(
            vectors=[lifted[:, i] for i in range(r)],
            eigenvalues=eigenvalues.real[order],
            retries=attempt,
            min_gap=smallest_gap / scale,
            probes=(v1, v2),
        )
    raise DegeneracyError(retries + 1, smallest_gap)


def round_boolean(v, tol=None):
    """Scale v by its largest-magnitude entry (sign included) and round to 0/1.

    Every scaled entry must lie within tol of 0 or 1.
    """
    tol = ssbmf_setting('ROUNDING_TOL') if tol is None else tol
    v = np.asarray(v, dtype=float)
    pivot = v[np.argmax(np.abs(v))] if v.size else 0.0
    if pivot == 0:
        raise ParameterError('cannot round the zero vector')
    scaled = v / pivot
    to_zero = np.abs(scaled)
    to_one = np.abs(scaled - 1)
    margin = np.minimum(to_zero, to_one)
    bad = np.flatnonzero(margin > tol)
    if bad.size:
        raise RoundingError(bad[0], margin[bad[0]])
    return (to_one < to_zero).astype(np.uint8)


def rounding_margin(v):
    """Largest distance of the scaled entries from {0, 1}."""
    v = np.asarray(v, dtype=float)
    scaled = v / v[np.argmax(np.abs(v))]
    return float(np.minimum(np.abs(scaled), np.abs(scaled - 1)).max())
