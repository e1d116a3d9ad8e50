"""Private datasets, the synthetic datasets mixed from them, and the similarity oracle."""
import logging
from dataclasses import dataclass

import numpy as np

from core.exceptions import DimensionMismatchError, ParameterError
from core.random import stream
from instance.gram import Arithmetic, gram
from instance.selection import SelectionMatrix, gen_selection_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Dataset:
    """r x d private matrix; row i is the vector x_i.

    ``residual`` is set when the matrix came out of a least-squares solve.
    """
    X: np.ndarray
    residual: float = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ParameterError('dataset must be a 2-D array')
        if not np.isfinite(X).all():
            raise ParameterError('dataset entries must be finite')
        object.__setattr__(self, 'X', X)

    @property
    def r(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    """m x d mixtures Z = |W X|.

    ``W`` and the signed mixtures ``Y`` stay with the simulator; ``public()``
    strips both before handing the data to an attacker.
    """
    Z: np.ndarray
    W: SelectionMatrix = None
    Y: np.ndarray = None

    def __post_init__(self):
        Z = np.asarray(self.Z, dtype=float)
        if Z.ndim == 1:
            Z = Z[:, None]
        if Z.ndim != 2:
            raise ParameterError('synthetic dataset must be a 2-D array')
        if (Z < 0).any():
            raise ParameterError('synthetic entries are absolute values and must be nonnegative')
        object.__setattr__(self, 'Z', Z)
        if self.W is not None and self.W.m != Z.shape[0]:
            raise DimensionMismatchError(f'W has {self.W.m} rows but Z has {Z.shape[0]}')
        if self.Y is not None:
            Y = np.asarray(self.Y, dtype=float).reshape(Z.shape)
            if not np.array_equal(np.abs(Y), Z):
                raise ParameterError('Z must equal |Y| entrywise')
            object.__setattr__(self, 'Y', Y)

    @property
    def m(self):
        return self.Z.shape[0]

    @property
    def d(self):
        return self.Z.shape[1]

    def public(self):
        return SyntheticDataset(self.Z)


def gen_instahide(X, m, k, seed, arithmetic=Arithmetic.BOOLEAN):
    """Mix a private dataset into m synthetic rows and simulate the oracle.

    Row i of Z is |sum_{j in S_i} x_j| with S_i a uniform k-subset. The
    returned Gram matrix is the similarity matrix (1 iff S_a and S_b
    intersect), or the overlap sizes with integer arithmetic.
    """
    X = X if isinstance(X, Dataset) else Dataset(X)
    if not 2 <= k <= X.r:
        raise ParameterError(f'need 2 <= k <= r={X.r}, got k={k}')
    W = gen_selection_matrix(m, X.r, k, seed)
    Y = W.dense().astype(float) @ X.X
    logger.debug('mixed %d synthetic rows from r=%d, d=%d', m, X.r, X.d)
    return SyntheticDataset(np.abs(Y), W=W, Y=Y), gram(W, arithmetic)


def planted_dataset(r, d, k, heavy_per_column=1, heavy_factor=10.0, seed=0):
    """Gaussian noise with planted heavy entries.

    Each column gets ``heavy_per_column`` entries of magnitude h with
    h = heavy_factor * (k / r) * sum_i |X_ij|, the sum including the planted
    entries themselves. Returns the dataset and the planted-entry mask.
    """
    if not 1 <= heavy_per_column <= r:
        raise ParameterError(f'need 1 <= heavy_per_column <= r, got {heavy_per_column}')
    ratio = heavy_factor * k / r
    if ratio * heavy_per_column >= 1:
        raise ParameterError('heavy_factor * k * heavy_per_column must be below r')
    rng = stream(seed, 'planted')
    X = rng.standard_normal((r, d))
    mask = np.zeros((r, d), dtype=bool)
    for j in range(d):
        rows = rng.choice(r, size=heavy_per_column, replace=False)
        noise = np.abs(np.delete(X[:, j], rows)).sum()
        magnitude = ratio * noise / (1 - ratio * heavy_per_column)
        X[rows, j] = magnitude * rng.choice((-1.0, 1.0), size=heavy_per_column)
        mask[rows, j] = True
    return Dataset(X), mask


def heaviness_mask(X, k, c_heavy, signed=False):
    """Entries with |X_ij| >= c_heavy * (k / r) * (sum_i |X_ij|).

    With ``signed`` the column mass is |sum_i X_ij| instead.
    """
    X = X.X if isinstance(X, Dataset) else np.asarray(X, dtype=float)
    r = X.shape[0]
    mass = np.abs(X.sum(axis=0)) if signed else np.abs(X).sum(axis=0)
    return (np.abs(X) >= c_heavy * k / r * mass) & (X != 0)
