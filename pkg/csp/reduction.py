"""Reductions from sparse Boolean matrix factorization to Max 2-CSP."""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from core.bits import popcount
from core.exceptions import DimensionMismatchError, ParameterError
from csp.alphabet import alphabet_size, check_letters, letter_masks, rank_letter, unrank_letter
from instance.gram import Arithmetic, GramMatrix
from instance.selection import SelectionMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CspInstance:
    """Max 2-CSP over the alphabet of k-subsets of [r].

    Symmetric instances live on the complete graph over m vertices with an
    edge u < v for every off-diagonal entry. Bipartite instances put the rows
    of U on vertices 0..m_left-1 and the columns of V after them, with an edge
    for every entry. An edge is satisfied when <s(u), s(v)> equals its target
    (integer mode) or 1{<s(u), s(v)> > 0} does (boolean mode).
    """
    r: int
    k: int
    targets: np.ndarray
    mode: Arithmetic = Arithmetic.INTEGER
    bipartite: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'mode', Arithmetic.parse(self.mode))
        targets = np.asarray(self.targets, dtype=np.int64)
        if targets.ndim != 2:
            raise DimensionMismatchError('targets must be a matrix')
        if not self.bipartite and targets.shape[0] != targets.shape[1]:
            raise DimensionMismatchError('symmetric instances need a square target matrix')
        top = 1 if self.mode is Arithmetic.BOOLEAN else self.k
        if targets.size and (targets.min() < 0 or targets.max() > top):
            raise ParameterError(f'targets must lie in 0..{top} for {self.mode.value} mode')
        targets.flags.writeable = False
        object.__setattr__(self, 'targets', targets)

    @property
    def m(self):
        return self.targets.shape[0]

    @property
    def m_right(self):
        return self.targets.shape[1] if self.bipartite else 0

    @property
    def n(self):
        return self.m + self.m_right

    @property
    def alphabet_size(self):
        return alphabet_size(self.r, self.k)

    @property
    def edge_count(self):
        if self.bipartite:
            return self.m * self.m_right
        return self.m * (self.m - 1) // 2

    @property
    def density(self):
        """Nominal density: 1 for the complete graph, 1/2 for the complete bipartite graph."""
        return 0.5 if self.bipartite else 1.0

    @cached_property
    def letters(self):
        return letter_masks(self.r, self.k)

    def target(self, u, v):
        if self.bipartite:
            return int(self.targets[u, v - self.m])
        return int(self.targets[u, v])

    def edges(self):
        if self.bipartite:
            return [(u, self.m + v) for u in range(self.m) for v in range(self.m_right)]
        return [(u, v) for u in range(self.m) for v in range(u + 1, self.m)]

    def neighbours(self, u):
        """Vertices adjacent to u and the targets on those edges."""
        if not self.bipartite:
            others = np.delete(np.arange(self.m), u)
            return others, self.targets[u, others]
        if u < self.m:
            return np.arange(self.m, self.n), self.targets[u]
        return np.arange(self.m), self.targets[:, u - self.m]

    def earlier_neighbours(self, u):
        """Neighbours w < u; every edge appears under exactly one endpoint."""
        if not self.bipartite:
            return np.arange(u), self.targets[:u, u]
        if u < self.m:
            return np.arange(0), np.zeros(0, dtype=np.int64)
        return np.arange(self.m), self.targets[:, u - self.m]

    def outcome(self, overlaps):
        return overlaps > 0 if self.mode is Arithmetic.BOOLEAN else overlaps

    def to_json(self):
        payload = {'m': self.m, 'r': self.r, 'k': self.k, 'mode': self.mode.value}
        if self.bipartite:
            payload['m_right'] = self.m_right
            payload['targets'] = self.targets.tolist()
        else:
            upper = np.triu_indices(self.m, 1)
            payload['targets'] = self.targets[upper].tolist()
        return payload


@dataclass(frozen=True)
class Assignment:
    sigma: tuple
    value: int
    start_value: int = None
    restart: int = None

    def supports(self, r, k):
        return [unrank_letter(letter, r, k) for letter in self.sigma]


@dataclass(frozen=True)
class FactorResult:
    """Factors read off an assignment and their reconstruction error.

    ``off_diagonal`` and ``with_diagonal`` are the L0 errors without and with
    the forced diagonal (both equal for bipartite instances).
    """
    W: SelectionMatrix = None
    U: SelectionMatrix = None
    V: SelectionMatrix = None
    value: int = 0
    edges: int = 0
    off_diagonal: int = 0
    with_diagonal: int = 0


def _symmetric_targets(M, mode):
    if isinstance(M, GramMatrix):
        if mode is Arithmetic.INTEGER:
            if M.counts is None:
                raise ParameterError('integer mode needs a Gram matrix with integer entries')
            return M.counts
        return M.dense()
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError('Gram matrix must be square')
    return M


def reduce_symmetric(M, r, k, mode=Arithmetic.INTEGER):
    """Complete-graph instance whose satisfied edges are entries W W^T matches."""
    mode = Arithmetic.parse(mode)
    targets = np.asarray(_symmetric_targets(M, mode), dtype=np.int64)
    if not np.array_equal(targets, targets.T):
        raise ParameterError('symmetric reduction needs a symmetric matrix')
    instance = CspInstance(r=r, k=k, targets=targets, mode=mode)
    logger.debug('symmetric instance: %d vertices, %d edges, alphabet %d', instance.n, instance.edge_count, instance.alphabet_size)
    return instance


def reduce_asymmetric(M, r, k, mode=Arithmetic.INTEGER):
    """Complete bipartite instance: rows of U on the left, columns of V on the right."""
    mode = Arithmetic.parse(mode)
    if isinstance(M, GramMatrix):
        M = M.counts if mode is Arithmetic.INTEGER and M.counts is not None else M.dense()
    targets = np.asarray(M, dtype=np.int64)
    instance = CspInstance(r=r, k=k, targets=targets, mode=mode, bipartite=True)
    logger.debug('bipartite instance: %d + %d vertices, %d edges', instance.m, instance.m_right, instance.edge_count)
    return instance


def _sigma(inst, sigma):
    values = sigma.sigma if isinstance(sigma, Assignment) else sigma
    values = check_letters(values, inst.r, inst.k)
    if values.shape != (inst.n,):
        raise DimensionMismatchError(f'assignment covers {values.size} vertices, instance has {inst.n}')
    return values


def _overlaps(inst, left, right):
    masks = inst.letters
    return popcount(np.bitwise_and(masks[left][:, None], masks[right][None, :])).astype(np.int64)


def evaluate(inst, sigma):
    """Number of satisfied edges."""
    sigma = _sigma(inst, sigma)
    if inst.bipartite:
        outcome = inst.outcome(_overlaps(inst, sigma[:inst.m], sigma[inst.m:]))
        return int((outcome == inst.targets).sum())
    outcome = inst.outcome(_overlaps(inst, sigma, sigma))
    satisfied = np.triu(outcome == inst.targets, 1)
    return int(satisfied.sum())


def additive_gap(inst, value):
    """epsilon with value = |E| - epsilon |E|."""
    if inst.edge_count == 0:
        return 0.0
    return (inst.edge_count - value) / inst.edge_count


def assignment_to_factors(inst, sigma):
    """Factors read off the letters, with their L0 reconstruction error.

    Symmetric: off-diagonal error = 2 (|E| - value). Bipartite: error = |E| - value.
    """
    sigma = _sigma(inst, sigma)
    value = evaluate(inst, sigma)
    supports = [unrank_letter(letter, inst.r, inst.k) for letter in sigma]
    if inst.bipartite:
        U = SelectionMatrix(inst.m, inst.r, inst.k, tuple(supports[:inst.m]))
        V = SelectionMatrix(inst.m_right, inst.r, inst.k, tuple(supports[inst.m:]))
        product = inst.outcome(U.dense().astype(np.int64) @ V.dense().T.astype(np.int64))
        error = int((product != inst.targets).sum())
        return FactorResult(U=U, V=V, value=value, edges=inst.edge_count, off_diagonal=error, with_diagonal=error)
    if inst.m == 0:
        return FactorResult(value=0)
    W = SelectionMatrix(inst.m, inst.r, inst.k, tuple(supports))
    dense = W.dense().astype(np.int64)
    differ = inst.outcome(dense @ dense.T) != inst.targets
    with_diagonal = int(differ.sum())
    off_diagonal = with_diagonal - int(np.trace(differ))
    return FactorResult(
        W=W, value=value, edges=inst.edge_count, off_diagonal=off_diagonal, with_diagonal=with_diagonal,
    )


def planted_assignment(inst, W):
    """The assignment s(u) = row u of W (rows of U then columns of V when bipartite)."""
    if inst.bipartite:
        U, V = W
        rows = list(U.rows) + list(V.rows)
    else:
        rows = list(W.rows)
    sigma = tuple(rank_letter(row) for row in rows)
    return Assignment(sigma=sigma, value=evaluate(inst, sigma))
