import itertools
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from core.bits import pack_rows
from core.exceptions import ParameterError
from core.random import check_seed, floyd_subset, row_stream, stream

logger = logging.getLogger(__name__)


def check_dimensions(m, r, k):
    """Validate (m, r, k) for an m x r matrix with exactly k ones per row."""
    if m < 1 or r < 1 or k < 1:
        raise ParameterError(f'dimensions must be positive, got m={m}, r={r}, k={k}')
    if k > r:
        raise ParameterError(f'sparsity k={k} exceeds column count r={r}')


@dataclass(frozen=True, eq=False)
class SelectionMatrix:
    """m x r Boolean matrix whose rows have exactly k ones.

    Row i is stored as the sorted support S_i; read the same matrix as the
    incidence matrix of a k-uniform hypergraph on [r] with m hyperedges.
    """
    m: int
    r: int
    k: int
    rows: tuple
    seed: int = None

    def __post_init__(self):
        check_dimensions(self.m, self.r, self.k)
        if len(self.rows) != self.m:
            raise ParameterError(f'expected {self.m} rows, got {len(self.rows)}')
        normalized = []
        for index, row in enumerate(self.rows):
            support = tuple(sorted(int(j) for j in row))
            if len(support) != self.k or len(set(support)) != self.k:
                raise ParameterError(f'row {index} must have exactly {self.k} distinct columns, got {list(row)}')
            if support[0] < 0 or support[-1] >= self.r:
                raise ParameterError(f'row {index} has a column outside [0, {self.r})')
            normalized.append(support)
        object.__setattr__(self, 'rows', tuple(normalized))

    def __eq__(self, other):
        if not isinstance(other, SelectionMatrix):
            return NotImplemented
        return (self.m, self.r, self.k, self.rows) == (other.m, other.r, other.k, other.rows)

    def __hash__(self):
        return hash((self.m, self.r, self.k, self.rows))

    @classmethod
    def from_dense(cls, dense, seed=None):
        dense = np.asarray(dense)
        if dense.ndim != 2 or dense.size == 0:
            raise ParameterError('selection matrix must be a non-empty 2-D array')
        if not np.isin(dense, (0, 1)).all():
            raise ParameterError('selection matrix entries must be 0 or 1')
        rows = tuple(tuple(np.flatnonzero(row)) for row in dense)
        k = len(rows[0])
        return cls(m=dense.shape[0], r=dense.shape[1], k=k, rows=rows, seed=seed)

    @cached_property
    def masks(self):
        """Row supports as bit-packed r-bit masks, shape (m, ceil(r/64))."""
        return pack_rows(self.dense())

    def dense(self):
        out = np.zeros((self.m, self.r), dtype=np.uint8)
        for index, support in enumerate(self.rows):
            out[index, list(support)] = 1
        return out

    def columns(self):
        """Columns as a list of 0/1 m-vectors."""
        return list(self.dense().T)

    def permute_columns(self, permutation):
        """Matrix whose column permutation[j] is this matrix's column j."""
        permutation = [int(p) for p in permutation]
        if sorted(permutation) != list(range(self.r)):
            raise ParameterError('not a permutation of the columns')
        rows = tuple(tuple(permutation[j] for j in support) for support in self.rows)
        return SelectionMatrix(self.m, self.r, self.k, rows, self.seed)

    def vertex_degrees(self):
        """Number of hyperedges containing each vertex (column sums)."""
        return self.dense().sum(axis=0).astype(np.int64)

    def line_graph_edges(self):
        """Edges (a, b), a < b, of the line graph: hyperedges sharing a vertex."""
        edges = []
        by_vertex = [[] for _ in range(self.r)]
        for index, support in enumerate(self.rows):
            for j in support:
                by_vertex[j].append(index)
        seen = set()
        for members in by_vertex:
            for a, b in itertools.combinations(members, 2):
                seen.add((a, b))
        edges.extend(sorted(seen))
        return edges


def gen_selection_matrix(m, r, k, seed):
    """Rows drawn independently and uniformly from the C(r, k) supports.

    Row i uses its own Philox stream keyed by (seed, i), so rows can be
    generated in any order or in parallel with identical results.
    """
    check_dimensions(m, r, k)
    seed = check_seed(seed)
    rows = tuple(floyd_subset(row_stream(seed, i), r, k) for i in range(m))
    logger.debug('generated selection matrix m=%d r=%d k=%d seed=%d', m, r, k, seed)
    return SelectionMatrix(m=m, r=r, k=k, rows=rows, seed=seed)


def population_instance(r, k, repeats=1, seed=None):
    """Every k-subset of [r] exactly `repeats` times, optionally shuffled.

    Zero co-occurrence fractions on this instance equal the non-intersection
    probabilities exactly, which makes it a deterministic oracle for the
    average-case pipeline.
    """
    check_dimensions(1, r, k)
    if repeats < 1:
        raise ParameterError('repeats must be positive')
    rows = [support for support in itertools.combinations(range(r), k)] * repeats
    if seed is not None:
        order = stream(seed, 'population').permutation(len(rows))
        rows = [rows[i] for i in order]
    return SelectionMatrix(m=len(rows), r=r, k=k, rows=tuple(rows), seed=seed)
