"""Exception hierarchy shared by every app.

ParameterError and its subclasses map to CLI exit code 2, RecoveryError and
its subclasses to exit code 3.
"""


class SsbmfError(Exception):
    """Base class for all library errors"""


class ParameterError(SsbmfError, ValueError):
    """Invalid parameters or malformed input"""


class DimensionMismatchError(ParameterError):
    pass


class AlphabetError(ParameterError):
    """Letter rank outside the k-sparse alphabet"""


class BudgetExceededError(ParameterError):
    """Exhaustive search would exceed the configured enumeration budget"""

    def __init__(self, size, budget):
        self.size = size
        self.budget = budget
        super().__init__(f'search space {size} exceeds budget {budget}')


class RecoveryError(SsbmfError):
    """A recovery stage could not produce a consistent answer"""


class TensorInconsistencyError(RecoveryError):
    def __init__(self, index, value, k):
        self.index = tuple(int(i) for i in index)
        self.value = int(value)
        self.k = k
        super().__init__(
            f'tensor entry {self.index} = {self.value} outside [0, {k}]; '
            'sample size too small for reliable inversion'
        )


class RankDeficiencyError(RecoveryError):
    def __init__(self, rank, required, what='contraction'):
        self.rank = int(rank)
        self.required = int(required)
        super().__init__(f'{what} has numerical rank {self.rank} < {self.required}')


class DegeneracyError(RecoveryError):
    def __init__(self, attempts, gap):
        self.attempts = attempts
        self.gap = gap
        super().__init__(f'eigenvalue gap {gap:.3e} below tolerance after {attempts} attempts')


class RoundingError(RecoveryError):
    def __init__(self, index, margin):
        self.index = int(index)
        self.margin = float(margin)
        super().__init__(f'entry {self.index} is {self.margin:.3g} away from {{0, 1}}')


class ExtensionError(RecoveryError):
    def __init__(self, row, reason):
        self.row = int(row)
        self.reason = reason
        super().__init__(f'row {self.row}: {reason}')
