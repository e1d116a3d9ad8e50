import logging
from dataclasses import dataclass

import numpy as np

from core.bits import popcount
from core.conf import ssbmf_setting
from core.exceptions import BudgetExceededError, ParameterError
from core.random import stream
from csp.reduction import Assignment, evaluate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalSearchConfig:
    restarts: int = 20
    iters: int = 200
    block: int = 1 << 16

    def __post_init__(self):
        if self.restarts < 1 or self.iters < 0 or self.block < 1:
            raise ParameterError('need restarts >= 1, iters >= 0 and a positive block size')

    @classmethod
    def from_settings(cls, **overrides):
        values = {'restarts': ssbmf_setting('LOCAL_RESTARTS'), 'iters': ssbmf_setting('LOCAL_ITERS')}
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


def _satisfied(inst, letters, partners, targets):
    """satisfied[c] = number of (partner, target) pairs letter c satisfies."""
    masks = inst.letters
    overlaps = popcount(np.bitwise_and(masks[letters][:, None], masks[partners][None, :])).astype(np.int64)
    return (inst.outcome(overlaps) == targets[None, :]).sum(axis=1)


def solve_exact(inst, budget=None):
    """Optimal assignment by depth-first branch and bound over all q^n assignments.

    Vertices are assigned in order; the bound adds every edge not yet closed.
    Letters are tried by decreasing gain, ties by lowest rank.
    """
    budget = ssbmf_setting('CSP_EXACT_BUDGET') if budget is None else budget
    q, n = inst.alphabet_size, inst.n
    if n and q ** n > budget:
        raise BudgetExceededError(q ** n, budget)
    if n == 0:
        return Assignment(sigma=(), value=0)

    all_letters = np.arange(q)
    earlier = [inst.earlier_neighbours(u) for u in range(n)]
    closing = [len(partners) for partners, _ in earlier]
    open_after = [sum(closing[u + 1:]) for u in range(n)]
    sigma = np.zeros(n, dtype=np.int64)
    best = {'value': -1, 'sigma': None, 'nodes': 0}

    def search(u, value):
        if u == n:
            if value > best['value']:
                best['value'], best['sigma'] = value, sigma.copy()
            return
        best['nodes'] += 1
        partners, targets = earlier[u]
        if len(partners):
            gain = _satisfied(inst, all_letters, sigma[partners], targets)
        else:
            gain = np.zeros(q, dtype=np.int64)
        for letter in np.argsort(-gain, kind='stable'):
            if value + gain[letter] + open_after[u] <= best['value']:
                break
            sigma[u] = letter
            search(u + 1, value + int(gain[letter]))
            if best['value'] == inst.edge_count:
                return

    search(0, 0)
    logger.debug('exact search visited %d nodes, optimum %d of %d', best['nodes'], best['value'], inst.edge_count)
    return Assignment(sigma=tuple(int(c) for c in best['sigma']), value=best['value'])


def vertex_scores(inst, sigma, u, block=1 << 16):
    """Satisfied edges at u for every possible letter of u, others fixed."""
    partners, targets = inst.neighbours(u)
    scores = np.zeros(inst.alphabet_size, dtype=np.int64)
    if not len(partners):
        return scores
    for start in range(0, inst.alphabet_size, block):
        letters = np.arange(start, min(start + block, inst.alphabet_size))
        scores[start:start + len(letters)] = _satisfied(inst, letters, sigma[partners], targets)
    return scores


def _climb(inst, sigma, value, iters, block):
    for _ in range(iters):
        best_move, best_gain = None, 0
        for u in range(inst.n):
            scores = vertex_scores(inst, sigma, u, block)
            letter = int(np.argmax(scores))
            gain = int(scores[letter] - scores[sigma[u]])
            if gain > best_gain:
                best_move, best_gain = (u, letter), gain
        if best_move is None:
            break
        sigma[best_move[0]] = best_move[1]
        value += best_gain
    return sigma, value


def solve_local(inst, restarts=None, iters=None, seed=0, config=None):
    """Random restarts, each followed by best-improvement single-vertex moves.

    Each restart starts from a uniform random assignment drawn from its own
    stream and stops at a local optimum or after ``iters`` moves. The best
    restart wins, ties going to the earliest.
    """
    config = config or LocalSearchConfig.from_settings(restarts=restarts, iters=iters)
    best = None
    for restart in range(config.restarts):
        rng = stream(seed, 'csp-restart', restart)
        sigma = rng.integers(0, inst.alphabet_size, size=inst.n, dtype=np.int64)
        start_value = evaluate(inst, sigma)
        sigma, value = _climb(inst, sigma, start_value, config.iters, config.block)
        if best is None or value > best.value:
            best = Assignment(
                sigma=tuple(int(c) for c in sigma), value=value, start_value=start_value, restart=restart,
            )
        if value == inst.edge_count:
            break
    logger.debug('local search best value %d of %d (restart %d)', best.value, inst.edge_count, best.restart)
    return best
