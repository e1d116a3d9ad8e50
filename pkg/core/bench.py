"""Acceptance experiments run by ``manage.py bench``.

Each criterion is a function ``(seed, quick, constant) -> (passed, detail)``;
``quick`` shrinks trial counts and seeds for smoke runs.
"""
import itertools
import logging
import math

import numpy as np

from core.conf import ssbmf_setting
from core.exceptions import RecoveryError
from core.random import stream
from core.serializers import dumps, gram_to_dict, selection_to_dict
from csp.reduction import assignment_to_factors, evaluate, reduce_symmetric
from csp.solvers import solve_exact as solve_csp, solve_local
from instance.gram import Arithmetic, gram
from instance.selection import gen_selection_matrix, population_instance
from jennrich.pipeline import JennrichConfig, recover_with_reference, tensor_recover
from mu.cooccurrence import required_sample_size
from mu.table import gap_report
from probes.experiments import anticoncentration_estimate, planted_fibre_vector, singularity_experiment, trial_seed
from probes.krawtchouk import f2_zero_probability, krawtchouk_bound_check
from probes.rank import rank_f2, rank_report
from recover.heavy import (
    expected_square_inner, get_heavy_coordinates, recover_dataset, relative_errors, solve_exact, standard_error_bound,
)
from recover.instahide import gen_instahide, planted_dataset
from tensor.intersection import LAZY, build_tensor, oracle_tensor

logger = logging.getLogger(__name__)

CRITERIA = {}


def criterion(number, name):
    def register(func):
        CRITERIA[number] = (name, func)
        return func
    return register


def _seeds(seed, label, count):
    return [trial_seed(seed, label, i) for i in range(count)]


@criterion(1, 'tensor exactness')
def tensor_exactness(seed, quick, constant):
    r, k = 12, 2
    m = required_sample_size(r, k, 3 * k, 0.1, constant)
    triples = 1_000 if quick else 10_000
    clean = 0
    seeds = _seeds(seed, 'tensor-exactness', 2 if quick else 5)
    for s in seeds:
        W = gen_selection_matrix(m, r, k, s)
        T = build_tensor(gram(W), r, k, LAZY)
        truth = oracle_tensor(W, lazy=True)
        picks = stream(s, 'triples').integers(0, m, size=(triples, 3))
        mismatches = 0
        for a, b, c in picks:
            try:
                mismatches += T.entry(a, b, c) != truth.entry(a, b, c)
            except RecoveryError:
                mismatches += 1
        clean += mismatches == 0
    needed = len(seeds) if quick else 4
    return clean >= needed, f'm={m}: {clean}/{len(seeds)} seeds without mismatches'


@criterion(2, 'end-to-end recovery')
def end_to_end(seed, quick, constant):
    r, k = 16, 3
    m = required_sample_size(r, k, 3 * k, 0.1, constant)
    config = JennrichConfig.from_settings(mode='anchored', anchors=64)
    seeds = _seeds(seed, 'end-to-end', 2 if quick else 10)
    matched = 0
    for s in seeds:
        W = gen_selection_matrix(m, r, k, s)
        result = recover_with_reference(gram(W), W, r, k, config, s)
        matched += result.success and result.permutation is not None
    needed = len(seeds) if quick else 9
    return matched >= needed, f'm={m}: {matched}/{len(seeds)} seeds matched'


@criterion(3, 'mu gap')
def mu_gap(seed, quick, constant):
    failing = [k for k in range(1, 7) if not gap_report(64 * k * k, k).ok]
    return not failing, f'failing k: {failing}' if failing else 'all k <= 6 hold at r = 64k^2'


def _parity_by_enumeration(r, k, lam):
    u = set(range(lam))
    even = sum(1 for support in itertools.combinations(range(r), k) if len(u.intersection(support)) % 2 == 0)
    return even, math.comb(r, k)


@criterion(4, 'krawtchouk identity')
def krawtchouk_identity(seed, quick, constant):
    failures = []
    for r in range(1, 9 if quick else 13):
        for k in range(r + 1):
            for lam in range(r + 1):
                even, total = _parity_by_enumeration(r, k, lam)
                if f2_zero_probability(r, k, lam) * total != even:
                    failures.append((r, k, lam))
    return not failures, f'{len(failures)} mismatches'


@criterion(5, 'krawtchouk bound')
def krawtchouk_bound(seed, quick, constant):
    violations = []
    for r in range(1, 65):
        for k in range(1, 16 * r // 100 + 1):
            report = krawtchouk_bound_check(r, k)
            if not report.ok:
                violations.append((r, k) + report.violation[:1])
    return not violations, f'{len(violations)} violations'


@criterion(6, 'even-k forced kernel')
def even_kernel(seed, quick, constant):
    trials = 10 if quick else 100
    deficient = 0
    total = 0
    for m, r, k in ((80, 20, 2), (120, 30, 4)):
        for s in _seeds(seed, f'kernel-{k}', trials):
            deficient += rank_f2(gen_selection_matrix(m, r, k, s)) <= r - 1
            total += 1
    return deficient == total, f'{deficient}/{total} rank-deficient over F2'


@criterion(7, 'odd-k independence')
def odd_independence(seed, quick, constant):
    trials = 20 if quick else 200
    (odd,) = singularity_experiment(160, 40, 3, trials, seed, notions=('real',))
    small_trials = 1_000 if quick else 10_000
    (small,) = singularity_experiment(4, 4, 1, small_trials, seed, notions=('real',))
    p = 24 / 256
    sigma = math.sqrt(p * (1 - p) / small_trials)
    passed = odd.frequency >= 0.95 and abs(small.frequency - p) <= 3 * sigma
    return passed, f'k=3 full rank {odd.frequency:.3f}; k=1 frequency {small.frequency:.4f} vs {p}'


@criterion(8, 'expected square inner product')
def expected_square(seed, quick, constant):
    rng = stream(seed, 'esp')
    worst = 0.0
    for r in range(2, 9):
        for k in range(1, r + 1):
            supports = [list(support) for support in itertools.combinations(range(r), k)]
            for p in rng.standard_normal((10, r)):
                values = [p[support].sum() ** 2 for support in supports]
                worst = max(worst, abs(np.mean(values) - expected_square_inner(p, r, k)))
    samples = 10_000 if quick else 100_000
    vectors = 5 if quick else 20
    agreed = total = 0
    for r, k in ((10, 2), (50, 4)):
        for p in rng.standard_normal((vectors, r)):
            keys = rng.random((samples, r))
            supports = np.argpartition(keys, k - 1, axis=1)[:, :k]
            draws = p[supports].sum(axis=1) ** 2
            agreed += bool(standard_error_bound(draws, expected_square_inner(p, r, k)))
            total += 1
    passed = worst <= 1e-12 and agreed == total
    return passed, f'exhaustive error {worst:.2e}; Monte-Carlo agrees for {agreed}/{total} vectors'


@criterion(9, 'heavy-coordinate recovery')
def heavy_recovery(seed, quick, constant):
    r, k, d, m = 50, 4, 20, 6000
    seeds = _seeds(seed, 'heavy', 2 if quick else 10)
    good = 0
    for s in seeds:
        X, mask = planted_dataset(r, d, k, heavy_per_column=1, heavy_factor=8.0, seed=s)
        synthetic, _ = gen_instahide(X, m, k, s)
        estimate = get_heavy_coordinates(synthetic.W, synthetic.Z)
        errors = relative_errors(estimate, X.X, mask)
        good += np.mean(errors <= 0.25) >= 0.9
    needed = len(seeds) if quick else 8
    return good >= needed, f'{good}/{len(seeds)} seeds recovered >= 90% of heavy entries'


@criterion(10, 'csp reduction identity')
def csp_identity(seed, quick, constant):
    m, r, k = 4, 4, 2
    W = gen_selection_matrix(m, r, k, seed)
    inst = reduce_symmetric(gram(W, Arithmetic.INTEGER), r, k, Arithmetic.INTEGER)
    broken = 0
    for sigma in itertools.product(range(inst.alphabet_size), repeat=m):
        factors = assignment_to_factors(inst, sigma)
        broken += factors.off_diagonal != 2 * (inst.edge_count - evaluate(inst, sigma))
    best = solve_csp(inst)
    passed = broken == 0 and best.value == inst.edge_count
    return passed, f'{broken} identity failures; exact optimum {best.value} of {inst.edge_count}'


@criterion(11, 'exact linear solve')
def exact_solve(seed, quick, constant):
    r, k, d = 32, 3, 8
    W = gen_selection_matrix(4 * r, r, k, seed)
    X = stream(seed, 'exact-solve').standard_normal((r, d))
    Y = W.dense().astype(float) @ X
    try:
        error = float(np.abs(solve_exact(W, Y).X - X).max())
    except RecoveryError as exc:
        return False, str(exc)
    return error <= 1e-9, f'max entry error {error:.2e}'


@criterion(12, 'determinism')
def determinism(seed, quick, constant):
    def artifacts():
        W = gen_selection_matrix(64, 8, 2, seed)
        population = population_instance(8, 2, seed=seed)
        M = gram(population)
        T = build_tensor(M, 8, 2)
        attack = tensor_recover(M, 8, 2, seed=seed)
        X, _ = planted_dataset(20, 3, 2, heavy_factor=3.0, seed=seed)
        synthetic, similarity = gen_instahide(X, 64, 2, seed)
        private = stream(seed, 'determinism').standard_normal((8, 3))
        X_hat, report = recover_dataset(M, np.abs(population.dense() @ private), 8, 2, seed=seed)
        inst = reduce_symmetric(gram(gen_selection_matrix(6, 5, 2, seed), Arithmetic.INTEGER), 5, 2)
        local = solve_local(inst, restarts=3, iters=20, seed=seed)
        rank = rank_report(W, seed=seed)
        frequencies = singularity_experiment(20, 8, 2, 5, seed)
        atoms = anticoncentration_estimate(planted_fibre_vector(12, 4, seed), 12, 3, samples=500, seed=seed)
        return {
            'selection': dumps(selection_to_dict(W)),
            'gram': dumps(gram_to_dict(gram(W))) + dumps(gram_to_dict(gram(W, Arithmetic.INTEGER))),
            'tensor': dumps(T.metadata()) + dumps(T.to_dense()),
            'attack': dumps(attack.to_report()),
            'synthetic': dumps(synthetic.Z) + dumps(gram_to_dict(similarity)),
            'recovery': dumps(None if X_hat is None else X_hat.X) + dumps(report.to_dict()),
            'csp': dumps(inst.to_json()) + dumps(list(local.sigma)) + str(local.value),
            'rank': dumps([rank.rank_f2, rank.rank_real, rank.notes]),
            'singularity': dumps([row.as_row() for row in frequencies]),
            'anticoncentration': repr(atoms),
        }
    first, second = artifacts(), artifacts()
    differing = sorted(name for name in first if first[name] != second[name])
    detail = f'artifacts differ: {differing}' if differing else f'{len(first)} artifacts compared byte for byte'
    return not differing, detail


def run_criteria(numbers=None, seed=0, quick=False, constant=None):
    """Run the selected criteria (all by default) and return one row each."""
    if constant is None:
        constant = ssbmf_setting('CALIBRATED_SAMPLE_SIZE_CONSTANT')
    rows = []
    for number in sorted(numbers or CRITERIA):
        name, func = CRITERIA[number]
        logger.info('running criterion %d (%s)', number, name)
        passed, detail = func(seed, quick, constant)
        rows.append({'criterion': number, 'name': name, 'passed': bool(passed), 'detail': detail})
    return rows
