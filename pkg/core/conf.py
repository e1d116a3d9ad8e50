from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
    'SAMPLE_SIZE_CONSTANT': 8.0,
    'CALIBRATED_SAMPLE_SIZE_CONSTANT': 2.0,
    'ROUNDING_TOL': 0.25,
    'SVD_CUTOFF': 1e-8,
    'EIGEN_GAP_TOL': 1e-6,
    'JENNRICH_RETRIES': 5,
    'C_HEAVY': 6.0,
    'ETA': 0.25,
    'CSP_EXACT_BUDGET': 10**7,
    'LOCAL_RESTARTS': 20,
    'LOCAL_ITERS': 200,
    'ANTICONCENTRATION_CONSTANT': 3.0,
    'RANK_PRIMES': 3,
    'CERTIFY_RANK_MAX_R': 200,
}


def ssbmf_setting(name):
    """Look up a tunable in settings.SSBMF, falling back to the built-in default.

    Works without a configured Django settings module so the library can be
    imported from plain scripts.
    """
    if name not in DEFAULTS:
        raise KeyError(name)
    try:
        overrides = getattr(settings, 'SSBMF', {})
    except ImproperlyConfigured:
        return DEFAULTS[name]
    return overrides.get(name, DEFAULTS[name])
