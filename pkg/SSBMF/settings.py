"""
Django settings for the SSBMF project.

The project has no web surface: Django supplies configuration, logging,
the management-command CLI, the run ledger (ORM) and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'ssbmf-local-only-key')

DEBUG = os.environ.get('DJANGO_DEBUG', '0') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'core',
    'instance',
    'mu',
    'tensor',
    'jennrich',
    'recover',
    'csp',
    'probes',
]


# Database (run ledger only)
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.environ.get('SSBMF_DB_PATH', BASE_DIR / 'db.sqlite3'),
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/

LOG_LEVEL = os.environ.get('SSBMF_LOG_LEVEL', 'WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in ('core', 'instance', 'mu', 'tensor', 'jennrich', 'recover', 'csp', 'probes')
    },
}


# Factorization / attack tunables. Every key can be overridden with an
# environment variable SSBMF_<KEY>.

def _env(name, default, cast):
    value = os.environ.get(f'SSBMF_{name}')
    return default if value is None else cast(value)


SSBMF = {
    'SAMPLE_SIZE_CONSTANT': _env('SAMPLE_SIZE_CONSTANT', 8.0, float),
    'CALIBRATED_SAMPLE_SIZE_CONSTANT': _env('CALIBRATED_SAMPLE_SIZE_CONSTANT', 2.0, float),
    'ROUNDING_TOL': _env('ROUNDING_TOL', 0.25, float),
    'SVD_CUTOFF': _env('SVD_CUTOFF', 1e-8, float),
    'EIGEN_GAP_TOL': _env('EIGEN_GAP_TOL', 1e-6, float),
    'JENNRICH_RETRIES': _env('JENNRICH_RETRIES', 5, int),
    'C_HEAVY': _env('C_HEAVY', 6.0, float),
    'ETA': _env('ETA', 0.25, float),
    'CSP_EXACT_BUDGET': _env('CSP_EXACT_BUDGET', 10**7, int),
    'LOCAL_RESTARTS': _env('LOCAL_RESTARTS', 20, int),
    'LOCAL_ITERS': _env('LOCAL_ITERS', 200, int),
    'ANTICONCENTRATION_CONSTANT': _env('ANTICONCENTRATION_CONSTANT', 3.0, float),
    'RANK_PRIMES': _env('RANK_PRIMES', 3, int),
    'CERTIFY_RANK_MAX_R': _env('CERTIFY_RANK_MAX_R', 200, int),
}
