"""
Django settings for the example project.

The project only hosts the forecastad management commands and the test-suite; it has no database, no URLs and
no middleware.
"""

from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = 'ABCDEFGHIJKLMNOPQRSTUVWXYZ1234567890'

DEBUG = True

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'forecastad',
    'tests',
]

DATABASES = {}

# Internationalization
# https://docs.djangoproject.com/en/5.1/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

FORECASTAD = {
    'N_JOBS': 1,  # joblib workers for fitness evaluation; -1 uses every core
    'FLOAT_FORMAT': '%.10g',  # CSV float format of every report
    'DEFAULT_TOP_K': 2,  # suspect tags per event when detector.top_k is not set
    'SVG': False,  # render error_curve.svg on every detect run
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
        },
    },
    'loggers': {
        'forecastad': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': True,
        },
    },
}
