"""
`forecastad` console script: the management commands without a Django project.

Inside a project `python manage.py generate|train|search|detect|score` behaves the same.
"""

import os
import sys

import django
from django.conf import settings
from django.core.management import execute_from_command_line

DEFAULT_LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {'format': '%(asctime)s %(levelname)s %(name)s: %(message)s'},
    },
    'handlers': {
        'console': {'class': 'logging.StreamHandler', 'formatter': 'plain'},
    },
    'loggers': {
        'forecastad': {'handlers': ['console'], 'level': 'INFO', 'propagate': False},
    },
}


def configure():
    if settings.configured or os.environ.get('DJANGO_SETTINGS_MODULE'):
        return
    settings.configure(
        INSTALLED_APPS=['forecastad'],
        DATABASES={},
        LOGGING=DEFAULT_LOGGING,
        FORECASTAD={'N_JOBS': int(os.environ.get('FORECASTAD_N_JOBS', 1))},
    )


def main(argv=None):
    configure()
    django.setup()
    argv = sys.argv[1:] if argv is None else list(argv)
    execute_from_command_line(['forecastad', *argv])


if __name__ == '__main__':
    main()
