"""Configure Django for pytest the same way example/manage.py does."""

import os
import sys
from pathlib import Path

import django

# example/settings.py lists the `tests` app, which lives in example/.
sys.path.insert(1, str(Path(__file__).resolve().parent / 'example'))
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'example.settings')
django.setup()
