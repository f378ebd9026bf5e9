from pathlib import Path

from django.core.exceptions import ValidationError


def validate_positive(value):
    if value <= 0:
        raise ValidationError(f'Expected a positive value, got {value}')


def validate_non_negative(value):
    if value < 0:
        raise ValidationError(f'Expected a non-negative value, got {value}')


def validate_unit_interval(value):
    if not 0 <= value < 1:
        raise ValidationError(f'Expected a value in [0, 1), got {value}')


def validate_at_least_one(value):
    if value < 1:
        raise ValidationError(f'Expected a value >= 1, got {value}')


def validate_at_least_two(value):
    if value < 2:
        raise ValidationError(f'Expected a value >= 2, got {value}')


def validate_existing_file(value):
    if not Path(value).is_file():
        raise ValidationError(f'File does not exist: {value}')


def validate_existing_directory(value):
    if not Path(value).is_dir():
        raise ValidationError(f'Directory does not exist: {value}')
