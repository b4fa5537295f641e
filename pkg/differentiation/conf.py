# differentiation/conf.py
"""Доступ к DIFFERENTIATION_CONFIG из settings."""
import copy

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured


def get_setting(key: str):
    """Копия значения settings.DIFFERENTIATION_CONFIG[key]."""
    config = getattr(settings, 'DIFFERENTIATION_CONFIG', None)
    if config is None:
        raise ImproperlyConfigured('В settings не задан DIFFERENTIATION_CONFIG')
    if key not in config:
        raise ImproperlyConfigured(f'В DIFFERENTIATION_CONFIG нет параметра {key}')
    return copy.deepcopy(config[key])
