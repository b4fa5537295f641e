from django.apps import AppConfig


class DifferentiationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'differentiation'
    verbose_name = 'Дифференциация SZ/BP по rsfMRI'
