from django.apps import AppConfig


class CspConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'csp'
    verbose_name = 'Max 2-CSP reductions'
