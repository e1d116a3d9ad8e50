from django.apps import AppConfig


class JennrichAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'jennrich'
    verbose_name = 'Tensor decomposition and recovery'
