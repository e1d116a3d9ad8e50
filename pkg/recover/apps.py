from django.apps import AppConfig


class RecoverConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'recover'
    verbose_name = 'Dataset reconstruction'
