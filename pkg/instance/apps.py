from django.apps import AppConfig


class InstanceConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'instance'
    verbose_name = 'Selection matrices and Gram matrices'
