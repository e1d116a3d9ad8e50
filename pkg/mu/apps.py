from django.apps import AppConfig


class MuConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'mu'
    verbose_name = 'Non-intersection probabilities'
