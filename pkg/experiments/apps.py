from django.apps import AppConfig


class ExperimentsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "experiments"
    verbose_name = "Эксперименты распознавания"

    def ready(self):
        import experiments.signals  # noqa
