default_app_config = "experiments.apps.ExperimentsConfig"
