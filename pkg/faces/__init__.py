default_app_config = "faces.apps.FacesConfig"
