import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Ключ нужен Django даже без веб-части; в .env задаётся свой
SECRET_KEY = os.getenv("SECRET_KEY", "halfface-local-key")

DEBUG = True if os.getenv("DEBUG") == "True" else False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "faces",
    "experiments",
]

MIDDLEWARE = []


DATABASES = {
    "default": {
        "ENGINE": os.getenv("DB_ENGINE", "django.db.backends.sqlite3"),
        "NAME": os.getenv("DB_NAME", str(BASE_DIR / "halfface.sqlite3")),
        "USER": os.getenv("DB_USER", ""),
        "PASSWORD": os.getenv("DB_PASSWORD", ""),
        "HOST": os.getenv("DB_HOST", ""),
        "PORT": os.getenv("DB_PORT", ""),
    }
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

LANGUAGE_CODE = "ru-ru"
TIME_ZONE = "Europe/Moscow"
USE_I18N = True
USE_TZ = True


# Кеширование: Redis, если задан REDIS_URL, иначе память процесса
REDIS_URL = os.getenv("REDIS_URL")

if REDIS_URL:
    CACHES = {
        "default": {
            "BACKEND": "django_redis.cache.RedisCache",
            "LOCATION": REDIS_URL,
            "OPTIONS": {
                "CLIENT_CLASS": "django_redis.client.DefaultClient",
            },
            "KEY_PREFIX": "halfface",
            "TIMEOUT": 600,  # 10 минут
        }
    }
else:
    CACHES = {
        "default": {
            "BACKEND": "django.core.cache.backends.locmem.LocMemCache",
            "LOCATION": "halfface",
            "TIMEOUT": 600,
        }
    }


# Логирование
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "faces": {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False},
        "experiments": {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False},
    },
}


# Параметры halfface
HALFFACE_THREADS = max(1, int(os.getenv("HALFFACE_THREADS", os.cpu_count() or 1)))

# auto: Якоби для небольших матриц Грама, LAPACK для крупных
HALFFACE_EIGEN_SOLVER = os.getenv("HALFFACE_EIGEN_SOLVER", "auto")
HALFFACE_JACOBI_MAX_SIZE = int(os.getenv("HALFFACE_JACOBI_MAX_SIZE", 400))

HALFFACE_CASCADE_PATH = os.getenv("HALFFACE_CASCADE_PATH") or None
HALFFACE_SCALE_STEP = float(os.getenv("HALFFACE_SCALE_STEP", 1.1))
HALFFACE_MIN_NEIGHBORS = int(os.getenv("HALFFACE_MIN_NEIGHBORS", 3))

HALFFACE_CORPUS_CACHE_TIMEOUT = int(os.getenv("HALFFACE_CORPUS_CACHE_TIMEOUT", 600))
