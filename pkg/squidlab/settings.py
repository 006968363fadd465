"""
Django settings for the squidlab project.

squidlab has no web surface: Django provides the settings layer, the app
registry, the management-command CLI and the test runner.
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Required by Django; nothing in squidlab signs data with it.
SECRET_KEY = config("SECRET_KEY", default="<your-secret-key>", cast=str)

DEBUG = config("DEBUG", default=True, cast=bool)

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    # Third party
    "rest_framework",
    # Local Apps
    "quantum_core",
    "pulses",
    "squid_device",
    "single_qubit_rotation",
    "two_qubit_cavity",
    "scenarios",
]

# Database config (nothing is stored; SimpleTestCase suites never open it)
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

# Internationalization
LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# simulation config
DEFAULT_DT = config("DEFAULT_DT", default=1e-3, cast=float)  # ns
OUTPUT_DIR = Path(config("OUTPUT_DIR", default=str(BASE_DIR / "runs")))
TRAJECTORY_STRIDE = config("TRAJECTORY_STRIDE", default=10, cast=int)
SWEEP_WORKERS = config("SWEEP_WORKERS", default=2, cast=int)

# logging config
LOG_LEVEL = config("LOG_LEVEL", default="INFO", cast=str)
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "{levelname} {name}: {message}", "style": "{"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "simple"},
    },
    "root": {"handlers": ["console"], "level": LOG_LEVEL},
}
