"""
Django settings for the wavecast project.

Only the pieces a batch forecasting toolkit needs are configured: the
``forecasting`` app, a local SQLite database for run records and the
logging setup shared by the management commands.
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables
load_dotenv()

SECRET_KEY = os.getenv('SECRET_KEY', 'wavecast-local-only-key')

DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',

    # Local apps
    'forecasting',
]


# Database

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Experiment defaults (TOML values and CLI flags override these)

WAVECAST_OUTPUT_DIR = os.getenv('WAVECAST_OUTPUT_DIR', 'out')
WAVECAST_JOBS = int(os.getenv('WAVECAST_JOBS', '1'))
WAVECAST_SEED = int(os.getenv('WAVECAST_SEED', '7'))
WAVECAST_LOG_LEVEL = os.getenv('WAVECAST_LOG_LEVEL', 'INFO').upper()


# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
        'forecasting': {
            'handlers': ['console'],
            'level': WAVECAST_LOG_LEVEL,
            'propagate': False,
        },
    },
}
