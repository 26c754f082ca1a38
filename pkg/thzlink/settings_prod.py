import os
from pathlib import Path

from dotenv import load_dotenv

# .env phải được nạp trước khi settings gốc đọc biến môi trường
load_dotenv(Path(__file__).resolve().parent.parent / '.env')

from .settings import *  # noqa: E402,F401,F403

DEBUG = False

SECRET_KEY = os.environ['DJANGO_SECRET_KEY']

# Database cho production (PostgreSQL)
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.postgresql',
        'NAME': os.environ.get('POSTGRES_DB', 'thzlink'),
        'USER': os.environ.get('POSTGRES_USER', 'thzlink'),
        'PASSWORD': os.environ.get('POSTGRES_PASSWORD', ''),
        'HOST': os.environ.get('POSTGRES_HOST', 'localhost'),
        'PORT': os.environ.get('POSTGRES_PORT', '5432'),
    }
}

# Logging
for handler in LOGGING['handlers'].values():
    handler['level'] = 'WARNING'
for logger_config in LOGGING['loggers'].values():
    logger_config['level'] = 'WARNING'
