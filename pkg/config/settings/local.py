from .base import *  # noqa: F403
from .base import LOGGING
from .base import env

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = True
# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="local-robust-estimation-not-secret-7Qk2mVx9Rb4LwT1zHc8N",
)

# LOGGING
# ------------------------------------------------------------------------------
LOGGING["loggers"]["app"]["level"] = env("APP_LOG_LEVEL", default="DEBUG")
