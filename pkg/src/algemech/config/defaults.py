"""Default configuration values."""

from algemech.models.settings import AppSettings, LoggingConfig, VerifySettings


def get_default_settings() -> AppSettings:
    """Settings written by ``algemech init``."""
    return AppSettings(logging=LoggingConfig(), verify=VerifySettings())
