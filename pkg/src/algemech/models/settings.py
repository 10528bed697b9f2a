"""Application settings models."""

from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class LogLevel(str, Enum):
    """Logging levels."""

    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"


class LogFormat(str, Enum):
    """Log output formats."""

    JSON = "json"
    CONSOLE = "console"


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: LogLevel = Field(default=LogLevel.WARNING)
    format: LogFormat = Field(default=LogFormat.CONSOLE)


class VerifySettings(BaseModel):
    """Defaults for verification runs."""

    seed: int = Field(default=42, ge=0)
    samples: int = Field(default=100, ge=1, le=100_000)
    tol: float = Field(default=1e-8, gt=0.0)
    workers: int = Field(default=1, ge=1, le=64)


class AppSettings(BaseSettings):
    """General application settings.

    Values come from ``settings.toml`` in the config directory, and
    ``ALGEMECH_*`` environment variables override them
    (e.g. ``ALGEMECH_LOGGING__LEVEL=DEBUG``).
    """

    model_config = SettingsConfigDict(
        env_prefix="ALGEMECH_",
        env_nested_delimiter="__",
        extra="ignore",
    )

    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    verify: VerifySettings = Field(default_factory=VerifySettings)

    @classmethod
    def from_toml_file(cls, path: Path) -> "AppSettings":
        """Load settings from a TOML file, letting the environment override it.

        Args:
            path: Path to TOML file

        Returns:
            Validated AppSettings instance

        Raises:
            ConfigError: If file doesn't exist or is invalid
        """
        from algemech.exceptions import ConfigError

        if not path.exists():
            raise ConfigError(f"Settings file not found: {path}")

        try:
            import tomli

            with path.open("rb") as f:
                data = tomli.load(f)
            file_settings = cls.model_validate(data)
            env_settings = cls()
            merged = file_settings.model_dump()
            for key, value in env_settings.model_dump(exclude_defaults=True).items():
                merged[key] = {**merged[key], **value}
            return cls.model_validate(merged)
        except Exception as e:
            raise ConfigError(f"Failed to load settings from {path}: {e}") from e

    def to_toml_file(self, path: Path) -> None:
        """Write settings to a TOML file.

        Args:
            path: Destination path for TOML file

        Raises:
            ConfigError: If write fails
        """
        from algemech.exceptions import ConfigError

        try:
            import tomli_w

            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("wb") as f:
                tomli_w.dump(self.model_dump(mode="json"), f)
        except Exception as e:
            raise ConfigError(f"Failed to write settings to {path}: {e}") from e
