"""Configuration loading and management."""

import os
from pathlib import Path

import structlog

from algemech.core.algebroid import AlgebroidModel, builtin, builtin_names, load_model
from algemech.exceptions import ConfigError, ModelError
from algemech.models.run import RunProfile
from algemech.models.settings import AppSettings

logger = structlog.get_logger(__name__)


def get_config_dir() -> Path:
    """Get the user configuration directory.

    Returns:
        Path to configuration directory

    Platform-specific:
        - Windows: %APPDATA%\\algemech
        - macOS/Linux: $XDG_CONFIG_HOME/algemech or ~/.config/algemech
    """
    if os.name == "nt":  # Windows
        appdata = os.getenv("APPDATA")
        if not appdata:
            raise ConfigError("APPDATA environment variable not set")
        return Path(appdata) / "algemech"
    xdg_config = os.getenv("XDG_CONFIG_HOME")
    if xdg_config:
        return Path(xdg_config) / "algemech"
    return Path.home() / ".config" / "algemech"


def _bundled_dir(kind: str) -> Path:
    # Source checkout: <root>/configs/<kind>
    project_root = Path(__file__).parent.parent.parent.parent
    return project_root / "configs" / kind


def get_bundled_profiles_dir() -> Path:
    """Get the bundled run profiles directory.

    Raises:
        ConfigError: If the directory is missing
    """
    path = _bundled_dir("profiles")
    if not path.exists():
        raise ConfigError(f"Bundled profiles directory not found: {path}")
    return path


def get_user_profiles_dir() -> Path:
    return get_config_dir() / "profiles"


def get_user_models_dir() -> Path:
    return get_config_dir() / "models"


def list_available_profiles() -> list[str]:
    """List all available profile names.

    Returns:
        Sorted profile names (without .toml extension)

    Looks in:
        1. User profiles directory
        2. Bundled profiles directory
    """
    profiles: set[str] = set()

    user_dir = get_user_profiles_dir()
    if user_dir.exists():
        profiles.update(path.stem for path in user_dir.glob("*.toml"))

    try:
        profiles.update(path.stem for path in get_bundled_profiles_dir().glob("*.toml"))
    except ConfigError:
        pass  # No bundled profiles available

    return sorted(profiles)


def load_profile(name: str) -> RunProfile:
    """Load a run profile by name.

    Args:
        name: Profile name (without .toml extension)

    Returns:
        Loaded and validated RunProfile

    Raises:
        ConfigError: If profile not found or invalid

    Precedence:
        1. User profile (<config dir>/profiles/{name}.toml)
        2. Bundled profile (configs/profiles/{name}.toml)
    """
    user_path = get_user_profiles_dir() / f"{name}.toml"
    if user_path.exists():
        return RunProfile.from_toml_file(user_path)

    try:
        bundled_path = get_bundled_profiles_dir() / f"{name}.toml"
        if bundled_path.exists():
            return RunProfile.from_toml_file(bundled_path)
    except ConfigError:
        pass

    available = list_available_profiles()
    raise ConfigError(
        f"Profile '{name}' not found. Available profiles: {', '.join(available) or 'none'}"
    )


def resolve_model(name_or_path: str) -> AlgebroidModel:
    """Turn a ``--model`` value into a model.

    Precedence:
        1. Existing file path (model JSON)
        2. <config dir>/models/{name}.json
        3. Builtin registry

    Raises:
        ModelError: If nothing matches, or the file is invalid
    """
    path = expand_path(name_or_path)
    if path.is_file():
        return load_model(path)

    user_path = get_user_models_dir() / f"{name_or_path}.json"
    if user_path.is_file():
        return load_model(user_path)

    try:
        return builtin(name_or_path)
    except ModelError:
        raise ModelError(
            f"Unknown model '{name_or_path}': not a file, not in {get_user_models_dir()}, "
            f"and not builtin ({', '.join(builtin_names())})"
        ) from None


def get_settings_path() -> Path:
    return get_config_dir() / "settings.toml"


def load_app_settings() -> AppSettings:
    """Load application settings.

    Reads <config dir>/settings.toml if it exists; ``ALGEMECH_*``
    environment variables override it. Without a file, defaults plus the
    environment apply.

    Raises:
        ConfigError: If the file exists but is invalid
    """
    path = get_settings_path()
    if not path.exists():
        try:
            return AppSettings()
        except Exception as e:
            raise ConfigError(f"Invalid ALGEMECH_* environment settings: {e}") from e
    settings = AppSettings.from_toml_file(path)
    logger.debug("settings_loaded", path=str(path))
    return settings


def save_app_settings(settings: AppSettings) -> Path:
    """Write settings to <config dir>/settings.toml.

    Raises:
        ConfigError: If the write fails
    """
    path = get_settings_path()
    settings.to_toml_file(path)
    return path


def expand_path(path: str) -> Path:
    """Expand user home and environment variables in path.

    Args:
        path: Path string (may contain ~ or env vars)

    Returns:
        Expanded Path object
    """
    return Path(os.path.expandvars(os.path.expanduser(path)))
