"""Configuration management for AlgeMech."""

from algemech.config.defaults import get_default_settings
from algemech.config.loader import (
    expand_path,
    get_bundled_profiles_dir,
    get_config_dir,
    get_settings_path,
    get_user_models_dir,
    get_user_profiles_dir,
    list_available_profiles,
    load_app_settings,
    load_profile,
    resolve_model,
    save_app_settings,
)

__all__ = [
    "get_default_settings",
    "expand_path",
    "get_bundled_profiles_dir",
    "get_config_dir",
    "get_settings_path",
    "get_user_models_dir",
    "get_user_profiles_dir",
    "list_available_profiles",
    "load_app_settings",
    "load_profile",
    "resolve_model",
    "save_app_settings",
]
