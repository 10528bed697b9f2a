"""Data models for AlgeMech."""

from algemech.models.report import Outcome, VerificationReport
from algemech.models.run import (
    Command,
    Formalism,
    ProfileMeta,
    ProfileRun,
    RunConfig,
    RunProfile,
)
from algemech.models.settings import (
    AppSettings,
    LogFormat,
    LoggingConfig,
    LogLevel,
    VerifySettings,
)

__all__ = [
    "Outcome",
    "VerificationReport",
    "Command",
    "Formalism",
    "ProfileMeta",
    "ProfileRun",
    "RunConfig",
    "RunProfile",
    "AppSettings",
    "LogFormat",
    "LoggingConfig",
    "LogLevel",
    "VerifySettings",
]
