"""Run configuration models for the command-line front end."""

from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field, field_validator, model_validator


class Command(str, Enum):
    """Top-level commands."""

    VERIFY = "verify"
    SIMULATE = "simulate"
    INSPECT = "inspect"


class Formalism(str, Enum):
    """Dynamics to integrate."""

    HAMILTONIAN = "hamiltonian"
    LAGRANGIAN_TT = "lagrangian-tt"
    LAGRANGIAN_PROLONG = "lagrangian-prolong"
    FORCED = "forced"

    @property
    def needs_hamiltonian(self) -> bool:
        return self in (Formalism.HAMILTONIAN, Formalism.FORCED)


class ProfileRun(BaseModel):
    """The ``[run]`` table of a simulate profile. Every field is optional."""

    model: str | None = None
    formalism: Formalism | None = None
    hamiltonian: str | None = Field(default=None, alias="h")
    lagrangian: str | None = Field(default=None, alias="l")
    force: list[str] = Field(default_factory=list)
    at: str | None = None
    dt: float | None = Field(default=None, gt=0.0)
    t_end: float | None = Field(default=None, gt=0.0)

    model_config = {"populate_by_name": True}


class ProfileMeta(BaseModel):
    """Profile metadata."""

    name: str = Field(..., min_length=1, max_length=100)
    description: str = Field(default="", max_length=500)


class RunProfile(BaseModel):
    """Named simulate preset loaded from TOML."""

    profile: ProfileMeta
    run: ProfileRun

    @classmethod
    def from_toml_file(cls, path: Path) -> "RunProfile":
        """Load and validate a run profile from TOML file.

        Args:
            path: Path to TOML file

        Returns:
            Validated RunProfile instance

        Raises:
            ConfigError: If file doesn't exist or is invalid
        """
        from algemech.exceptions import ConfigError

        if not path.exists():
            raise ConfigError(f"Profile file not found: {path}")

        try:
            import tomli

            with path.open("rb") as f:
                data = tomli.load(f)
            return cls(**data)
        except Exception as e:
            raise ConfigError(f"Failed to load profile from {path}: {e}") from e


class RunConfig(BaseModel):
    """Validated configuration of one command invocation."""

    command: Command
    model: str = Field(..., min_length=1)
    formalism: Formalism | None = None
    hamiltonian: str | None = None
    lagrangian: str | None = None
    function_file: Path | None = None
    force: list[str] = Field(default_factory=list)
    at: str | None = None
    dt: float | None = None
    t_end: float | None = None
    seed: int = Field(default=42, ge=0)
    samples: int = Field(default=100, ge=1)
    tol: float = Field(default=1e-8, gt=0.0)
    workers: int = Field(default=1, ge=1)
    output: Path | None = None

    @field_validator("hamiltonian", "lagrangian")
    @classmethod
    def validate_expression_text(cls, v: str | None) -> str | None:
        """Reject blank inline expressions."""
        if v is not None and not v.strip():
            raise ValueError("Expression must not be empty")
        return v

    @model_validator(mode="after")
    def validate_command_requirements(self) -> "RunConfig":
        """Check the fields each command needs."""
        if self.command != Command.SIMULATE:
            return self

        if self.formalism is None:
            raise ValueError("simulate requires --formalism")
        if self.dt is None or self.dt <= 0:
            raise ValueError("simulate requires --dt > 0")
        if self.t_end is None or self.t_end <= 0:
            raise ValueError("simulate requires --t-end > 0")

        has_file = self.function_file is not None
        if self.formalism.needs_hamiltonian:
            if self.hamiltonian is None and not has_file:
                raise ValueError(f"formalism '{self.formalism.value}' requires --h")
        elif self.lagrangian is None and not has_file:
            raise ValueError(f"formalism '{self.formalism.value}' requires --l")

        if self.formalism == Formalism.FORCED and not self.force:
            raise ValueError("formalism 'forced' requires at least one --force")
        return self

    @property
    def inline_function(self) -> str | None:
        """Inline expression relevant to the chosen formalism."""
        if self.formalism is None:
            return None
        if self.formalism.needs_hamiltonian:
            return self.hamiltonian
        return self.lagrangian
