"""Verification report model."""

import json
from enum import Enum

from pydantic import BaseModel, Field, model_validator


class Outcome(str, Enum):
    """How a check ended relative to its expectation."""

    PASS = "PASS"
    FAIL = "FAIL"
    EXPECTED_FAIL = "EXPECTED-FAIL"
    UNEXPECTED_PASS = "UNEXPECTED-PASS"


class VerificationReport(BaseModel):
    """Result of one numeric certificate over seeded samples."""

    check: str = Field(..., min_length=1)
    model: str
    samples: int = Field(..., ge=0)
    max_residual: float
    tol: float = Field(..., ge=0.0)
    passed: bool = False
    expected_fail: bool = False
    seed: int = Field(..., ge=0)
    skipped: int = Field(default=0, ge=0)
    detail: str = ""

    @model_validator(mode="after")
    def derive_passed(self) -> "VerificationReport":
        """``passed`` always equals ``max_residual <= tol``."""
        self.passed = bool(self.max_residual <= self.tol)
        return self

    @property
    def outcome(self) -> Outcome:
        if self.expected_fail:
            return Outcome.UNEXPECTED_PASS if self.passed else Outcome.EXPECTED_FAIL
        return Outcome.PASS if self.passed else Outcome.FAIL

    @property
    def ok(self) -> bool:
        """True when the outcome does not count against the exit status."""
        return self.outcome in (Outcome.PASS, Outcome.EXPECTED_FAIL)

    def to_json_line(self) -> str:
        """One JSON object with a fixed key order."""
        payload = {
            "check": self.check,
            "model": self.model,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed,
            "expected_fail": self.expected_fail,
            "seed": self.seed,
            "skipped": self.skipped,
        }
        return json.dumps(payload, allow_nan=True)
