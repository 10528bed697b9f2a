"""Unit tests for the pydantic models."""

import json
import math

import pytest
from pydantic import ValidationError

from algemech.models.report import Outcome, VerificationReport
from algemech.models.run import Command, Formalism, RunConfig


def make_report(max_residual: float, expected_fail: bool = False, **overrides: object) -> VerificationReport:
    values: dict[str, object] = {
        "check": "almost_lie",
        "model": "so3",
        "samples": 10,
        "max_residual": max_residual,
        "tol": 1e-8,
        "expected_fail": expected_fail,
        "seed": 42,
    }
    values.update(overrides)
    return VerificationReport(**values)  # type: ignore[arg-type]


class TestVerificationReport:
    """Test suite for VerificationReport."""

    @pytest.mark.parametrize(
        ("residual", "expected_fail", "outcome", "ok"),
        [
            (1e-12, False, Outcome.PASS, True),
            (1e-3, False, Outcome.FAIL, False),
            (1e-3, True, Outcome.EXPECTED_FAIL, True),
            (1e-12, True, Outcome.UNEXPECTED_PASS, False),
        ],
    )
    def test_outcomes(self, residual: float, expected_fail: bool, outcome: Outcome, ok: bool) -> None:
        """Outcome combines the residual test with the expectation."""
        report = make_report(residual, expected_fail)
        assert report.outcome == outcome
        assert report.ok is ok

    def test_passed_is_derived(self) -> None:
        """A caller cannot claim a pass the residual does not support."""
        report = make_report(1.0, passed=True)
        assert report.passed is False

    def test_boundary_passes(self) -> None:
        """max_residual == tol passes."""
        assert make_report(1e-8).passed

    def test_infinite_residual_fails(self) -> None:
        """Failed samples report an infinite residual."""
        report = make_report(math.inf)
        assert report.outcome == Outcome.FAIL
        assert json.loads(report.to_json_line())["max_residual"] == math.inf

    def test_json_key_order(self) -> None:
        """JSON lines have a fixed key order and leave out the detail text."""
        line = make_report(0.0, detail="note", skipped=2).to_json_line()
        assert list(json.loads(line)) == [
            "check",
            "model",
            "samples",
            "max_residual",
            "tol",
            "passed",
            "expected_fail",
            "seed",
            "skipped",
        ]
        assert json.loads(line)["skipped"] == 2

    @pytest.mark.parametrize("field", ["samples", "seed", "skipped", "tol"])
    def test_rejects_negative(self, field: str) -> None:
        """Counts, seeds and tolerances are non-negative."""
        with pytest.raises(ValidationError):
            make_report(0.0, **{field: -1})


class TestRunConfig:
    """Test suite for RunConfig validation."""

    def test_verify_needs_no_dynamics(self) -> None:
        """verify only needs a model."""
        cfg = RunConfig(command=Command.VERIFY, model="all")
        assert cfg.seed == 42
        assert cfg.samples == 100

    def test_simulate_hamiltonian(self) -> None:
        """A Hamiltonian run picks the inline H."""
        cfg = RunConfig(
            command=Command.SIMULATE,
            model="so3",
            formalism=Formalism.HAMILTONIAN,
            hamiltonian="0.5*xi1^2",
            lagrangian="ignored",
            dt=0.1,
            t_end=1.0,
        )
        assert cfg.inline_function == "0.5*xi1^2"

    @pytest.mark.parametrize(
        ("overrides", "message"),
        [
            ({"formalism": None}, "requires --formalism"),
            ({"dt": None}, "--dt"),
            ({"t_end": 0.0}, "--t-end"),
            ({"lagrangian": None}, "requires --l"),
            ({"formalism": Formalism.HAMILTONIAN}, "requires --h"),
            ({"formalism": Formalism.FORCED, "hamiltonian": "xi1"}, "--force"),
        ],
    )
    def test_simulate_requirements(self, overrides: dict[str, object], message: str) -> None:
        """Missing simulate inputs are rejected with the option to supply."""
        values: dict[str, object] = {
            "command": Command.SIMULATE,
            "model": "tm1",
            "formalism": Formalism.LAGRANGIAN_TT,
            "lagrangian": "0.5*y1^2",
            "dt": 0.1,
            "t_end": 1.0,
        }
        values.update(overrides)
        with pytest.raises(ValidationError, match=message):
            RunConfig(**values)  # type: ignore[arg-type]

    def test_blank_expression(self) -> None:
        """Whitespace-only expressions are rejected."""
        with pytest.raises(ValidationError, match="must not be empty"):
            RunConfig(command=Command.VERIFY, model="tm1", lagrangian="   ")

    def test_formalism_sides(self) -> None:
        """Hamiltonian and forced runs live on E*; the Lagrangian runs on E."""
        assert Formalism.FORCED.needs_hamiltonian
        assert not Formalism.LAGRANGIAN_PROLONG.needs_hamiltonian
