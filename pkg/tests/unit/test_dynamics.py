"""Unit tests for trajectories and the RK4 integrators."""

import csv
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from algemech.core.algebroid import AlgebroidModel, PhasePoint
from algemech.core.dynamics import (
    Trajectory,
    integrate_el,
    integrate_el_prolong,
    integrate_forced,
    integrate_hamiltonian,
    rk4_step,
    step_count,
)
from algemech.core.expr import ExprField, FieldDomain
from algemech.core.tulczyjew import force_from_texts, legendre_map
from algemech.exceptions import IntegrationError, SideMismatchError, SingularHessianError

INERTIA = np.array([1.0, 2.0, 3.0])


class TestTrajectory:
    """Test suite for the Trajectory container."""

    def make(self) -> Trajectory:
        trajectory = Trajectory(FieldDomain.ESTAR, 1, 1)
        trajectory.append(0.0, PhasePoint.on_estar([0.0], [1.0]), {"energy": 0.5})
        trajectory.append(0.1, PhasePoint.on_estar([0.1], [1.0]), {"energy": 0.75})
        return trajectory

    def test_header_and_rows(self) -> None:
        """Header lists t, coordinates and monitors; rows follow it."""
        trajectory = self.make()
        assert trajectory.header() == ["t", "x1", "xi1", "energy"]
        assert trajectory.to_rows()[1] == [0.1, 0.1, 1.0, 0.75]
        assert len(trajectory) == 2
        assert trajectory.final.same_as(PhasePoint.on_estar([0.1], [1.0]))

    def test_time_must_increase(self) -> None:
        """Appending a non-increasing time fails."""
        trajectory = self.make()
        with pytest.raises(ValueError, match="does not increase"):
            trajectory.append(0.1, PhasePoint.on_estar([0.0], [1.0]), {"energy": 0.5})

    def test_side_must_match(self) -> None:
        """States must live on the trajectory's side."""
        trajectory = self.make()
        with pytest.raises(ValueError, match="on E"):
            trajectory.append(0.2, PhasePoint.on_e([0.0], [1.0]), {"energy": 0.5})

    def test_monitor_names_fixed(self) -> None:
        """Monitor names cannot change mid-run."""
        trajectory = self.make()
        with pytest.raises(ValueError, match="monitor names"):
            trajectory.append(0.2, PhasePoint.on_estar([0.0], [1.0]), {"other": 0.5})

    def test_drift_and_summary(self) -> None:
        """Drift is measured from the initial value."""
        trajectory = self.make()
        assert trajectory.drift("energy") == 0.25
        assert trajectory.drift("missing") == 0.0
        summary = trajectory.summary()
        assert summary["t_end"] == 0.1
        assert summary["steps"] == 2.0
        assert summary["energy_drift"] == 0.25

    def test_summary_peaks(self) -> None:
        """Non-energy monitors report their peak magnitude."""
        trajectory = Trajectory(FieldDomain.E, 0, 1)
        trajectory.append(0.0, PhasePoint.on_e([], [1.0]), {"admissibility": -2.0})
        assert trajectory.summary()["max_admissibility"] == 2.0

    def test_write_csv(self, temp_dir: Path) -> None:
        """CSV output has the header row then one row per sample."""
        path = temp_dir / "run.csv"
        assert self.make().write_csv(path) == 2
        with path.open(encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["t", "x1", "xi1", "energy"]
        assert [float(v) for v in rows[2]] == [0.1, 0.1, 1.0, 0.75]


class TestStepping:
    """Test suite for the RK4 step and step counting."""

    def test_step_count(self) -> None:
        """Steps round t_end / dt."""
        assert step_count(0.1, 1.0) == 10
        assert step_count(0.3, 0.1) == 1

    @pytest.mark.parametrize(("dt", "t_end"), [(0.0, 1.0), (0.1, 0.0), (-0.1, 1.0)])
    def test_step_count_rejects(self, dt: float, t_end: float) -> None:
        """dt and t_end must be positive."""
        with pytest.raises(ValueError):
            step_count(dt, t_end)

    def test_rk4_first_stage_reuse(self) -> None:
        """Supplying f(z) as k1 gives the same step."""

        def f(v: np.ndarray) -> np.ndarray:
            return np.array([v[1], -v[0]])

        z = np.array([1.0, 0.5])
        np.testing.assert_array_equal(rk4_step(f, z, 0.1), rk4_step(f, z, 0.1, f(z)))

    def test_rk4_matches_taylor(self) -> None:
        """One step of z' = -z is the fourth-order Taylor polynomial of exp(-dt)."""
        dt = 0.1
        z = rk4_step(lambda v: -v, np.array([1.0]), dt)
        taylor = 1 - dt + dt**2 / 2 - dt**3 / 6 + dt**4 / 24
        assert z[0] == pytest.approx(taylor, rel=1e-14)


class TestHamiltonianDynamics:
    """Test suite for integral curves of X_H."""

    def test_free_particle_line(self, tm1: AlgebroidModel) -> None:
        """x(t) = x0 + xi t exactly, with constant energy."""
        H = tm1.field("0.5*xi1^2", FieldDomain.ESTAR)
        trajectory = integrate_hamiltonian(tm1, H, PhasePoint.on_estar([1.0], [2.0]), 0.1, 1.0)
        assert len(trajectory) == 11
        assert trajectory.final.x[0] == pytest.approx(3.0, abs=1e-12)
        assert trajectory.drift("energy") == 0.0

    def test_rigid_body_conserves_energy(self, so3: AlgebroidModel, rigid_body_h: ExprField) -> None:
        """RK4 keeps the rigid-body energy and Casimir nearly constant."""
        xi0 = np.array([1.0, 1.0, 1.0])
        trajectory = integrate_hamiltonian(so3, rigid_body_h, PhasePoint.on_estar([], xi0), 1e-2, 5.0)
        assert trajectory.drift("energy") < 1e-8
        assert np.linalg.norm(trajectory.final.fiber) == pytest.approx(np.linalg.norm(xi0), rel=1e-8)

    @pytest.mark.slow
    def test_rigid_body_long_run(self, so3: AlgebroidModel, rigid_body_h: ExprField) -> None:
        """Default step over ten time units drifts by less than 1e-10."""
        trajectory = integrate_hamiltonian(so3, rigid_body_h, PhasePoint.on_estar([], [1.0, 1.0, 1.0]), 1e-3, 10.0)
        assert len(trajectory) == 10001
        assert trajectory.drift("energy") < 1e-10

    def test_fourth_order_convergence(self, tm1: AlgebroidModel) -> None:
        """Halving dt divides the oscillator error by about 16."""
        H = tm1.field("0.5*(xi1^2 + x1^2)", FieldDomain.ESTAR)
        start = PhasePoint.on_estar([1.0], [0.0])
        exact = np.array([math.cos(1.0), -math.sin(1.0)])
        errors = [
            np.linalg.norm(integrate_hamiltonian(tm1, H, start, dt, 1.0).final.coords - exact)
            for dt in (0.1, 0.05)
        ]
        assert 12.0 <= errors[0] / errors[1] <= 20.0

    def test_rigid_body_fourth_order(self, so3: AlgebroidModel, rigid_body_h: ExprField) -> None:
        """Against a dt/4 reference, halving dt divides the error by about 17."""
        start = PhasePoint.on_estar([], [1.0, 1.0, 1.0])
        dt = 0.05
        reference = integrate_hamiltonian(so3, rigid_body_h, start, dt / 4, 1.0).final.fiber
        errors = [
            np.linalg.norm(integrate_hamiltonian(so3, rigid_body_h, start, step, 1.0).final.fiber - reference)
            for step in (dt, dt / 2)
        ]
        assert 14.0 <= errors[0] / errors[1] <= 20.0

    def test_wrong_side(self, tm1: AlgebroidModel) -> None:
        """Hamiltonian dynamics start on E*."""
        H = tm1.field("0.5*xi1^2", FieldDomain.ESTAR)
        with pytest.raises(SideMismatchError):
            integrate_hamiltonian(tm1, H, PhasePoint.on_e([0.0], [1.0]), 0.1, 1.0)

    def test_domain_failure_keeps_partial_trajectory(self, tm1: AlgebroidModel) -> None:
        """Leaving the domain of log aborts with the good prefix."""
        H = tm1.field("0.5*xi1^2 + log(x1)", FieldDomain.ESTAR)
        with pytest.raises(IntegrationError) as exc_info:
            integrate_hamiltonian(tm1, H, PhasePoint.on_estar([0.5], [-1.0]), 0.01, 2.0)
        error = exc_info.value
        assert len(error.trajectory) > 1
        assert error.index in (len(error.trajectory) - 1, len(error.trajectory))
        assert all(state.x[0] > 0 for state in error.trajectory.states)


class TestForcedDynamics:
    """Test suite for forced Hamiltonian dynamics."""

    def test_linear_drag_decays_exponentially(self, tm1: AlgebroidModel) -> None:
        """xi(t) = xi0 exp(-k t) under drag k xi."""
        H = tm1.field("0.5*xi1^2", FieldDomain.ESTAR)
        force = force_from_texts(tm1, ["0.5*xi1"])
        trajectory = integrate_forced(tm1, H, force, PhasePoint.on_estar([0.0], [2.0]), 0.01, 2.0)
        assert trajectory.final.fiber[0] == pytest.approx(2.0 * math.exp(-1.0), rel=1e-8)
        assert trajectory.final.x[0] == pytest.approx(4.0 * (1.0 - math.exp(-1.0)), rel=1e-8)
        assert trajectory.monitors["energy"][-1] < trajectory.monitors["energy"][0]


class TestLagrangianDynamics:
    """Test suite for the Euler-Lagrange integrators."""

    def test_free_particle(self, tm1: AlgebroidModel, free_particle_l: ExprField) -> None:
        """Monitors stay at zero along the free motion."""
        trajectory = integrate_el(
            tm1, free_particle_l, PhasePoint.on_e([0.0], [1.0]), 0.1, 1.0, prolong_monitor=True
        )
        assert trajectory.header() == [
            "t",
            "x1",
            "y1",
            "energy",
            "admissibility",
            "el_residual_tt",
            "el_residual_prolong",
        ]
        assert trajectory.final.x[0] == pytest.approx(1.0)
        assert trajectory.peak("el_residual_tt") < 1e-12
        assert trajectory.peak("el_residual_prolong") < 1e-12

    def test_prolong_monitor_off_by_default(self, tm1: AlgebroidModel, free_particle_l: ExprField) -> None:
        """The prolongation residual is only computed on request."""
        trajectory = integrate_el(tm1, free_particle_l, PhasePoint.on_e([0.0], [1.0]), 0.1, 0.2)
        assert "el_residual_prolong" not in trajectory.monitors

    def test_legendre_duality(self, so3: AlgebroidModel, rigid_body_l: ExprField, rigid_body_h: ExprField) -> None:
        """The Legendre image of the EL flow is the Hamiltonian flow."""
        y0 = np.array([1.0, 0.5, -0.3])
        lagrangian = integrate_el(so3, rigid_body_l, PhasePoint.on_e([], y0), 1e-2, 2.0)
        hamiltonian = integrate_hamiltonian(so3, rigid_body_h, PhasePoint.on_estar([], INERTIA * y0), 1e-2, 2.0)
        np.testing.assert_allclose(INERTIA * lagrangian.final.fiber, hamiltonian.final.fiber, atol=1e-8)
        assert lagrangian.drift("energy") < 1e-8

    @pytest.mark.slow
    def test_legendre_duality_long_run(
        self, so3: AlgebroidModel, rigid_body_l: ExprField, rigid_body_h: ExprField
    ) -> None:
        """Ten time units at dt = 1e-3: statewise agreement, conserved energy, bounded runtime."""
        y0 = np.array([1.0, 0.5, -0.3])
        started = time.perf_counter()
        lagrangian = integrate_el(so3, rigid_body_l, PhasePoint.on_e([], y0), 1e-3, 10.0)
        hamiltonian = integrate_hamiltonian(so3, rigid_body_h, PhasePoint.on_estar([], INERTIA * y0), 1e-3, 10.0)
        elapsed = time.perf_counter() - started

        assert len(lagrangian) == len(hamiltonian) == 10001
        mapped = np.array([legendre_map(rigid_body_l, a).fiber for a in lagrangian.states])
        np.testing.assert_allclose(mapped, [p.fiber for p in hamiltonian.states], atol=1e-6)
        assert lagrangian.drift("energy") < 1e-6
        assert hamiltonian.drift("energy") < 1e-6
        assert lagrangian.peak("admissibility") <= 1e-7
        assert lagrangian.peak("el_residual_tt") <= 1e-6
        # line tracing (coverage, debuggers) inflates wall time
        if sys.gettrace() is None:
            assert elapsed < 10.0

    def test_formulations_agree(self, so3: AlgebroidModel, rigid_body_l: ExprField) -> None:
        """The prolongation-driven flow matches the explicit one."""
        a0 = PhasePoint.on_e([], [0.2, -1.0, 0.4])
        explicit = integrate_el(so3, rigid_body_l, a0, 1e-2, 1.0, prolong_monitor=False)
        prolonged = integrate_el_prolong(so3, rigid_body_l, a0, 1e-2, 1.0)
        np.testing.assert_allclose(explicit.final.fiber, prolonged.final.fiber, atol=1e-10)

    def test_singular_hessian(self, tm1: AlgebroidModel) -> None:
        """A Lagrangian linear in y fails at the first step with the time attached."""
        L = tm1.field("x1*y1", FieldDomain.E)
        with pytest.raises(SingularHessianError) as exc_info:
            integrate_el(tm1, L, PhasePoint.on_e([1.0], [1.0]), 0.1, 1.0)
        assert exc_info.value.time == 0.0
        assert len(exc_info.value.trajectory) == 0

    def test_wrong_side(self, tm1: AlgebroidModel, free_particle_l: ExprField) -> None:
        """EL dynamics start on E."""
        with pytest.raises(SideMismatchError):
            integrate_el(tm1, free_particle_l, PhasePoint.on_estar([0.0], [1.0]), 0.1, 1.0)
