"""Fixed-step RK4 integration of the phase dynamics with per-step monitors."""

from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import structlog

from algemech.core.algebroid import AlgebroidModel, PhasePoint
from algemech.core.expr import FieldDomain, variable_names
from algemech.core.jet import FloatArray, ScalarField, evaluate
from algemech.core.prolongation import el_residual_prolong, solve_el_prolong
from algemech.core.tulczyjew import (
    Force,
    TangentVec,
    admissibility_residual,
    el_residual_tt,
    explicit_el_velocity,
    field_jet,
    forced_hamiltonian_field,
    hamiltonian_field,
)
from algemech.exceptions import IntegrationError, MathError, SingularHessianError

logger = structlog.get_logger(__name__)

VectorField = Callable[[PhasePoint], TangentVec]
# Called with the state and the vector field already evaluated there.
Monitor = Callable[[PhasePoint, TangentVec], dict[str, float]]


@dataclass
class Trajectory:
    """Sampled curve on E or E* with named monitor series."""

    side: FieldDomain
    n: int
    m: int
    times: list[float] = field(default_factory=list)
    states: list[PhasePoint] = field(default_factory=list)
    monitors: dict[str, list[float]] = field(default_factory=dict)

    def append(self, t: float, state: PhasePoint, values: dict[str, float]) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError(f"time {t!r} does not increase past {self.times[-1]!r}")
        if state.side != self.side:
            raise ValueError(f"state on {state.side.value} in a trajectory on {self.side.value}")
        if self.states and set(values) != set(self.monitors):
            raise ValueError("monitor names changed along the trajectory")
        self.times.append(t)
        self.states.append(state)
        for name, value in values.items():
            self.monitors.setdefault(name, []).append(float(value))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> PhasePoint:
        return self.states[-1]

    def header(self) -> list[str]:
        return ["t", *variable_names(self.side, self.n, self.m), *self.monitors]

    def to_rows(self) -> list[list[float]]:
        names = list(self.monitors)
        return [
            [t, *state.coords.tolist(), *(self.monitors[name][k] for name in names)]
            for k, (t, state) in enumerate(zip(self.times, self.states, strict=True))
        ]

    def write_csv(self, path: Path) -> int:
        """Write the trajectory as CSV: t, coordinates, then monitors."""
        from algemech.utils.io import write_csv

        return write_csv(path, self.header(), self.to_rows())

    def drift(self, name: str) -> float:
        """Largest deviation of a monitor from its initial value."""
        series = self.monitors.get(name)
        if not series:
            return 0.0
        return float(np.max(np.abs(np.asarray(series) - series[0])))

    def peak(self, name: str) -> float:
        series = self.monitors.get(name)
        return float(np.max(np.abs(series))) if series else 0.0

    def summary(self) -> dict[str, float]:
        """Final time, energy drift and monitor peaks."""
        out: dict[str, float] = {"t_end": self.times[-1] if self.times else 0.0, "steps": float(len(self))}
        if "energy" in self.monitors:
            out["energy_drift"] = self.drift("energy")
        for name in self.monitors:
            if name != "energy":
                out[f"max_{name}"] = self.peak(name)
        return out


def rk4_step(
    f: Callable[[FloatArray], FloatArray], z: FloatArray, dt: float, k1: FloatArray | None = None
) -> FloatArray:
    """One classical Runge-Kutta step of z' = f(z); ``k1`` may supply f(z)."""
    if k1 is None:
        k1 = f(z)
    k2 = f(z + 0.5 * dt * k1)
    k3 = f(z + 0.5 * dt * k2)
    k4 = f(z + dt * k3)
    return np.asarray(z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), dtype=np.float64)


def step_count(dt: float, t_end: float) -> int:
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    return max(1, int(round(t_end / dt)))


def _integrate(
    start: PhasePoint,
    vector_field: VectorField,
    monitor: Monitor,
    dt: float,
    t_end: float,
    label: str,
) -> Trajectory:
    steps = step_count(dt, t_end)
    side, n = start.side, start.n
    trajectory = Trajectory(side, start.n, start.m)

    def rhs(z: FloatArray) -> FloatArray:
        return vector_field(PhasePoint(side, z[:n], z[n:])).components

    z = start.coords
    for k in range(steps + 1):
        t = k * dt
        state = PhasePoint(side, z[:n], z[n:])
        try:
            velocity = vector_field(state)
            trajectory.append(t, state, monitor(state, velocity))
            if k < steps:
                z = rk4_step(rhs, z, dt, velocity.components)
                if not np.all(np.isfinite(z)):
                    raise MathError("state left the finite range")
        except SingularHessianError as e:
            logger.warning("trajectory_aborted", dynamics=label, step=k, t=t, error=str(e))
            raise SingularHessianError(
                "fiber Hessian of the Lagrangian is singular", time=t, trajectory=trajectory
            ) from e
        except MathError as e:
            logger.warning("trajectory_aborted", dynamics=label, step=k, t=t, error=str(e))
            raise IntegrationError(f"{label} integration failed", trajectory, k, e) from e

    logger.info("trajectory_completed", dynamics=label, steps=steps, t_end=trajectory.times[-1])
    return trajectory


def integrate_hamiltonian(
    M: AlgebroidModel, H: ScalarField, xi0: PhasePoint, dt: float, t_end: float
) -> Trajectory:
    """Integral curve of X_H from xi0; monitors H."""
    M.check_point(xi0, FieldDomain.ESTAR)
    return _integrate(
        xi0,
        lambda p: hamiltonian_field(M, H, p),
        lambda p, _: {"energy": evaluate(H, p.coords)},
        dt,
        t_end,
        "hamiltonian",
    )


def integrate_forced(
    M: AlgebroidModel, H: ScalarField, force: Force, xi0: PhasePoint, dt: float, t_end: float
) -> Trajectory:
    """Integral curve of X_H minus the vertical lift of the force; monitors H."""
    M.check_point(xi0, FieldDomain.ESTAR)
    return _integrate(
        xi0,
        lambda p: forced_hamiltonian_field(M, H, force, p),
        lambda p, _: {"energy": evaluate(H, p.coords)},
        dt,
        t_end,
        "forced",
    )


def _el_monitor(M: AlgebroidModel, L: ScalarField, prolong: bool) -> Monitor:
    def monitor(a: PhasePoint, X: TangentVec) -> dict[str, float]:
        jet = field_jet(L, a)
        values = {
            # E_L = <dL/dy, y> - L
            "energy": float(jet.grad[a.n :] @ a.fiber - jet.value),
            "admissibility": float(np.linalg.norm(admissibility_residual(M, a, X))),
            "el_residual_tt": float(np.linalg.norm(el_residual_tt(M, L, a, X, jet=jet))),
        }
        if prolong:
            values["el_residual_prolong"] = float(np.linalg.norm(el_residual_prolong(M, L, a, X)))
        return values

    return monitor


def integrate_el(
    M: AlgebroidModel,
    L: ScalarField,
    a0: PhasePoint,
    dt: float,
    t_end: float,
    prolong_monitor: bool = False,
) -> Trajectory:
    """Explicit Euler-Lagrange dynamics on E for a regular Lagrangian.

    Monitors the energy, the admissibility residual and the residual norm of
    the Tulczyjew formulation at every stored step. ``prolong_monitor`` adds
    the residual norm of the prolongation formulation.

    Raises:
        SingularHessianError: With the time of failure and the partial trajectory
        IntegrationError: On other mathematical failures mid-run
    """
    M.check_point(a0, FieldDomain.E)

    def velocity(a: PhasePoint) -> TangentVec:
        return explicit_el_velocity(M, L, a)

    return _integrate(a0, velocity, _el_monitor(M, L, prolong_monitor), dt, t_end, "lagrangian-tt")


def integrate_el_prolong(
    M: AlgebroidModel, L: ScalarField, a0: PhasePoint, dt: float, t_end: float
) -> Trajectory:
    """Euler-Lagrange dynamics driven by the solve of iota omega_L = dE_L."""
    M.check_point(a0, FieldDomain.E)

    def velocity(a: PhasePoint) -> TangentVec:
        return solve_el_prolong(M, L, a)

    return _integrate(a0, velocity, _el_monitor(M, L, True), dt, t_end, "lagrangian-prolong")
