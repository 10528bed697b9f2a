"""Main CLI application using Typer."""

from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, NoReturn, Optional

import numpy as np
import structlog
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape

import algemech
from algemech.config import (
    get_default_settings,
    get_settings_path,
    list_available_profiles,
    load_app_settings,
    load_profile,
    resolve_model,
    save_app_settings,
)
from algemech.core.algebroid import (
    AlgebroidModel,
    almost_lie_residual,
    builtin,
    builtin_names,
    jacobi_residual,
    sample_base_points,
)
from algemech.core.dynamics import (
    Trajectory,
    integrate_el,
    integrate_el_prolong,
    integrate_forced,
    integrate_hamiltonian,
)
from algemech.core.expr import FieldDomain
from algemech.core.prolongation import omega_matrix
from algemech.core.tulczyjew import bivector_from_brackets, bivector_matrix, force_from_texts
from algemech.core.verify import verify_all
from algemech.exceptions import (
    ConfigError,
    ExpressionError,
    IntegrationError,
    MathError,
    ModelError,
    SingularHessianError,
)
from algemech.models.run import Command, Formalism, RunConfig
from algemech.models.settings import AppSettings, LogLevel
from algemech.utils import configure_logging, parse_at, write_jsonl

app = typer.Typer(
    name="algemech",
    help="Mechanics on almost-Lie algebroids: verification suite and integrators",
    add_completion=False,
)
console = Console()
logger = structlog.get_logger(__name__)

EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_MATH = 3
ALL_MODELS = "all"


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"AlgeMech version {algemech.__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: Optional[bool] = typer.Option(
        None,
        "--version",
        "-v",
        callback=version_callback,
        is_eager=True,
        help="Show version and exit",
    ),
) -> None:
    """AlgeMech - Lagrangian and Hamiltonian mechanics on almost-Lie algebroids."""
    pass


def _fail(code: int, message: str) -> NoReturn:
    logger.error("command_failed", exit_code=code, error=message)
    console.print(f"[bold red]Error:[/bold red] {escape(message)}")
    raise typer.Exit(code=code)


def _validation_message(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(part) for part in err["loc"])
        parts.append(f"{loc}: {err['msg']}" if loc else str(err["msg"]))
    return "; ".join(parts)


@contextmanager
def handle_errors() -> Iterator[None]:
    """Map library errors to the exit-code contract: 2 for input, 3 for math and I/O at run time."""
    try:
        yield
    except ValidationError as e:
        _fail(EXIT_CONFIG, _validation_message(e))
    except (ConfigError, ModelError, ExpressionError) as e:
        _fail(EXIT_CONFIG, str(e))
    except MathError as e:
        _fail(EXIT_MATH, str(e))
    except OSError as e:
        _fail(EXIT_MATH, f"I/O error: {e}")


def _setup(log_level: LogLevel | None) -> AppSettings:
    settings = load_app_settings()
    if log_level is not None:
        settings.logging.level = log_level
    configure_logging(settings.logging)
    return settings


def _resolve_models(name_or_path: str) -> list[AlgebroidModel]:
    if name_or_path == ALL_MODELS:
        return [builtin(name) for name in builtin_names()]
    return [resolve_model(name_or_path)]


@app.command()
def verify(
    model: Annotated[str, typer.Option("--model", "-m", help="Model name or JSON file; 'all' for every builtin")] = ALL_MODELS,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Random seed")] = None,
    tol: Annotated[Optional[float], typer.Option("--tol", help="Tolerance for algebraic identities")] = None,
    samples: Annotated[Optional[int], typer.Option("--samples", help="Samples per check")] = None,
    workers: Annotated[Optional[int], typer.Option("--workers", help="Threads per check")] = None,
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="JSON-lines report file")] = None,
    log_level: Annotated[Optional[LogLevel], typer.Option("--log-level", help="Log level")] = None,
) -> None:
    """Run the verification suite on one model or on every builtin.

    Example:
        algemech verify --model so3 --seed 42 --tol 1e-8
    """
    from algemech.cli.helpers import print_header, print_report_summary

    with handle_errors():
        settings = _setup(log_level)
        cfg = RunConfig(
            command=Command.VERIFY,
            model=model,
            seed=settings.verify.seed if seed is None else seed,
            tol=settings.verify.tol if tol is None else tol,
            samples=settings.verify.samples if samples is None else samples,
            workers=settings.verify.workers if workers is None else workers,
            output=out,
        )
        models = _resolve_models(cfg.model)
        print_header("verify", algemech.__version__, f"Models: {', '.join(m.name for m in models)}")

        reports = verify_all(models, cfg.seed, cfg.samples, cfg.tol, cfg.workers)
        print_report_summary(reports)
        if cfg.output is not None:
            count = write_jsonl(cfg.output, reports)
            console.print(f"[green][OK][/green] {count} reports written to {cfg.output}")

    if not all(r.ok for r in reports):
        raise typer.Exit(code=EXIT_CHECK_FAILED)


def _read_function_file(path: Path) -> str:
    if not path.is_file():
        raise ConfigError(f"Function file not found: {path}")
    lines = [
        line.strip()
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    if not lines:
        raise ConfigError(f"Function file {path} contains no expression")
    return " ".join(lines)


def _function_text(cfg: RunConfig) -> str:
    inline = cfg.inline_function
    if cfg.function_file is not None:
        if inline is not None:
            logger.warning("inline_overrides_file", file=str(cfg.function_file))
            console.print(
                f"[yellow]Warning:[/yellow] inline expression overrides {cfg.function_file}"
            )
            return inline
        return _read_function_file(cfg.function_file)
    assert inline is not None  # guaranteed by RunConfig validation
    return inline


def _run_dynamics(cfg: RunConfig, M: AlgebroidModel) -> Trajectory:
    assert cfg.formalism is not None and cfg.dt is not None and cfg.t_end is not None
    side = FieldDomain.ESTAR if cfg.formalism.needs_hamiltonian else FieldDomain.E
    start = parse_at(cfg.at, M, side)
    field = M.field(_function_text(cfg), side)

    if cfg.formalism == Formalism.HAMILTONIAN:
        return integrate_hamiltonian(M, field, start, cfg.dt, cfg.t_end)
    if cfg.formalism == Formalism.FORCED:
        return integrate_forced(M, field, force_from_texts(M, cfg.force), start, cfg.dt, cfg.t_end)
    if cfg.formalism == Formalism.LAGRANGIAN_TT:
        return integrate_el(M, field, start, cfg.dt, cfg.t_end, prolong_monitor=True)
    return integrate_el_prolong(M, field, start, cfg.dt, cfg.t_end)


@app.command()
def simulate(
    model: Annotated[Optional[str], typer.Option("--model", "-m", help="Model name or JSON file")] = None,
    formalism: Annotated[Optional[Formalism], typer.Option("--formalism", "-f", help="Dynamics to integrate")] = None,
    h: Annotated[Optional[str], typer.Option("--h", help="Hamiltonian over x*, xi*")] = None,
    lagrangian: Annotated[Optional[str], typer.Option("--l", help="Lagrangian over x*, y*")] = None,
    function_file: Annotated[Optional[Path], typer.Option("--function-file", help="File holding the H or L expression")] = None,
    force: Annotated[Optional[list[str]], typer.Option("--force", help="Force component over x*, xi* (repeat per fiber component)")] = None,
    at: Annotated[Optional[str], typer.Option("--at", help="Initial point, e.g. 'x=1,2;xi=0,0,1'")] = None,
    dt: Annotated[Optional[float], typer.Option("--dt", help="Step size")] = None,
    t_end: Annotated[Optional[float], typer.Option("--t-end", help="Final time")] = None,
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="Trajectory CSV file")] = None,
    profile: Annotated[Optional[str], typer.Option("--profile", "-p", help="Run profile supplying defaults")] = None,
    log_level: Annotated[Optional[LogLevel], typer.Option("--log-level", help="Log level")] = None,
) -> None:
    """Integrate a trajectory and write it as CSV.

    Example:
        algemech simulate --model so3 --formalism hamiltonian \\
            --h "0.5*(xi1^2+xi2^2/2+xi3^2/3)" --dt 1e-3 --t-end 10 --out traj.csv
    """
    from algemech.cli.helpers import print_header, print_trajectory_summary

    with handle_errors():
        _setup(log_level)
        values: dict[str, object] = {}
        if profile is not None:
            prof = load_profile(profile)
            values.update(prof.run.model_dump(exclude_none=True, exclude_defaults=True))
        overrides = {
            "model": model,
            "formalism": formalism,
            "hamiltonian": h,
            "lagrangian": lagrangian,
            "force": force or None,
            "at": at,
            "dt": dt,
            "t_end": t_end,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        if "model" not in values:
            raise ConfigError("simulate requires --model (or a profile that sets it)")

        cfg = RunConfig(command=Command.SIMULATE, function_file=function_file, output=out, **values)  # type: ignore[arg-type]
        M = resolve_model(cfg.model)
        assert cfg.formalism is not None
        print_header("simulate", algemech.__version__, f"Model: {M.name}  Formalism: {cfg.formalism.value}")

        try:
            trajectory = _run_dynamics(cfg, M)
        except (IntegrationError, SingularHessianError) as e:
            partial = e.trajectory
            if cfg.output is not None and isinstance(partial, Trajectory) and len(partial):
                partial.write_csv(cfg.output)
                console.print(f"[yellow]Partial trajectory written to {cfg.output}[/yellow]")
            raise

        if cfg.output is not None:
            trajectory.write_csv(cfg.output)
        print_trajectory_summary(trajectory.summary(), str(cfg.output) if cfg.output else None)


@app.command()
def inspect(
    model: Annotated[str, typer.Option("--model", "-m", help="Model name or JSON file")],
    at: Annotated[Optional[str], typer.Option("--at", help="Point of E*, e.g. 'x=1;xi=0,0,1'")] = None,
    seed: Annotated[int, typer.Option("--seed", help="Seed for sampled base points")] = 42,
    samples: Annotated[int, typer.Option("--samples", help="Sampled base points")] = 20,
    tol: Annotated[float, typer.Option("--tol", help="Almost-Lie tolerance")] = 1e-8,
    log_level: Annotated[Optional[LogLevel], typer.Option("--log-level", help="Log level")] = None,
) -> None:
    """Print dimensions, structure residuals, and the Lambda and Omega matrices at a point.

    Example:
        algemech inspect --model so3 --at "xi=0,0,1"
    """
    from algemech.cli.helpers import print_header, print_matrix

    with handle_errors():
        _setup(log_level)
        cfg = RunConfig(command=Command.INSPECT, model=model, at=at, seed=seed, samples=samples, tol=tol)
        M = resolve_model(cfg.model)
        print_header("inspect", algemech.__version__, f"Model: {M.name}  {M.description}".rstrip())

        points = sample_base_points(M, cfg.samples, np.random.default_rng(cfg.seed))
        al_max = max((float(np.max(np.abs(almost_lie_residual(M, x)), initial=0.0)) for x in points), default=0.0)
        jac_max = max((float(np.max(np.abs(jacobi_residual(M, x)), initial=0.0)) for x in points), default=0.0)

        console.print(f"base dimension n = {M.n}, fiber rank m = {M.m}")
        flag = "  [bold red]NOT ALMOST-LIE[/bold red]" if al_max > cfg.tol else ""
        console.print(f"almost-Lie residual max: {al_max:.3e}{flag}")
        console.print(f"Jacobi residual max: {jac_max:.3e}")
        console.print()

        p = parse_at(cfg.at, M, FieldDomain.ESTAR)
        console.print(f"at x = {p.x.tolist()}, xi = {p.fiber.tolist()}")
        labels = list(M.variables(FieldDomain.ESTAR))
        B = bivector_matrix(M, p)
        rule_gap = float(np.max(np.abs(B - bivector_from_brackets(M, p)), initial=0.0))
        console.print(f"Lambda against bracket and anchor: {rule_gap:.3e}")
        print_matrix("Lambda(dz^k, dz^l)", B, labels)
        frame = [f"Z{a + 1}" for a in range(M.m)] + [f"V{a + 1}" for a in range(M.m)]
        print_matrix("Omega_E on the {Z, V} frame", omega_matrix(M, p), frame)


@app.command()
def profiles() -> None:
    """List available run profiles."""
    available = list_available_profiles()

    if not available:
        console.print("[yellow]No profiles found[/yellow]")
        return

    console.print("[bold]Available profiles:[/bold]\n")
    for name in available:
        try:
            prof = load_profile(name)
            console.print(f"  [cyan]{name}[/cyan]")
            console.print(f"    {prof.profile.description}")
        except ConfigError:
            console.print(f"  [cyan]{name}[/cyan]")
            console.print("    (Unable to load profile)")


@app.command()
def init(
    overwrite: Annotated[bool, typer.Option("--overwrite", help="Replace an existing settings file")] = False,
) -> None:
    """Write a default settings.toml to the configuration directory."""
    with handle_errors():
        path = get_settings_path()
        if path.exists() and not overwrite:
            console.print(f"[yellow]Settings already exist at {path}[/yellow] (use --overwrite)")
            return
        written = save_app_settings(get_default_settings())
        console.print(f"[green][OK][/green] Settings written to {written}")


if __name__ == "__main__":
    app()
