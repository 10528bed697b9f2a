"""Rich rendering helpers for the CLI."""

from collections.abc import Sequence

import numpy as np
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from algemech.models.report import Outcome, VerificationReport
from algemech.utils.io import format_float

console = Console()

OUTCOME_STYLES = {
    Outcome.PASS: "green",
    Outcome.FAIL: "bold red",
    Outcome.EXPECTED_FAIL: "yellow",
    Outcome.UNEXPECTED_PASS: "bold magenta",
}


def print_header(title: str, version: str, subtitle: str = "") -> None:
    """Print the command banner."""
    console.print(f"[bold blue]AlgeMech v{version}[/bold blue] - {title}")
    if subtitle:
        console.print(escape(subtitle))
    console.print()


def report_table(reports: Sequence[VerificationReport]) -> Table:
    table = Table(title="Verification reports", show_lines=False)
    table.add_column("Check", style="cyan")
    table.add_column("Model")
    table.add_column("Samples", justify="right")
    table.add_column("Skipped", justify="right")
    table.add_column("Max residual", justify="right")
    table.add_column("Tol", justify="right")
    table.add_column("Outcome")

    for r in reports:
        style = OUTCOME_STYLES[r.outcome]
        table.add_row(
            r.check,
            r.model,
            str(r.samples),
            str(r.skipped),
            f"{r.max_residual:.3e}",
            f"{r.tol:.1e}",
            f"[{style}]{r.outcome.value}[/{style}]",
        )
    return table


def print_report_summary(reports: Sequence[VerificationReport]) -> None:
    """Print the report table and a one-line tally."""
    console.print(report_table(reports))
    counts = {o: sum(1 for r in reports if r.outcome == o) for o in Outcome}
    console.print(
        f"\n[green]{counts[Outcome.PASS]} passed[/green], "
        f"[yellow]{counts[Outcome.EXPECTED_FAIL]} expected failures[/yellow], "
        f"[red]{counts[Outcome.FAIL]} failed[/red], "
        f"[magenta]{counts[Outcome.UNEXPECTED_PASS]} unexpected passes[/magenta]"
    )


def matrix_table(
    title: str, matrix: np.ndarray, row_labels: Sequence[str], col_labels: Sequence[str]
) -> Table:
    table = Table(title=title)
    table.add_column("", style="cyan")
    for label in col_labels:
        table.add_column(label, justify="right")
    for label, row in zip(row_labels, matrix, strict=True):
        table.add_row(label, *(format_float(v) for v in row))
    return table


def print_matrix(
    title: str, matrix: np.ndarray, row_labels: Sequence[str], col_labels: Sequence[str] | None = None
) -> None:
    if matrix.size == 0:
        console.print(f"[dim]{title}: empty[/dim]")
        return
    console.print(matrix_table(title, matrix, row_labels, col_labels or row_labels))


def print_trajectory_summary(summary: dict[str, float], output: str | None) -> None:
    """Print the final monitors of a run."""
    table = Table(title="Trajectory summary")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    for key, value in summary.items():
        table.add_row(key, str(int(value)) if key == "steps" else f"{value:.6e}")
    console.print(table)
    if "energy_drift" in summary:
        console.print(f"energy drift: {summary['energy_drift']:.3e}")
    if output:
        console.print(f"[green][OK][/green] Trajectory written to {output}")
