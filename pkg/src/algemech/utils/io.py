"""File output and point parsing utilities."""

import csv
import math
import re
from collections.abc import Iterable, Sequence
from pathlib import Path

from algemech.core.algebroid import AlgebroidModel, PhasePoint
from algemech.core.expr import FieldDomain
from algemech.exceptions import ConfigError
from algemech.models.report import VerificationReport

_AT_PART = re.compile(r"^\s*(x|y|xi)\s*=\s*(.*?)\s*$")


def format_float(value: float) -> str:
    """Shortest decimal text that parses back to the same float.

    Examples:
        0.1 -> "0.1"
        1e-05 -> "1e-05"
        nan -> "nan"
    """
    v = float(value)
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> int:
    """Write a header row and float rows with round-trip formatting.

    Args:
        path: Destination file; parent directories are created
        header: Column names
        rows: Numeric rows, one value per column

    Returns:
        Number of data rows written
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) for v in row])
            count += 1
    return count


def write_jsonl(path: Path, reports: Iterable[VerificationReport]) -> int:
    """Write one JSON object per report line.

    Returns:
        Number of reports written
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for report in reports:
            f.write(report.to_json_line() + "\n")
            count += 1
    return count


def _parse_values(text: str, key: str) -> list[float]:
    if not text:
        return []
    try:
        values = [float(item) for item in text.split(",")]
    except ValueError as e:
        raise ConfigError(f"--at: could not read numbers for '{key}': {text!r}") from e
    if not all(math.isfinite(v) for v in values):
        raise ConfigError(f"--at: values for '{key}' must be finite")
    return values


def parse_at(text: str | None, model: AlgebroidModel, side: FieldDomain) -> PhasePoint:
    """Parse a point such as ``"x=1,2;xi=0,0,1"``.

    Missing parts default to x = 0 and fiber = 1.

    Args:
        text: Point text, or None for the default point
        model: Model fixing the dimensions
        side: E (key ``y``) or E* (key ``xi``)

    Raises:
        ConfigError: On unknown keys, a fiber key for the other side, or wrong lengths
    """
    x = [0.0] * model.n
    fiber = [1.0] * model.m
    fiber_key = "y" if side == FieldDomain.E else "xi"
    seen: set[str] = set()

    for part in (text or "").split(";"):
        if not part.strip():
            continue
        match = _AT_PART.match(part)
        if match is None:
            raise ConfigError(f"--at: expected 'x=...', 'y=...' or 'xi=...', got {part.strip()!r}")
        key, raw = match.group(1), match.group(2)
        if key in seen:
            raise ConfigError(f"--at: '{key}' given twice")
        seen.add(key)
        values = _parse_values(raw, key)
        if key == "x":
            if len(values) != model.n:
                raise ConfigError(f"--at: model '{model.name}' needs {model.n} x values, got {len(values)}")
            x = values
        elif key == fiber_key:
            if len(values) != model.m:
                raise ConfigError(f"--at: model '{model.name}' needs {model.m} {key} values, got {len(values)}")
            fiber = values
        else:
            raise ConfigError(f"--at: '{key}' does not belong to a point on {side.value}")

    return PhasePoint(side, x, fiber)
