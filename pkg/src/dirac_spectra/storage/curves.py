"""Plot-ready curve files: CSV with a header row and 17 significant digits."""

import io
import logging
from collections.abc import Mapping
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike
from scipy.interpolate import CubicSpline

from dirac_spectra.errors import CurveFormatError
from dirac_spectra.models.spectral import PotentialField

logger = logging.getLogger(__name__)

CSV_FORMAT = "%.17g"
TEXT_WIDTH = 24

POTENTIAL_COLUMNS = ("x", "p", "q")
TRAJECTORY_COLUMNS = ("x", "y1", "y2")
SCAN_COLUMNS = ("lambda", "miss")


def format_csv(columns: Mapping[str, ArrayLike]) -> str:
    """Render equal-length columns as CSV text."""
    names = list(columns)
    table = np.column_stack([np.asarray(columns[name], dtype=np.float64) for name in names])
    buffer = io.StringIO()
    np.savetxt(
        buffer,
        table,
        fmt=CSV_FORMAT,
        delimiter=",",
        newline="\n",
        header=",".join(names),
        comments="",
    )
    return buffer.getvalue()


def format_text(columns: Mapping[str, ArrayLike]) -> str:
    """Render columns as a right-aligned text table."""
    names = list(columns)
    arrays = [np.atleast_1d(np.asarray(columns[name])) for name in names]
    lines = ["".join(name.rjust(TEXT_WIDTH) for name in names)]
    for row in zip(*arrays, strict=True):
        lines.append("".join(_cell(value).rjust(TEXT_WIDTH) for value in row))
    return "\n".join(lines) + "\n"


def _cell(value: object) -> str:
    if isinstance(value, (int, np.integer)):
        return str(value)
    return f"{float(value):.15g}"  # type: ignore[arg-type]


def write_curve(path: Path, columns: Mapping[str, ArrayLike]) -> None:
    """Write columns to a CSV file with Unix line endings."""
    path.write_text(format_csv(columns), encoding="utf-8", newline="\n")
    logger.debug("Wrote %s (%s)", path, ",".join(columns))


def read_curve(path: Path, expected: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read a CSV curve, checking the header.

    Raises:
        CurveFormatError: If the file is unreadable or has other columns
    """
    try:
        with path.open(encoding="utf-8") as handle:
            header = handle.readline().strip()
            table = np.loadtxt(handle, delimiter=",", ndmin=2)
    except (OSError, ValueError) as e:
        raise CurveFormatError(f"Cannot read curve {path}: {e}") from e
    names = tuple(name.strip() for name in header.split(","))
    if names != expected:
        raise CurveFormatError(f"Curve {path} has columns {names}, expected {expected}")
    if table.shape[1] != len(expected):
        raise CurveFormatError(f"Curve {path} rows have {table.shape[1]} values")
    return {name: table[:, i] for i, name in enumerate(names)}


def read_potential(path: Path) -> PotentialField:
    """Replay an x,p,q curve as a cubic-spline potential.

    Raises:
        CurveFormatError: If the file is not a valid potential curve
    """
    columns = read_curve(path, POTENTIAL_COLUMNS)
    x = columns["x"]
    if x.size < 4 or np.any(np.diff(x) <= 0):
        raise CurveFormatError(f"Curve {path} needs at least 4 rows with increasing x")
    p_spline = CubicSpline(x, columns["p"])
    q_spline = CubicSpline(x, columns["q"])
    logger.info("Replaying potential from %s (%d rows)", path, x.size)
    return PotentialField(
        p=lambda s: np.asarray(p_spline(s), dtype=np.float64),
        q=lambda s: np.asarray(q_spline(s), dtype=np.float64),
        description=f"replayed:{path.name}",
    )
