"""Command-line interface for dirac-spectra."""

import logging
import sys
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from dataclasses import dataclass
from importlib.metadata import version as pkg_version
from pathlib import Path

import click
from numpy.typing import ArrayLike
from pydantic import ValidationError

from dirac_spectra.config import Settings, get_settings
from dirac_spectra.errors import (
    CompositionError,
    CurveFormatError,
    DiracSpectraError,
    GridError,
    HermiteOrderError,
    PlanValidationError,
    RemovedIndexError,
    SpectrumCollisionError,
    UnsupportedBoundaryError,
)
from dirac_spectra.models.grid import Grid, VectorTrajectory
from dirac_spectra.models.plan import EigenIndex
from dirac_spectra.models.spectral import Boundary, PotentialField
from dirac_spectra.spectral import model
from dirac_spectra.spectral.glcore import PerturbedOperator, potential_field, synthesize
from dirac_spectra.spectral.verify import spectrum_scan, verify_plan
from dirac_spectra.storage.curves import (
    POTENTIAL_COLUMNS,
    SCAN_COLUMNS,
    TRAJECTORY_COLUMNS,
    format_csv,
    format_text,
    read_potential,
    write_curve,
)
from dirac_spectra.storage.plans import PlanDocument, load_plan, plan_echo

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_FAILED_CHECK = 1
EXIT_USAGE = 2
EXIT_INVALID_PLAN = 3
EXIT_SYNTHESIS = 4

BOUNDARY_CHOICE = click.Choice([b.value for b in Boundary])

# Negative numbers such as -1 or -3.5 are positional values, not options.
NUMERIC_ARGS = {"ignore_unknown_options": True}


@dataclass
class CliOptions:
    """Global options shared by every command."""

    settings: Settings
    grid_max: float | None
    grid_step: float | None
    output_format: str
    out: Path | None
    tol: float | None

    def grid(self, document: PlanDocument | None = None) -> Grid:
        """Grid from the flags, then the plan file, then the settings."""
        planned = document.grid if document is not None else None
        x_max = self.grid_max
        if x_max is None:
            x_max = planned.x_max if planned is not None else self.settings.grid_max
        step = self.grid_step
        if step is None:
            step = planned.step if planned is not None else self.settings.grid_step
        return Grid.uniform(x_max, step)

    @property
    def verify_tol(self) -> float:
        """Tolerance for verification checks."""
        return self.tol if self.tol is not None else self.settings.verify_tol


class EigenIndexParam(click.ParamType):
    """Integer model index, or the mu literal of an added eigenvalue."""

    name = "index"

    def convert(
        self, value: object, param: click.Parameter | None, ctx: click.Context | None
    ) -> EigenIndex:
        if isinstance(value, int | float):
            return value
        text = str(value)
        try:
            return int(text)
        except ValueError:
            pass
        try:
            return float(text)
        except ValueError:
            self.fail(f"{text!r} is neither an integer index nor a real mu", param, ctx)


EIGEN_INDEX = EigenIndexParam()


def _configure_logging(settings: Settings, verbose: bool) -> None:
    """Log to stderr so curves on stdout stay clean."""
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format=LOG_FORMAT,
    )
    if settings.log_file is not None:
        handler = logging.FileHandler(settings.log_file, encoding="utf-8")
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logging.getLogger().addHandler(handler)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Translate library errors into exit codes."""
    try:
        yield
    except (GridError, RemovedIndexError, HermiteOrderError, UnsupportedBoundaryError) as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_USAGE)
    except (
        PlanValidationError,
        CompositionError,
        SpectrumCollisionError,
        CurveFormatError,
        ValidationError,
    ) as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_INVALID_PLAN)
    except DiracSpectraError as e:
        # synthesis and integration failures
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_SYNTHESIS)


def _emit(options: CliOptions, columns: Mapping[str, ArrayLike]) -> None:
    """Write columns to --out or to stdout in the selected format."""
    target = options.out
    if options.output_format == "text":
        text = format_text(columns)
        if target is None:
            click.echo(text, nl=False)
        else:
            target.write_text(text, encoding="utf-8", newline="\n")
        return
    if target is None:
        click.echo(format_csv(columns), nl=False)
    else:
        write_curve(target, columns)


def _synthesize(options: CliOptions, document: PlanDocument) -> PerturbedOperator:
    settings = options.settings
    return synthesize(
        document.to_plan(),
        options.grid(document),
        rtol=settings.cauchy_rtol,
        atol=settings.cauchy_atol,
        singular_floor=settings.singular_floor,
    )


def _trajectory_columns(trajectory: VectorTrajectory) -> dict[str, ArrayLike]:
    return dict(
        zip(
            TRAJECTORY_COLUMNS,
            (trajectory.grid.nodes, trajectory.component1, trajectory.component2),
            strict=True,
        )
    )


def _file_label(index: EigenIndex) -> str:
    return str(index) if isinstance(index, int) else f"mu{index:g}"


@click.group()
@click.version_option(version=pkg_version("dirac-spectra"))
@click.option("--grid-max", type=float, default=None, help="Right end of the half-axis grid")
@click.option("--grid-step", type=float, default=None, help="Grid spacing")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["csv", "text"]),
    default="csv",
    help="Tabular output format",
)
@click.option(
    "--out",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the main output to this file instead of stdout",
)
@click.option("--tol", type=float, default=None, help="Verification tolerance")
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.pass_context
def cli(
    ctx: click.Context,
    grid_max: float | None,
    grid_step: float | None,
    output_format: str,
    out: Path | None,
    tol: float | None,
    verbose: bool,
) -> None:
    """Dirac Spectra - spectral data of the Dirac operator with linear potential."""
    try:
        settings = get_settings()
    except ValidationError as e:
        click.echo(f"Error: Failed to load settings: {e}", err=True)
        sys.exit(EXIT_INVALID_PLAN)
    _configure_logging(settings, verbose)
    if tol is not None and not tol > 0:
        raise click.BadParameter(f"must be positive, got {tol}", param_hint="--tol")
    ctx.obj = CliOptions(settings, grid_max, grid_step, output_format, out, tol)


@cli.command(context_settings=NUMERIC_ARGS)
@click.argument("boundary", type=BOUNDARY_CHOICE)
@click.argument("k_min", type=int)
@click.argument("k_max", type=int)
@click.pass_obj
def spectrum(options: CliOptions, boundary: str, k_min: int, k_max: int) -> None:
    """Print model eigenvalues and norming constants for K_MIN <= k <= K_MAX."""
    if k_min > k_max:
        raise click.BadParameter(f"K_MIN={k_min} exceeds K_MAX={k_max}", param_hint="K_MIN")
    bc = Boundary(boundary)
    indices = list(range(k_min, k_max + 1))
    with _exit_codes():
        points = [
            model.norming_constant(k, bc, tol=options.settings.quad_tol) for k in indices
        ]
    _emit(
        options,
        {
            "k": indices,
            "lambda": [point.eigenvalue for point in points],
            "norming": [point.norming for point in points],
        },
    )


@cli.command(context_settings=NUMERIC_ARGS)
@click.argument("index", type=EIGEN_INDEX)
@click.option(
    "--plan",
    "plan_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Export the perturbed eigenfunction of this plan",
)
@click.option(
    "--boundary",
    type=BOUNDARY_CHOICE,
    default=Boundary.ALPHA_0.value,
    help="Model boundary condition (ignored with --plan)",
)
@click.pass_obj
def eigenfunction(
    options: CliOptions, index: EigenIndex, plan_path: Path | None, boundary: str
) -> None:
    """Export an eigenfunction curve (x, y1, y2).

    INDEX is a model index k, or the mu of an eigenvalue the plan adds.
    """
    with _exit_codes():
        if plan_path is None:
            if not isinstance(index, int):
                raise click.BadParameter(
                    f"model eigenfunctions take an integer index, got {index}",
                    param_hint="INDEX",
                )
            trajectory = model.model_eigenfunction(index, Boundary(boundary), options.grid())
        else:
            op = _synthesize(options, load_plan(plan_path))
            trajectory = op.eigenfunction(index)
    _emit(options, _trajectory_columns(trajectory))


@cli.command()
@click.argument("plan_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--eigenfunction",
    "-e",
    "indices",
    type=EIGEN_INDEX,
    multiple=True,
    help="Also export this eigenfunction (repeatable)",
)
@click.pass_obj
def perturb(options: CliOptions, plan_path: Path, indices: tuple[EigenIndex, ...]) -> None:
    """Synthesize the potential of a plan file.

    Writes the x,p,q curve to --out (or stdout). Eigenfunction curves and the
    plan echo are written next to it as STEM.eig_INDEX.csv and STEM.plan.json.
    """
    with _exit_codes():
        op = _synthesize(options, load_plan(plan_path))
        _emit(
            options,
            dict(zip(POTENTIAL_COLUMNS, (op.grid.nodes, op.p_values, op.q_values), strict=True)),
        )
        stem = (options.out or plan_path).with_suffix("")
        for index in indices:
            trajectory = op.eigenfunction(index)
            path = stem.with_name(f"{stem.name}.eig_{_file_label(index)}.csv")
            write_curve(path, _trajectory_columns(trajectory))
            logger.info("Wrote eigenfunction %s to %s", index, path)
        bound = model.index_window(options.settings.verify_window)
        echo = plan_echo(op, -bound, bound)
        echo_path = stem.with_name(f"{stem.name}.plan.json")
        echo_path.write_text(echo.model_dump_json(indent=2) + "\n", encoding="utf-8", newline="\n")
        logger.info("Wrote plan echo to %s", echo_path)


@cli.command()
@click.argument("plan_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--report",
    "report_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Also write the report as JSON",
)
@click.option(
    "--potential",
    "potential_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Check a replayed x,p,q curve instead of the synthesized potential",
)
@click.pass_obj
def verify(
    options: CliOptions, plan_path: Path, report_path: Path | None, potential_path: Path | None
) -> None:
    """Run every check against a plan; exit 1 if any check fails."""
    settings = options.settings
    with _exit_codes():
        op = _synthesize(options, load_plan(plan_path))
        replayed = read_potential(potential_path) if potential_path is not None else None
        report = verify_plan(
            op,
            tol=options.verify_tol,
            window=settings.verify_window,
            potential=replayed,
            x_scan=min(settings.scan_x_max, op.grid.x_max),
            scan_rtol=settings.scan_rtol,
            scan_depth=settings.scan_depth,
            lambda_tol=settings.scan_lambda_tol,
        )
    rendered = report.render() + "\n"
    if options.out is None:
        click.echo(rendered, nl=False)
    else:
        options.out.write_text(rendered, encoding="utf-8", newline="\n")
    if report_path is not None:
        report_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    if not report.passed:
        for check in report.failures():
            click.echo(f"Error: check {check.name} failed", err=True)
        sys.exit(EXIT_FAILED_CHECK)


@cli.command(context_settings=NUMERIC_ARGS)
@click.argument("target")
@click.argument("lo", type=float)
@click.argument("hi", type=float)
@click.argument("samples", type=int)
@click.option(
    "--boundary",
    type=BOUNDARY_CHOICE,
    default=Boundary.ALPHA_0.value,
    help="Boundary condition when TARGET is 'model'",
)
@click.pass_obj
def scan(
    options: CliOptions, target: str, lo: float, hi: float, samples: int, boundary: str
) -> None:
    """Shooting scan of [LO, HI]; TARGET is a plan file or 'model'.

    The (lambda, miss) curve goes to --out (or stdout); detected eigenvalues
    are listed on stderr.
    """
    settings = options.settings
    if not lo < hi:
        raise click.BadParameter(f"needs LO < HI, got LO={lo}, HI={hi}", param_hint="LO")
    with _exit_codes():
        potential: PotentialField
        alpha: Boundary
        x_scan = settings.scan_x_max
        if target == "model":
            potential, alpha = PotentialField.model(), Boundary(boundary)
        else:
            plan_path = Path(target)
            if not plan_path.is_file():
                raise click.BadParameter(
                    f"{target!r} is neither 'model' nor a plan file", param_hint="TARGET"
                )
            op = _synthesize(options, load_plan(plan_path))
            potential, alpha = potential_field(op), op.bc
            x_scan = min(x_scan, op.grid.x_max)
        result = spectrum_scan(
            potential,
            alpha,
            lo,
            hi,
            samples,
            x_scan=x_scan,
            rtol=settings.scan_rtol,
            depth=settings.scan_depth,
            lambda_tol=settings.scan_lambda_tol,
        )
    _emit(options, dict(zip(SCAN_COLUMNS, (result.lambdas, result.miss_values), strict=True)))
    detected = ", ".join(f"{lam:.10g}" for lam in result.detected)
    click.echo(f"detected: {detected}" if detected else "detected: none", err=True)


def main() -> None:
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
