"""Command-line interface for rtrimimo."""

import functools
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar

import click
from rich import print as rprint
from rich.console import Console
from rich.table import Table

from rtrimimo import __version__
from rtrimimo.config import RTRIMimoConfig, load_experiment_file
from rtrimimo.experiments import ExperimentRegistry, ExperimentRunner, parse_delta_list, parse_snr_range
from rtrimimo.experiments.output import format_value
from rtrimimo.models import ExperimentKind, ExperimentOutcome, ExperimentSpec

console = Console()

F = TypeVar("F", bound=Callable[..., Any])


def _snr_callback(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return parse_snr_range(value)
    except ValueError as e:
        raise click.BadParameter(str(e))


def _delta_callback(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return parse_delta_list(value)
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated numbers: {e}")


def experiment_options(f: F) -> F:
    """Options shared by every experiment subcommand."""
    options = [
        click.option("--config", "-c", help="Path to JSON/YAML experiment file"),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), help="Root seed (u64)"),
        click.option("--trials", type=click.IntRange(min=1), help="Monte-Carlo trials per point"),
        click.option("--out", "out", help="Output directory"),
        click.option("--plot", is_flag=True, default=None, help="Also write SVG plots"),
        click.option("--snr-db", callback=_snr_callback, help="SNR grid start:step:stop in dB"),
        click.option("--delta", callback=_delta_callback, help="Impairment levels, e.g. 0,0.08,0.175"),
        click.option("--workers", "-w", type=click.IntRange(min=1), help="Number of parallel workers"),
        click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def build_spec(
    kind: ExperimentKind,
    config: Optional[str],
    overrides: Dict[str, Any],
) -> Tuple[ExperimentSpec, RTRIMimoConfig]:
    """
    Merge an optional experiment file with CLI overrides.

    Returns:
        Tuple of (validated spec, runtime settings)
    """
    if config:
        data, settings = load_experiment_file(config)
    else:
        data, settings = {}, RTRIMimoConfig.load()

    data["kind"] = kind.value
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    return ExperimentSpec.parse(data), settings


def _print_outcome(outcome: ExperimentOutcome) -> None:
    definition = ExperimentRegistry.get(outcome.kind)
    table = Table(title=outcome.kind.value)
    for column in definition.columns:
        justify = "left" if column in ("property", "status") else "right"
        table.add_column(column, justify=justify, style="cyan" if column == "property" else None)

    for row in outcome.rows:
        cells = [format_value(row[column], 6) for column in definition.columns]
        if outcome.kind == ExperimentKind.VALIDATE:
            color = "green" if row["status"] == "pass" else "red"
            cells[1] = f"[{color}]{cells[1]}[/{color}]"
        table.add_row(*cells)

    console.print(table)
    rprint(f"[green]✓[/green] Results: {outcome.csv_path}")
    rprint(f"[green]✓[/green] Manifest: {outcome.manifest_path}")
    if outcome.plot_path:
        rprint(f"[green]✓[/green] Plot: {outcome.plot_path}")


def _run_experiment(kind: ExperimentKind, options: Dict[str, Any]) -> None:
    _configure_logging(options.pop("verbose", False))
    config = options.pop("config", None)
    workers = options.pop("workers", None)
    out = options.pop("out", None)
    options["output_path"] = out
    options["snr_grid_db"] = options.pop("snr_db", None)
    options["delta_list"] = options.pop("delta", None)
    if not options.get("plot"):
        options["plot"] = None

    try:
        spec, settings = build_spec(kind, config, options)
        if workers is not None:
            settings.simulation.max_workers = workers

        with console.status(f"[bold blue]Running {kind.value}..."):
            outcome = ExperimentRunner(spec, settings).run(__version__)

        _print_outcome(outcome)

    except Exception as e:
        rprint(f"[red]✗[/red] {kind.value} failed: {e}")
        sys.exit(1)

    if not outcome.passed:
        failed = [row["property"] for row in outcome.rows if row["status"] != "pass"]
        rprint(f"[red]✗[/red] {len(failed)} validation propert{'y' if len(failed) == 1 else 'ies'} failed: "
               f"{', '.join(failed)}")
        sys.exit(1)


def experiment_command(kind: ExperimentKind) -> Callable[[F], Callable[..., None]]:
    """Wrap a subcommand body so it runs experiment ``kind``."""

    def decorator(f: F) -> Callable[..., None]:
        @functools.wraps(f)
        def wrapper(**options: Any) -> None:
            _run_experiment(kind, options)

        return wrapper

    return decorator


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """rtrimimo - Training-based MIMO under residual transmit RF impairments."""
    pass


@main.command("mse-sweep")
@experiment_options
@click.option("--tp", "t_p", type=click.IntRange(min=1), help="Training length (default: n_tx)")
@experiment_command(ExperimentKind.MSE_SWEEP)
def mse_sweep(**options: Any) -> None:
    """Closed-form and Monte-Carlo channel-estimation MSE against SNR.

    Examples:

        # Default 4x4 link, delta in {0, 0.08, 0.175}
        rtrimimo mse-sweep --out results

        # Longer training, fewer trials
        rtrimimo mse-sweep --tp 8 --trials 20000
    """


@main.command("optimal-tp")
@experiment_options
@experiment_command(ExperimentKind.OPTIMAL_TP)
def optimal_tp(**options: Any) -> None:
    """Optimal training length with optimal power allocation."""


@main.command("rate-sweep")
@experiment_options
@experiment_command(ExperimentKind.RATE_SWEEP)
def rate_sweep(**options: Any) -> None:
    """Achievable rate with optimized power allocation and training length."""


@main.command("rate-gain")
@experiment_options
@experiment_command(ExperimentKind.RATE_GAIN)
def rate_gain(**options: Any) -> None:
    """Relative rate gain of the optimal training length over t_p = n_tx."""


@main.command("equal-power-tp")
@experiment_options
@experiment_command(ExperimentKind.EQUAL_POWER_TP)
def equal_power_tp(**options: Any) -> None:
    """Optimal training length when pilots and data share the same power."""


@main.command()
@experiment_options
@experiment_command(ExperimentKind.VALIDATE)
def validate(**options: Any) -> None:
    """Run the closed-form versus oracle validation suite.

    Exits with a nonzero status if any property fails.

    Examples:

        rtrimimo validate --seed 1 --trials 100000 --workers 8
    """


if __name__ == "__main__":
    main()
