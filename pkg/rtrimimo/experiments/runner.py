"""Experiment registry and runner."""

import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

from rtrimimo.config import RTRIMimoConfig
from rtrimimo.estimation import empirical_mse, normalized_mse, training_gain
from rtrimimo.experiments.output import manifest_name, write_csv, write_manifest, write_plot
from rtrimimo.experiments.validation import ValidationSuite
from rtrimimo.models import (
    ExperimentKind,
    ExperimentOutcome,
    ExperimentSpec,
    PowerMode,
    db_to_linear,
)
from rtrimimo.optimize import optimize_training_length, relative_rate_gain
from rtrimimo.streams import RandomSource

logger = logging.getLogger(__name__)

Rows = List[Dict[str, Any]]
ExperimentFunction = Callable[["ExperimentRunner"], Rows]


class ExperimentDefinition(NamedTuple):
    """How one experiment kind is computed and written."""

    function: ExperimentFunction
    columns: Tuple[str, ...]
    plot_columns: Tuple[str, ...]
    title: str
    log_y: bool = False


class ExperimentRegistry:
    """Registry mapping experiment kinds to their definitions."""

    _experiments: Dict[ExperimentKind, ExperimentDefinition] = {}

    @classmethod
    def register(
        cls,
        kind: ExperimentKind,
        columns: Tuple[str, ...],
        plot_columns: Tuple[str, ...] = (),
        title: str = "",
        log_y: bool = False,
    ) -> Callable[[ExperimentFunction], ExperimentFunction]:
        """Decorator registering an experiment function for ``kind``."""

        def decorator(function: ExperimentFunction) -> ExperimentFunction:
            cls._experiments[kind] = ExperimentDefinition(function, columns, plot_columns, title, log_y)
            return function

        return decorator

    @classmethod
    def get(cls, kind: ExperimentKind) -> ExperimentDefinition:
        return cls._experiments[ExperimentKind(kind)]

    @classmethod
    def kinds(cls) -> List[ExperimentKind]:
        return list(cls._experiments)


def parse_snr_range(text: str) -> List[float]:
    """
    Parse an inclusive ``start:step:stop`` range in dB.

    Raises:
        ValueError: If the text is malformed or the step does not advance
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:step:stop, got {text!r}")
    start, step, stop = (float(part) for part in parts)
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    # a trailing partial step is dropped; the grid never passes stop
    count = int(math.floor((stop - start) / step + 1e-9))
    if count < 0:
        raise ValueError(f"stop ({stop}) is below start ({start})")
    # rounded so that 0.1 steps print as typed
    return [round(start + i * step, 10) for i in range(count + 1)]


def parse_delta_list(text: str) -> List[float]:
    """Parse a comma-separated list of impairment levels."""
    return [float(part) for part in text.split(",") if part.strip()]


class ExperimentRunner:
    """
    Runs one ExperimentSpec and writes its CSV, manifest and optional plot.

    Each (delta, snr) grid point draws from its own stream derived from the
    spec seed, the experiment kind and the point index.
    """

    def __init__(self, spec: ExperimentSpec, settings: Optional[RTRIMimoConfig] = None):
        self.spec = spec
        self.settings = settings or RTRIMimoConfig()

    @property
    def max_workers(self) -> int:
        return self.settings.simulation.max_workers

    def grid(self) -> List[Tuple[int, float, float]]:
        """(point index, delta, snr_db) in CSV row order."""
        points = []
        for delta in self.spec.delta_list:
            for snr_db in self.spec.snr_grid_db:
                points.append((len(points), delta, snr_db))
        return points

    def rng(self, index: int) -> RandomSource:
        return RandomSource.for_experiment(self.spec.seed, self.spec.kind.value, index)

    def run(self, version: Optional[str] = None) -> ExperimentOutcome:
        """
        Execute the experiment and write its files under ``spec.output_path``.

        Returns:
            ExperimentOutcome naming the written files

        Raises:
            OutputError: If a file cannot be written
        """
        if version is None:
            from rtrimimo import __version__

            version = __version__

        kind = self.spec.kind
        definition = ExperimentRegistry.get(kind)
        logger.info(f"Running {kind.value} (seed={self.spec.seed}, trials={self.spec.trials})")

        rows = definition.function(self)
        passed = all(row["status"] == "pass" for row in rows) if kind == ExperimentKind.VALIDATE else True

        out_dir = Path(self.spec.output_path)
        manifest = manifest_name(kind.value)
        csv_path = write_csv(
            out_dir / f"{kind.value}.csv",
            definition.columns,
            rows,
            manifest,
            self.settings.output.significant_digits,
        )
        manifest_path = write_manifest(
            out_dir / manifest,
            self.spec,
            self.settings,
            version,
            passed if kind == ExperimentKind.VALIDATE else None,
        )

        plot_path = None
        if (self.spec.plot or self.settings.output.plot) and definition.plot_columns:
            plot_path = write_plot(
                out_dir / f"{kind.value}.svg",
                rows,
                definition.plot_columns,
                definition.title,
                definition.log_y,
            )

        logger.info(f"Finished {kind.value}: {len(rows)} rows")
        return ExperimentOutcome(
            kind=kind,
            csv_path=str(csv_path),
            manifest_path=str(manifest_path),
            plot_path=str(plot_path) if plot_path else None,
            rows=rows,
            passed=passed,
        )


def run(spec: ExperimentSpec, settings: Optional[RTRIMimoConfig] = None) -> ExperimentOutcome:
    """Run ``spec`` with ``settings`` (defaults: environment)."""
    return ExperimentRunner(spec, settings).run()


# ============================================================================
# Experiments
# ============================================================================


@ExperimentRegistry.register(
    ExperimentKind.MSE_SWEEP,
    columns=("snr_db", "delta", "mse_closed_form", "mse_empirical", "std_err"),
    plot_columns=("mse_closed_form", "mse_empirical"),
    title="Normalized MSE of the LMMSE estimate",
    log_y=True,
)
def mse_sweep(runner: ExperimentRunner) -> Rows:
    """Closed-form and Monte-Carlo MSE against the training SNR."""
    spec = runner.spec
    t_p = spec.training_length
    rows = []
    for index, delta, snr_db in runner.grid():
        rho_p = db_to_linear(snr_db)
        mean, std_err = empirical_mse(
            spec.config.at(delta=delta),
            t_p,
            rho_p,
            spec.trials,
            runner.rng(index),
            max_workers=runner.max_workers,
            block_size=runner.settings.simulation.block_size,
        )
        rows.append(
            {
                "snr_db": snr_db,
                "delta": delta,
                "mse_closed_form": normalized_mse(training_gain(rho_p, t_p, spec.config.n_tx, delta)),
                "mse_empirical": mean,
                "std_err": std_err,
            }
        )
    return rows


def _training_length_rows(runner: ExperimentRunner, mode: PowerMode) -> Rows:
    rows = []
    for _, delta, snr_db in runner.grid():
        design = optimize_training_length(
            runner.spec.config.at(snr=db_to_linear(snr_db), delta=delta),
            mode,
            max_workers=runner.max_workers,
        )
        rows.append(
            {
                "snr_db": snr_db,
                "delta": delta,
                "t_p_opt": design.t_p,
                "alpha": design.alpha,
                "rate_bits": design.rate.bits_per_use,
            }
        )
    return rows


@ExperimentRegistry.register(
    ExperimentKind.OPTIMAL_TP,
    columns=("snr_db", "delta", "t_p_opt", "alpha", "rate_bits"),
    plot_columns=("t_p_opt",),
    title="Optimal training length (joint power allocation)",
)
def optimal_tp(runner: ExperimentRunner) -> Rows:
    return _training_length_rows(runner, PowerMode.JOINT_POWER)


@ExperimentRegistry.register(
    ExperimentKind.EQUAL_POWER_TP,
    columns=("snr_db", "delta", "t_p_opt", "alpha", "rate_bits"),
    plot_columns=("t_p_opt",),
    title="Optimal training length (equal power)",
)
def equal_power_tp(runner: ExperimentRunner) -> Rows:
    return _training_length_rows(runner, PowerMode.EQUAL_POWER)


@ExperimentRegistry.register(
    ExperimentKind.RATE_SWEEP,
    columns=("snr_db", "delta", "rate_bits"),
    plot_columns=("rate_bits",),
    title="Achievable rate with optimized power and training length",
)
def rate_sweep(runner: ExperimentRunner) -> Rows:
    """Rate at the jointly optimized alpha and training length."""
    return [
        {"snr_db": row["snr_db"], "delta": row["delta"], "rate_bits": row["rate_bits"]}
        for row in _training_length_rows(runner, PowerMode.JOINT_POWER)
    ]


@ExperimentRegistry.register(
    ExperimentKind.RATE_GAIN,
    columns=("snr_db", "delta", "gain_percent"),
    plot_columns=("gain_percent",),
    title="Relative rate gain of the optimal training length",
)
def rate_gain(runner: ExperimentRunner) -> Rows:
    rows = []
    for _, delta, snr_db in runner.grid():
        gain = relative_rate_gain(runner.spec.config.at(delta=delta), db_to_linear(snr_db))
        rows.append({"snr_db": snr_db, "delta": delta, "gain_percent": gain})
    return rows


@ExperimentRegistry.register(
    ExperimentKind.VALIDATE,
    columns=("property", "status", "measured", "bound"),
)
def validate(runner: ExperimentRunner) -> Rows:
    records = ValidationSuite(runner.spec, runner.settings).run()
    return [
        {
            "property": record.name,
            "status": record.status.value,
            "measured": record.measured,
            "bound": record.bound,
            "detail": record.detail,
        }
        for record in records
    ]
