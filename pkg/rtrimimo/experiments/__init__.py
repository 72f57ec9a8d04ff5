"""Experiment harness: figure-data sweeps and the validation suite."""

from rtrimimo.experiments.runner import (
    ExperimentRegistry,
    ExperimentRunner,
    parse_delta_list,
    parse_snr_range,
    run,
)
from rtrimimo.experiments.validation import ValidationSuite

__all__ = [
    "ExperimentRegistry",
    "ExperimentRunner",
    "ValidationSuite",
    "parse_delta_list",
    "parse_snr_range",
    "run",
]
