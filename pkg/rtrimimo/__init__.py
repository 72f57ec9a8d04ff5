"""rtrimimo - Training-based MIMO under residual transmit RF impairments."""

from rtrimimo.models import (
    ChannelEstimate,
    EffectiveSnr,
    ExperimentKind,
    ExperimentOutcome,
    ExperimentSpec,
    LinkConfig,
    PowerMode,
    RateMethod,
    RateResult,
    ResourceSplit,
    TrainingDesign,
    ValidationRecord,
    ValidationStatus,
)
from rtrimimo.streams import RandomSource
from rtrimimo.system import (
    data_rx,
    make_orthogonal_training,
    sample_channel,
    sample_data_symbols,
    sample_distortion,
    split_equal_power,
    split_resources,
    training_rx,
)
from rtrimimo.estimation import (
    empirical_mse,
    lmmse_estimate,
    mse_floor,
    normalized_mse,
    training_gain,
)
from rtrimimo.rate import (
    closed_form_rate,
    effective_snr,
    effective_snr_equal_power,
    mc_rate,
    wishart_unordered_eig_pdf,
)
from rtrimimo.optimize import (
    alpha_high_snr_limit,
    optimal_alpha,
    optimize_training_length,
    relative_rate_gain,
)
from rtrimimo.experiments import ExperimentRunner, run
from rtrimimo.exceptions import (
    RTRIMimoError,
    ConstraintViolationError,
    DomainError,
    DimensionMismatchError,
    NumericalInstabilityError,
    ConfigurationError,
    SpecValidationError,
    OutputError,
)

__version__ = "0.1.0"

__all__ = [
    # Models
    "LinkConfig",
    "ResourceSplit",
    "ChannelEstimate",
    "EffectiveSnr",
    "RateMethod",
    "RateResult",
    "PowerMode",
    "TrainingDesign",
    "ExperimentKind",
    "ExperimentSpec",
    "ExperimentOutcome",
    "ValidationRecord",
    "ValidationStatus",
    # System model
    "RandomSource",
    "split_resources",
    "split_equal_power",
    "make_orthogonal_training",
    "sample_channel",
    "sample_distortion",
    "sample_data_symbols",
    "training_rx",
    "data_rx",
    # Estimation
    "training_gain",
    "normalized_mse",
    "mse_floor",
    "lmmse_estimate",
    "empirical_mse",
    # Rate
    "effective_snr",
    "effective_snr_equal_power",
    "wishart_unordered_eig_pdf",
    "closed_form_rate",
    "mc_rate",
    # Optimization
    "optimal_alpha",
    "alpha_high_snr_limit",
    "optimize_training_length",
    "relative_rate_gain",
    # Experiments
    "ExperimentRunner",
    "run",
    # Exceptions
    "RTRIMimoError",
    "ConstraintViolationError",
    "DomainError",
    "DimensionMismatchError",
    "NumericalInstabilityError",
    "ConfigurationError",
    "SpecValidationError",
    "OutputError",
]
