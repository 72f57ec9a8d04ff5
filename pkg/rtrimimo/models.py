"""Core data models for rtrimimo."""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from rtrimimo.exceptions import SpecValidationError

U64_MAX = 2**64 - 1


class LinkConfig(BaseModel):
    """Antenna counts, coherence time, impairment level and SNR budget.

    Defaults reproduce the 4x4, T = 100 setup with ideal hardware at 0 dB.
    """

    model_config = ConfigDict(frozen=True)

    n_tx: int = Field(default=4, ge=1, description="Transmit antennas N_t")
    n_rx: int = Field(default=4, ge=1, description="Receive antennas N_r")
    coherence: int = Field(default=100, ge=2, description="Coherence time T in channel uses")
    delta: float = Field(default=0.0, ge=0.0, description="RTRI level (equals EVM); 0 is ideal hardware")
    snr: float = Field(default=1.0, gt=0.0, description="Average SNR rho, linear")

    @model_validator(mode="after")
    def check_coherence(self) -> "LinkConfig":
        """Leave room for t_p >= n_tx pilots and at least one data symbol."""
        if self.coherence < self.n_tx + 1:
            raise ValueError(
                f"coherence ({self.coherence}) must be at least n_tx + 1 ({self.n_tx + 1})"
            )
        return self

    def at(self, snr: Optional[float] = None, delta: Optional[float] = None) -> "LinkConfig":
        """Return a validated copy at another operating point."""
        data = self.model_dump()
        if snr is not None:
            data["snr"] = snr
        if delta is not None:
            data["delta"] = delta
        return LinkConfig(**data)


class ResourceSplit(BaseModel):
    """Training/data split of the coherence block.

    Satisfies T = T_p + T_d and rho T = rho_p T_p + rho_d T_d, with alpha the
    fraction of the block energy spent on data.
    """

    model_config = ConfigDict(frozen=True)

    t_p: int = Field(..., ge=1, description="Training length T_p")
    t_d: int = Field(..., ge=1, description="Data length T_d")
    rho_p: float = Field(..., gt=0.0, description="Training-phase SNR")
    rho_d: float = Field(..., gt=0.0, description="Data-phase SNR")
    alpha: float = Field(..., gt=0.0, lt=1.0, description="Data share of the block energy")
    snr: float = Field(..., gt=0.0, description="Average SNR rho of the block")
    coherence: int = Field(..., ge=2, description="Coherence time T")

    @model_validator(mode="after")
    def check_conservation(self) -> "ResourceSplit":
        """Time and energy conservation."""
        if self.t_p + self.t_d != self.coherence:
            raise ValueError(
                f"t_p + t_d = {self.t_p + self.t_d} does not equal coherence {self.coherence}"
            )
        budget = self.snr * self.coherence
        spent = self.rho_p * self.t_p + self.rho_d * self.t_d
        if abs(spent - budget) > 1e-9 * budget:
            raise ValueError(f"energy not conserved: spent {spent!r}, budget {budget!r}")
        if abs(self.alpha - self.rho_d * self.t_d / budget) > 1e-12:
            raise ValueError("alpha does not match rho_d * t_d / (snr * coherence)")
        return self


class ChannelEstimate(BaseModel):
    """LMMSE channel estimate with its closed-form per-entry variances.

    The variances are filled only when the pilots satisfy the Gram condition
    S_p S_p^H = T_p I; otherwise they are None.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    h_hat: np.ndarray = Field(..., description="Estimated channel, N_r x N_t (batched allowed)")
    est_var: Optional[float] = Field(None, ge=0.0, description="Per-entry variance of the estimate")
    err_var: Optional[float] = Field(None, ge=0.0, description="Per-entry variance of the error")
    gain: Optional[float] = Field(None, ge=0.0, description="Training gain g")

    @model_validator(mode="after")
    def check_decomposition(self) -> "ChannelEstimate":
        """est_var + err_var = 1 for unit-variance channel entries."""
        if self.est_var is not None and self.err_var is not None:
            if abs(self.est_var + self.err_var - 1.0) > 1e-12:
                raise ValueError("est_var + err_var must equal 1")
        return self


class EffectiveSnr(BaseModel):
    """Effective SNR rho_eff (linear)."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0.0)

    def __float__(self) -> float:
        return self.value


class RateMethod(str, Enum):
    """How an achievable rate was obtained."""

    CLOSED_FORM = "closed_form"
    MONTE_CARLO = "monte_carlo"


class RateResult(BaseModel):
    """Approximated achievable rate in bits per channel use."""

    model_config = ConfigDict(frozen=True)

    bits_per_use: float = Field(..., ge=0.0)
    std_err: float = Field(default=0.0, ge=0.0)
    method: RateMethod

    @model_validator(mode="after")
    def check_std_err(self) -> "RateResult":
        """Closed-form results carry no sampling error."""
        if self.method == RateMethod.CLOSED_FORM and self.std_err != 0.0:
            raise ValueError("closed-form rates have std_err = 0")
        return self


class PowerMode(str, Enum):
    """Power constraint used while searching the training length."""

    JOINT_POWER = "joint_power"
    EQUAL_POWER = "equal_power"


class TrainingDesign(BaseModel):
    """Outcome of the exhaustive training-length search."""

    model_config = ConfigDict(frozen=True)

    t_p: int = Field(..., ge=1, description="Optimal training length")
    alpha: float = Field(..., gt=0.0, lt=1.0, description="Data share of the block energy")
    rate: RateResult
    mode: PowerMode
    rho_eff: EffectiveSnr
    n_tx: int = Field(..., ge=1)
    coherence: int = Field(..., ge=2)
    candidate_rates: Tuple[float, ...] = Field(
        ..., description="Closed-form rate for t_p = n_tx, n_tx + 1, ..., coherence - 1"
    )

    @model_validator(mode="after")
    def check_design(self) -> "TrainingDesign":
        if not self.n_tx <= self.t_p <= self.coherence - 1:
            raise ValueError(f"t_p = {self.t_p} outside [{self.n_tx}, {self.coherence - 1}]")
        if len(self.candidate_rates) != self.coherence - self.n_tx:
            raise ValueError("candidate_rates must cover every t_p in the search range")
        if self.mode == PowerMode.EQUAL_POWER:
            expected = (self.coherence - self.t_p) / self.coherence
            if abs(self.alpha - expected) > 1e-12:
                raise ValueError("equal-power alpha must equal t_d / coherence")
        return self

    @property
    def t_d(self) -> int:
        return self.coherence - self.t_p


class ExperimentKind(str, Enum):
    """Experiments the runner can execute."""

    MSE_SWEEP = "mse_sweep"
    OPTIMAL_TP = "optimal_tp"
    RATE_SWEEP = "rate_sweep"
    RATE_GAIN = "rate_gain"
    EQUAL_POWER_TP = "equal_power_tp"
    VALIDATE = "validate"


DEFAULT_SNR_GRID_DB = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]


def db_to_linear(snr_db: float) -> float:
    """Convert an SNR in dB to linear scale."""
    return 10.0 ** (snr_db / 10.0)


# LTE EVM endpoints plus ideal hardware.
DEFAULT_DELTA_LIST = [0.0, 0.08, 0.175]


class ExperimentSpec(BaseModel):
    """Everything needed to reproduce one experiment run."""

    model_config = ConfigDict(frozen=True)

    kind: ExperimentKind
    config: LinkConfig = Field(default_factory=LinkConfig)
    snr_grid_db: List[float] = Field(default_factory=lambda: list(DEFAULT_SNR_GRID_DB))
    delta_list: List[float] = Field(default_factory=lambda: list(DEFAULT_DELTA_LIST))
    trials: int = Field(default=100_000, ge=1, description="Monte-Carlo trials per point")
    seed: int = Field(default=0, ge=0, le=U64_MAX)
    output_path: str = Field(default="results", description="Output directory")
    t_p: Optional[int] = Field(default=None, ge=1, description="Training length for mse_sweep")
    plot: bool = Field(default=False, description="Also write an SVG line plot")

    @field_validator("snr_grid_db")
    @classmethod
    def validate_snr_grid(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("snr_grid_db must not be empty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("snr_grid_db must be strictly increasing")
        return v

    @field_validator("delta_list")
    @classmethod
    def validate_delta_list(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("delta_list must not be empty")
        negative = [d for d in v if d < 0]
        if negative:
            raise ValueError(f"delta_list values must be >= 0, got {negative}")
        return v

    @model_validator(mode="after")
    def check_training_length(self) -> "ExperimentSpec":
        if self.t_p is not None and not self.config.n_tx <= self.t_p <= self.config.coherence - 1:
            raise ValueError(
                f"t_p must lie in [{self.config.n_tx}, {self.config.coherence - 1}], got {self.t_p}"
            )
        return self

    @classmethod
    def parse(cls, data: Dict[str, Any]) -> "ExperimentSpec":
        """Validate raw data, reporting every violation at once.

        Raises:
            SpecValidationError: If any field or cross-field check fails
        """
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            violations = []
            for error in e.errors():
                location = ".".join(str(part) for part in error["loc"]) or "spec"
                violations.append(f"{location}: {error['msg']}")
            raise SpecValidationError(violations) from e

    @property
    def training_length(self) -> int:
        """Training length used by mse_sweep (defaults to n_tx)."""
        return self.t_p if self.t_p is not None else self.config.n_tx


class ValidationStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"


class ValidationRecord(BaseModel):
    """One row of the validation report."""

    name: str = Field(..., description="Property checked")
    status: ValidationStatus
    measured: float
    bound: float
    detail: str = Field(default="")

    @property
    def passed(self) -> bool:
        return self.status == ValidationStatus.PASS


class ExperimentOutcome(BaseModel):
    """Files written by one experiment run."""

    kind: ExperimentKind
    csv_path: str
    manifest_path: str
    plot_path: Optional[str] = None
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    passed: bool = Field(default=True, description="False if any validation property failed")
