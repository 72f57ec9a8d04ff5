"""LMMSE channel estimation under transmit impairments."""

import logging
from typing import Tuple

import numpy as np

from rtrimimo.exceptions import (
    ConstraintViolationError,
    DimensionMismatchError,
    DomainError,
    NumericalInstabilityError,
)
from rtrimimo.models import ChannelEstimate, LinkConfig
from rtrimimo.streams import DEFAULT_BLOCK_SIZE, RandomSource, mean_and_std_err, run_blocks
from rtrimimo.system import make_orthogonal_training, sample_channel, training_rx

logger = logging.getLogger(__name__)

# Relative tolerance for recognising S_p S_p^H = t_p I.
GRAM_TOLERANCE = 1e-10


def training_gain(rho_p: float, t_p: int, n_tx: int, delta: float) -> float:
    """g = rho_p T_p / (N_t (rho_p delta^2 + 1))."""
    return rho_p * t_p / (n_tx * (rho_p * delta**2 + 1.0))


def normalized_mse(gain: float) -> float:
    """Per-entry error variance 1 / (1 + g)."""
    if gain < 0:
        raise DomainError("normalized_mse", "gain", gain, "gain must be non-negative")
    return 1.0 / (1.0 + gain)


def mse_floor(t_p: int, n_tx: int, delta: float) -> float:
    """
    High-SNR limit of the normalized MSE, 1 / (1 + T_p / (N_t delta^2)).

    Raises:
        DomainError: If delta <= 0 (the ideal-hardware floor is 0)
    """
    if not delta > 0:
        raise DomainError(
            "mse_floor", "delta", delta, "the floor only exists for delta > 0; ideal hardware has MSE -> 0"
        )
    return 1.0 / (1.0 + t_p / (n_tx * delta**2))


def _has_orthogonal_rows(s_p: np.ndarray) -> bool:
    if s_p.ndim != 2:
        return False
    t_p = s_p.shape[-1]
    gram = s_p @ s_p.conj().T
    return bool(np.allclose(gram, t_p * np.eye(s_p.shape[0]), rtol=0.0, atol=GRAM_TOLERANCE * t_p))


def lmmse_estimate(y_p: np.ndarray, s_p: np.ndarray, rho_p: float, delta: float) -> ChannelEstimate:
    """
    LMMSE estimate of H from the training observation.

    H_hat = c Y_p (c^2 S_p^H S_p + (delta^2 rho_p + 1) I)^-1 S_p^H with
    c = sqrt(rho_p / N_t). ``y_p`` may carry leading batch axes.

    Args:
        y_p: Received pilots, (..., N_r, T_p)
        s_p: Pilot matrix, N_t x T_p
        rho_p: Training-phase SNR
        delta: Impairment level

    Returns:
        ChannelEstimate; variances are filled only for orthogonal pilots

    Raises:
        DimensionMismatchError: If Y_p and S_p disagree on T_p
        NumericalInstabilityError: If the regularized Gram cannot be solved
    """
    if rho_p <= 0:
        raise ConstraintViolationError("rho_p > 0", rho_p)
    if s_p.ndim != 2:
        raise DimensionMismatchError("lmmse_estimate", "pilot matrix (N_t, T_p)", s_p.shape)
    n_tx, t_p = s_p.shape
    if y_p.ndim < 2 or y_p.shape[-1] != t_p:
        raise DimensionMismatchError("lmmse_estimate", ("N_r", t_p), y_p.shape[-2:])

    scale = np.sqrt(rho_p / n_tx)
    s_h = s_p.conj().T
    regularized = scale**2 * (s_h @ s_p) + (delta**2 * rho_p + 1.0) * np.eye(t_p)
    try:
        filt = np.linalg.solve(regularized, s_h)
    except np.linalg.LinAlgError as e:
        raise NumericalInstabilityError(f"singular regularized Gram in lmmse_estimate: {e}") from e

    h_hat = scale * (y_p @ filt)

    if not _has_orthogonal_rows(s_p):
        logger.debug("Pilots are not row-orthogonal; closed-form variances left empty")
        return ChannelEstimate(h_hat=h_hat)

    gain = training_gain(rho_p, t_p, n_tx, delta)
    err_var = normalized_mse(gain)
    return ChannelEstimate(h_hat=h_hat, est_var=1.0 - err_var, err_var=err_var, gain=gain)


def empirical_mse(
    config: LinkConfig,
    t_p: int,
    rho_p: float,
    trials: int,
    rng: RandomSource,
    *,
    max_workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> Tuple[float, float]:
    """
    Monte-Carlo normalized MSE ||H - H_hat||_F^2 / (N_r N_t).

    Every trial draws a fresh channel, distortion and noise.

    Returns:
        Tuple of (mean, standard error)
    """
    if t_p < config.n_tx:
        raise ConstraintViolationError(f"t_p >= n_tx ({config.n_tx})", t_p)
    s_p = make_orthogonal_training(config.n_tx, t_p)
    entries = config.n_rx * config.n_tx

    def kernel(n: int, stream: RandomSource) -> np.ndarray:
        h = sample_channel(config.n_rx, config.n_tx, stream, batch=(n,))
        y_p = training_rx(h, s_p, rho_p, config.delta, stream)
        h_hat = lmmse_estimate(y_p, s_p, rho_p, config.delta).h_hat
        return np.sum(np.abs(h - h_hat) ** 2, axis=(-2, -1)) / entries

    values = run_blocks(kernel, trials, rng, block_size=block_size, max_workers=max_workers)
    mean, std_err = mean_and_std_err(values)
    logger.debug(
        f"empirical_mse rho_p={rho_p:.6g} t_p={t_p} delta={config.delta}: {mean:.6g} +/- {std_err:.2g}"
    )
    return mean, std_err
