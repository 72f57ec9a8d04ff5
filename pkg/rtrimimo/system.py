"""Block-fading MIMO link with residual transmit RF impairments.

Received signals follow Y = sqrt(rho / N_t) H (S + Delta) + V, where Delta
holds transmit distortion with per-entry variance delta^2 and V is unit
variance receiver noise. Every sampling function accepts optional leading
batch axes so Monte-Carlo kernels can draw a whole block of trials at once.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from rtrimimo.exceptions import ConstraintViolationError, DimensionMismatchError
from rtrimimo.models import LinkConfig, ResourceSplit
from rtrimimo.streams import RandomSource

logger = logging.getLogger(__name__)

Batch = Optional[Tuple[int, ...]]


def _batched(batch: Batch, *shape: int) -> Tuple[int, ...]:
    return tuple(batch or ()) + shape


def _check_training_length(config: LinkConfig, t_p: int) -> None:
    if t_p < config.n_tx:
        raise ConstraintViolationError(f"t_p >= n_tx ({config.n_tx})", t_p)
    if t_p > config.coherence - 1:
        raise ConstraintViolationError(f"t_p <= coherence - 1 ({config.coherence - 1})", t_p)


def split_resources(config: LinkConfig, t_p: int, alpha: float) -> ResourceSplit:
    """
    Split the coherence block into a training and a data phase.

    Time and energy are conserved: T = T_p + T_d and
    rho T = rho_p T_p + rho_d T_d, with alpha the data share of the energy.

    Args:
        config: Link configuration supplying snr and coherence
        t_p: Training length, n_tx <= t_p <= coherence - 1
        alpha: Data share of the block energy, 0 < alpha < 1

    Returns:
        ResourceSplit for the requested operating point

    Raises:
        ConstraintViolationError: If t_p or alpha is out of range
    """
    _check_training_length(config, t_p)
    if not 0.0 < alpha < 1.0:
        raise ConstraintViolationError("0 < alpha < 1", alpha)

    t_d = config.coherence - t_p
    energy = config.snr * config.coherence
    return ResourceSplit(
        t_p=t_p,
        t_d=t_d,
        rho_p=(1.0 - alpha) * energy / t_p,
        rho_d=alpha * energy / t_d,
        alpha=alpha,
        snr=config.snr,
        coherence=config.coherence,
    )


def split_equal_power(config: LinkConfig, t_p: int) -> ResourceSplit:
    """Split with rho_p = rho_d = rho, so alpha = T_d / T."""
    _check_training_length(config, t_p)
    t_d = config.coherence - t_p
    return ResourceSplit(
        t_p=t_p,
        t_d=t_d,
        rho_p=config.snr,
        rho_d=config.snr,
        alpha=t_d / config.coherence,
        snr=config.snr,
        coherence=config.coherence,
    )


def make_orthogonal_training(n_tx: int, t_p: int) -> np.ndarray:
    """
    Pilot matrix with S_p S_p^H = t_p I.

    The first n_tx rows of the t_p-point DFT matrix (unit-modulus entries),
    which is the unitary DFT scaled by sqrt(t_p).

    Raises:
        ConstraintViolationError: If t_p < n_tx
    """
    if n_tx < 1:
        raise ConstraintViolationError("n_tx >= 1", n_tx)
    if t_p < n_tx:
        raise ConstraintViolationError(f"t_p >= n_tx ({n_tx})", t_p)

    rows = np.arange(n_tx)[:, None]
    cols = np.arange(t_p)[None, :]
    # exact integer phase index keeps large t_p accurate
    phase = (rows * cols) % t_p
    return np.exp(-2j * np.pi * phase / t_p)


def sample_channel(
    n_rx: int, n_tx: int, rng: RandomSource, batch: Batch = None
) -> np.ndarray:
    """Channel matrix with i.i.d. CN(0, 1) entries."""
    return rng.complex_normal(_batched(batch, n_rx, n_tx))


def sample_distortion(
    delta: float, n_tx: int, n_cols: int, rng: RandomSource, batch: Batch = None
) -> np.ndarray:
    """Transmit distortion with i.i.d. CN(0, delta^2) entries.

    delta = 0 returns zeros without consuming the stream.
    """
    if delta < 0:
        raise ConstraintViolationError("delta >= 0", delta)
    shape = _batched(batch, n_tx, n_cols)
    if delta == 0:
        return np.zeros(shape, dtype=complex)
    return rng.complex_normal(shape, variance=delta**2)


def sample_data_symbols(
    n_tx: int, t_d: int, rng: RandomSource, batch: Batch = None
) -> np.ndarray:
    """Data symbols with i.i.d. CN(0, 1) entries (power constraint in expectation)."""
    return rng.complex_normal(_batched(batch, n_tx, t_d))


def _received(
    operation: str, h: np.ndarray, s: np.ndarray, rho: float, delta: float, rng: RandomSource
) -> np.ndarray:
    if rho <= 0:
        raise ConstraintViolationError("rho > 0", rho)
    if h.ndim < 2 or s.ndim < 2:
        raise DimensionMismatchError(operation, "matrices (..., rows, cols)", (h.shape, s.shape))
    n_rx, n_tx = h.shape[-2:]
    if s.shape[-2] != n_tx:
        raise DimensionMismatchError(operation, (n_tx, "n_cols"), s.shape[-2:])

    n_cols = s.shape[-1]
    batch = np.broadcast_shapes(h.shape[:-2], s.shape[:-2])
    distortion = sample_distortion(delta, n_tx, n_cols, rng, batch)
    noise = rng.complex_normal(_batched(batch, n_rx, n_cols))
    return np.sqrt(rho / n_tx) * (h @ (s + distortion)) + noise


def training_rx(
    h: np.ndarray, s_p: np.ndarray, rho_p: float, delta: float, rng: RandomSource
) -> np.ndarray:
    """
    Training-phase observation Y_p = sqrt(rho_p/N_t) H (S_p + Delta_p) + V_p.

    Distortion is drawn before noise. Batched channels broadcast against a
    single pilot matrix.

    Raises:
        DimensionMismatchError: If H and S_p do not chain
    """
    return _received("training_rx", h, s_p, rho_p, delta, rng)


def data_rx(
    h: np.ndarray, s_d: np.ndarray, rho_d: float, delta: float, rng: RandomSource
) -> np.ndarray:
    """Data-phase observation Y_d = sqrt(rho_d/N_t) H (S_d + Delta_d) + V_d."""
    return _received("data_rx", h, s_d, rho_d, delta, rng)
