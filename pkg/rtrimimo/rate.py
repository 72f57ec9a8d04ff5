"""Effective SNR and the approximated achievable rate.

The closed-form rate averages log2(1 + rho_eff lambda / N_t) over the
unordered eigenvalue density of a complex Wishart matrix. That density is a
finite alternating sum of lambda^k e^-lambda terms whose weights are
determinants of factorial Hankel minors; both the density and the rate are
built from the same cached term table.
"""

import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, NamedTuple, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import quad
from scipy.special import gammainccinv, logsumexp

from rtrimimo.estimation import lmmse_estimate, training_gain
from rtrimimo.exceptions import ConstraintViolationError, DomainError, NumericalInstabilityError
from rtrimimo.models import EffectiveSnr, LinkConfig, RateMethod, RateResult, ResourceSplit
from rtrimimo.numerics import (
    SignedLogValue,
    exact_det,
    log_factorial,
    scaled_upper_gamma_sequence,
    signed_log_sum,
)
from rtrimimo.streams import DEFAULT_BLOCK_SIZE, RandomSource, mean_and_std_err, run_blocks
from rtrimimo.system import (
    data_rx,
    make_orthogonal_training,
    sample_channel,
    sample_data_symbols,
    training_rx,
)

logger = logging.getLogger(__name__)

# Cancellation diagnostics of the alternating rate sum.
CONDITION_WARNING = 1e4
CONDITION_LIMIT = 1e6

# Upper integration limit leaves less than this Gamma tail mass.
PDF_TAIL_MASS = 1e-10

SnrLike = Union[EffectiveSnr, float]


def _snr_value(rho_eff: SnrLike) -> float:
    return float(rho_eff)


# ============================================================================
# Effective SNR
# ============================================================================


def effective_noise_variance(gain: float, rho_d: float, delta: float) -> float:
    """Variance of estimation error plus distortion plus noise, (1/(1+g) + delta^2) rho_d + 1."""
    return (1.0 / (1.0 + gain) + delta**2) * rho_d + 1.0


def effective_snr_array(rho_p: ArrayLike, rho_d: ArrayLike, t_p: int, n_tx: int, delta: float) -> np.ndarray:
    """
    Effective SNR in closed form, elementwise over array inputs.

    rho_eff = rho_d rho_p T_p / (N_t (1 + rho_p d^2)(1 + rho_d + rho_d d^2)
              + rho_p T_p + rho_d rho_p T_p d^2)
    """
    rho_p = np.asarray(rho_p, dtype=float)
    rho_d = np.asarray(rho_d, dtype=float)
    d2 = delta**2
    numerator = rho_d * rho_p * t_p
    denominator = (
        n_tx * (1.0 + rho_p * d2) * (1.0 + rho_d + rho_d * d2)
        + rho_p * t_p
        + rho_d * rho_p * t_p * d2
    )
    return numerator / denominator


def effective_snr(rho_p: float, rho_d: float, t_p: int, n_tx: int, delta: float) -> EffectiveSnr:
    """Effective SNR for one (rho_p, rho_d) operating point."""
    return EffectiveSnr(value=float(effective_snr_array(rho_p, rho_d, t_p, n_tx, delta)))


def effective_snr_ratio(rho_p: float, rho_d: float, t_p: int, n_tx: int, delta: float) -> EffectiveSnr:
    """Effective SNR as rho_d sigma_H_hat^2 / sigma_V_tilde^2."""
    gain = training_gain(rho_p, t_p, n_tx, delta)
    est_var = gain / (1.0 + gain)
    return EffectiveSnr(value=rho_d * est_var / effective_noise_variance(gain, rho_d, delta))


def effective_snr_equal_power(rho: float, t_p: int, n_tx: int, delta: float) -> EffectiveSnr:
    """Effective SNR when pilots and data share the same power rho."""
    d2 = delta**2
    numerator = rho**2 * t_p
    denominator = n_tx * (1.0 + rho * d2) * (1.0 + rho + rho * d2) + (rho**2 * d2 + rho) * t_p
    return EffectiveSnr(value=numerator / denominator)


def empirical_effective_noise(
    config: LinkConfig,
    split: ResourceSplit,
    trials: int,
    rng: RandomSource,
    *,
    max_workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> Tuple[float, float]:
    """
    Monte-Carlo per-entry power of V_tilde = Y_d - sqrt(rho_d/N_t) H_hat S_d.

    H_hat is the LMMSE estimate from the training phase of the same block.

    Returns:
        Tuple of (mean, standard error)
    """
    s_p = make_orthogonal_training(config.n_tx, split.t_p)

    def kernel(n: int, stream: RandomSource) -> np.ndarray:
        h = sample_channel(config.n_rx, config.n_tx, stream, batch=(n,))
        y_p = training_rx(h, s_p, split.rho_p, config.delta, stream)
        h_hat = lmmse_estimate(y_p, s_p, split.rho_p, config.delta).h_hat
        s_d = sample_data_symbols(config.n_tx, split.t_d, stream, batch=(n,))
        y_d = data_rx(h, s_d, split.rho_d, config.delta, stream)
        v_tilde = y_d - np.sqrt(split.rho_d / config.n_tx) * (h_hat @ s_d)
        return np.mean(np.abs(v_tilde) ** 2, axis=(-2, -1))

    values = run_blocks(kernel, trials, rng, block_size=block_size, max_workers=max_workers)
    return mean_and_std_err(values)


# ============================================================================
# Unordered Wishart eigenvalue density
# ============================================================================


class EigenTerm(NamedTuple):
    """One (n, m) term of the density: sign * exp(log_weight) * lambda^(t-1) e^-lambda."""

    t: int
    sign: int
    log_weight: float


def _check_dimensions(p: int, q: int) -> None:
    if q < 1:
        raise DomainError("wishart_unordered_eig_pdf", "q", q, "q = min(N_r, N_t) must be >= 1")
    if q > p:
        raise DomainError("wishart_unordered_eig_pdf", "q", q, f"q must not exceed p = {p}")


def _hankel_minor(p: int, q: int, n: int, m: int) -> List[List[int]]:
    """Minor (n, m) of the q x q matrix with entries (p - q + k + l - 2)!, k, l from 1."""
    rows = [k for k in range(1, q + 1) if k != n]
    cols = [l for l in range(1, q + 1) if l != m]
    return [[math.factorial(p - q + k + l - 2) for l in cols] for k in rows]


def _normalization(p: int, q: int) -> Fraction:
    """K / q with K = 1 / (prod (p-i)! prod (q-j)!)."""
    denominator = 1
    for i in range(1, q + 1):
        denominator *= math.factorial(p - i) * math.factorial(q - i)
    return Fraction(1, denominator * q)


@lru_cache(maxsize=None)
def _eigen_terms(p: int, q: int) -> Tuple[EigenTerm, ...]:
    """Signed log weights (K/q) (-1)^(n+m) det(minor_nm) for every (n, m)."""
    log_norm = math.log(_normalization(p, q).denominator)
    terms = []
    for n in range(1, q + 1):
        for m in range(1, q + 1):
            det = exact_det(_hankel_minor(p, q, n, m))
            if det == 0:
                continue
            sign = (-1) ** (n + m) * (1 if det > 0 else -1)
            terms.append(EigenTerm(t=n + m + p - q - 1, sign=sign, log_weight=math.log(abs(det)) - log_norm))
    return tuple(terms)


@lru_cache(maxsize=None)
def _pdf_coefficients(p: int, q: int) -> Dict[int, float]:
    """Exact polynomial coefficients c_k of p(lambda) = sum_k c_k lambda^k e^-lambda."""
    norm = _normalization(p, q)
    coefficients: Dict[int, Fraction] = {}
    for n in range(1, q + 1):
        for m in range(1, q + 1):
            exponent = n + m + p - q - 2
            det = exact_det(_hankel_minor(p, q, n, m))
            coefficients[exponent] = coefficients.get(exponent, Fraction(0)) + (-1) ** (n + m) * det * norm
    return {k: float(c) for k, c in sorted(coefficients.items()) if c != 0}


def wishart_unordered_eig_pdf(lam: ArrayLike, p: int, q: int) -> Union[float, np.ndarray]:
    """
    Density of one unordered eigenvalue of a complex central Wishart matrix.

    W = H H^H with H a q x p (or p x q) matrix of i.i.d. CN(0, 1) entries.

    Args:
        lam: Eigenvalue(s) >= 0; scalar or array
        p: max(N_r, N_t)
        q: min(N_r, N_t)

    Returns:
        Density value(s), same shape as ``lam``

    Raises:
        DomainError: If q < 1, q > p or any lambda < 0
    """
    _check_dimensions(p, q)
    values = np.asarray(lam, dtype=float)
    if np.any(values < 0):
        raise DomainError("wishart_unordered_eig_pdf", "lambda", lam, "eigenvalues are non-negative")

    polynomial = np.zeros_like(values)
    for exponent, coefficient in _pdf_coefficients(p, q).items():
        polynomial = polynomial + coefficient * values**exponent
    density = np.maximum(polynomial * np.exp(-values), 0.0)

    if np.ndim(lam) == 0:
        return float(density)
    return density


def eigenvalue_pdf_moment(p: int, q: int, order: int = 0) -> float:
    """
    Integral of lambda^order times the eigenvalue density by adaptive quadrature.

    Order 0 is the normalization, order 1 the mean (equal to p).
    """
    _check_dimensions(p, q)
    if order < 0:
        raise DomainError("eigenvalue_pdf_moment", "order", order, "order must be >= 0")

    # the heaviest term is a Gamma(p + q - 1 + order) kernel
    upper = float(gammainccinv(p + q - 1 + order, PDF_TAIL_MASS))
    value, abserr = quad(
        lambda x: x**order * wishart_unordered_eig_pdf(x, p, q),
        0.0,
        upper,
        epsabs=1e-13,
        epsrel=1e-11,
        limit=200,
    )
    logger.debug(f"Moment {order} of eigenvalue pdf ({p}, {q}) = {value!r} (abserr {abserr:.2g})")
    return value


# ============================================================================
# Achievable rate
# ============================================================================


def _check_block(t_d: int, coherence: int) -> None:
    if not 1 <= t_d <= coherence:
        raise ConstraintViolationError(f"1 <= t_d <= coherence ({coherence})", t_d)


def closed_form_rate(
    rho_eff: SnrLike, n_tx: int, n_rx: int, t_d: int, coherence: int
) -> RateResult:
    """
    Closed-form approximated achievable rate.

    R = (T_d / (T ln 2)) K sum_nm (-1)^(n+m) det(minor_nm) Gamma(t)
        sum_{j<t} e^x Gamma(-j, x) x^j,   x = N_t / rho_eff, t = n + m + p - q - 1.

    The alternating double sum is accumulated in signed-log form.

    Args:
        rho_eff: Effective SNR (linear)
        n_tx: Transmit antennas
        n_rx: Receive antennas
        t_d: Data length
        coherence: Coherence time

    Returns:
        RateResult with method closed_form

    Raises:
        DomainError: If rho_eff <= 0
        NumericalInstabilityError: If the sum cancels beyond the condition limit
    """
    rho = _snr_value(rho_eff)
    if not rho > 0:
        raise DomainError("closed_form_rate", "rho_eff", rho, "use rate 0 for rho_eff = 0")
    _check_block(t_d, coherence)

    p, q = max(n_tx, n_rx), min(n_tx, n_rx)
    terms = _eigen_terms(p, q)
    x = n_tx / rho
    depth = max(term.t for term in terms)

    # log S_t for t = 1..depth, S_t = sum_{j<t} e^x Gamma(-j, x) x^j
    scaled = scaled_upper_gamma_sequence(depth - 1, x)
    log_parts = np.array([math.log(g) + j * math.log(x) for j, g in enumerate(scaled)])
    log_partial = [float(logsumexp(log_parts[:t])) for t in range(1, depth + 1)]

    total, condition = signed_log_sum(
        SignedLogValue(term.log_weight + log_factorial(term.t - 1) + log_partial[term.t - 1], term.sign)
        for term in terms
    )

    if condition > CONDITION_LIMIT:
        raise NumericalInstabilityError(
            "alternating rate sum cancels catastrophically",
            p=p,
            q=q,
            rho_eff=rho,
            condition=condition,
        )
    if condition > CONDITION_WARNING:
        logger.warning(
            f"Closed-form rate loses precision at (p, q) = ({p}, {q}), rho_eff = {rho:.6g}: "
            f"condition {condition:.3g}"
        )

    nats = total.decode() * q
    # q * (K/q) = K; the table stores K/q so the density and the rate share it
    bits = max(nats, 0.0) * t_d / (coherence * math.log(2.0))
    return RateResult(bits_per_use=bits, std_err=0.0, method=RateMethod.CLOSED_FORM)


def mc_rate(
    rho_eff: SnrLike,
    n_tx: int,
    n_rx: int,
    t_d: int,
    coherence: int,
    trials: int,
    rng: RandomSource,
    *,
    max_workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> RateResult:
    """
    Monte-Carlo rate (T_d/T) E[log2 det(I + (rho_eff/N_t) H H^H)].

    H has i.i.d. CN(0, 1) entries; the determinant is taken on the smaller
    q x q Gram matrix.
    """
    rho = _snr_value(rho_eff)
    if rho < 0:
        raise DomainError("mc_rate", "rho_eff", rho, "effective SNR must be non-negative")
    if trials < 1:
        raise ConstraintViolationError("trials >= 1", trials)
    _check_block(t_d, coherence)

    if rho == 0:
        return RateResult(bits_per_use=0.0, std_err=0.0, method=RateMethod.MONTE_CARLO)

    q = min(n_tx, n_rx)
    identity = np.eye(q)
    fraction = t_d / coherence

    def kernel(n: int, stream: RandomSource) -> np.ndarray:
        h = sample_channel(n_rx, n_tx, stream, batch=(n,))
        h_h = np.conj(np.swapaxes(h, -1, -2))
        gram = h @ h_h if n_rx <= n_tx else h_h @ h
        _, logdet = np.linalg.slogdet(identity + (rho / n_tx) * gram)
        return fraction * logdet / math.log(2.0)

    values = run_blocks(kernel, trials, rng, block_size=block_size, max_workers=max_workers)
    mean, std_err = mean_and_std_err(values)
    return RateResult(bits_per_use=max(mean, 0.0), std_err=std_err, method=RateMethod.MONTE_CARLO)
