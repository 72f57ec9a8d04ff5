"""Power allocation and training-length optimization."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, NamedTuple, Tuple

from rtrimimo.exceptions import ConstraintViolationError, NumericalInstabilityError
from rtrimimo.models import EffectiveSnr, LinkConfig, PowerMode, RateResult, ResourceSplit, TrainingDesign
from rtrimimo.rate import closed_form_rate, effective_snr, effective_snr_equal_power
from rtrimimo.system import split_equal_power, split_resources

logger = logging.getLogger(__name__)

# |s| below this fraction of r is treated as s = 0.
S_ZERO_TOLERANCE = 1e-12


def optimal_alpha(rho: float, coherence: int, t_p: int, n_tx: int, delta: float) -> float:
    """
    Data share of the block energy that maximizes the effective SNR.

    alpha = (r - sqrt(r^2 - r s)) / s, or 1/2 when s = 0, with
        r = rho T + N_t rho T delta^2 / T_p + N_t
        s = rho T + N_t rho T delta^2 / T_p - N_t rho T (1 + delta^2) / T_d

    Evaluated as r / (r + sqrt(r^2 - r s)), which is the same value without
    the cancellation near s = 0.
    """
    if not rho > 0:
        raise ConstraintViolationError("rho > 0", rho)
    if not n_tx <= t_p <= coherence - 1:
        raise ConstraintViolationError(f"n_tx <= t_p <= coherence - 1 ({n_tx}..{coherence - 1})", t_p)

    t_d = coherence - t_p
    energy = rho * coherence
    d2 = delta**2
    r = energy + n_tx * energy * d2 / t_p + n_tx
    s = energy + n_tx * energy * d2 / t_p - n_tx * energy * (1.0 + d2) / t_d

    if abs(s) < S_ZERO_TOLERANCE * r:
        return 0.5
    return r / (r + math.sqrt(r * r - r * s))


def alpha_high_snr_limit(t_p: int, t_d: int, n_tx: int, delta: float) -> float:
    """rho -> infinity limit of :func:`optimal_alpha`: 1 / (1 + sqrt(b / a)).

    a = 1 + N_t delta^2 / T_p and b = N_t (1 + delta^2) / T_d.
    """
    a = 1.0 + n_tx * delta**2 / t_p
    b = n_tx * (1.0 + delta**2) / t_d
    return 1.0 / (1.0 + math.sqrt(b / a))


def joint_operating_point(config: LinkConfig, t_p: int) -> Tuple[ResourceSplit, EffectiveSnr]:
    """Resource split at the optimal alpha for ``t_p`` and its effective SNR."""
    alpha = optimal_alpha(config.snr, config.coherence, t_p, config.n_tx, config.delta)
    split = split_resources(config, t_p, alpha)
    rho_eff = effective_snr(split.rho_p, split.rho_d, t_p, config.n_tx, config.delta)
    return split, rho_eff


class Candidate(NamedTuple):
    """One evaluated training length."""

    t_p: int
    alpha: float
    rho_eff: EffectiveSnr
    rate: RateResult


def _evaluate(config: LinkConfig, mode: PowerMode, t_p: int) -> Candidate:
    if mode == PowerMode.JOINT_POWER:
        split, rho_eff = joint_operating_point(config, t_p)
    else:
        split = split_equal_power(config, t_p)
        rho_eff = effective_snr_equal_power(config.snr, t_p, config.n_tx, config.delta)

    try:
        rate = closed_form_rate(rho_eff, config.n_tx, config.n_rx, split.t_d, config.coherence)
    except NumericalInstabilityError as e:
        raise NumericalInstabilityError(
            "closed-form rate failed during training-length search",
            p=e.p,
            q=e.q,
            rho_eff=e.rho_eff,
            condition=e.condition,
            t_p=t_p,
        ) from e

    logger.debug(
        f"t_p={t_p} ({mode.value}): alpha={split.alpha:.6f} rho_eff={rho_eff.value:.6g} "
        f"rate={rate.bits_per_use:.6f}"
    )
    return Candidate(t_p=t_p, alpha=split.alpha, rho_eff=rho_eff, rate=rate)


def optimize_training_length(
    config: LinkConfig,
    mode: PowerMode = PowerMode.JOINT_POWER,
    *,
    max_workers: int = 1,
) -> TrainingDesign:
    """
    Exhaustive search for the rate-maximizing training length.

    Every t_p in [n_tx, coherence - 1] is scored with the closed-form rate.
    In joint-power mode each candidate uses its optimal alpha; in
    equal-power mode rho_p = rho_d = rho. Ties go to the smallest t_p.

    Args:
        config: Link configuration
        mode: Power constraint
        max_workers: Candidates evaluated concurrently

    Returns:
        TrainingDesign with the per-candidate rate vector

    Raises:
        NumericalInstabilityError: Naming the t_p whose rate failed
    """
    mode = PowerMode(mode)
    training_lengths = list(range(config.n_tx, config.coherence))

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            candidates: List[Candidate] = list(
                executor.map(lambda t_p: _evaluate(config, mode, t_p), training_lengths)
            )
    else:
        candidates = [_evaluate(config, mode, t_p) for t_p in training_lengths]

    best = candidates[0]
    for candidate in candidates[1:]:
        if candidate.rate.bits_per_use > best.rate.bits_per_use:
            best = candidate

    logger.info(
        f"Optimal t_p={best.t_p} ({mode.value}, snr={config.snr:.6g}, delta={config.delta}): "
        f"{best.rate.bits_per_use:.6f} bits/use"
    )
    return TrainingDesign(
        t_p=best.t_p,
        alpha=best.alpha,
        rate=best.rate,
        mode=mode,
        rho_eff=best.rho_eff,
        n_tx=config.n_tx,
        coherence=config.coherence,
        candidate_rates=tuple(c.rate.bits_per_use for c in candidates),
    )


def relative_rate_gain(
    config: LinkConfig,
    rho: float,
    mode: PowerMode = PowerMode.JOINT_POWER,
) -> float:
    """
    Rate gain of the optimal training length over t_p = n_tx, in percent.

    Args:
        config: Link configuration (its snr is replaced by ``rho``)
        rho: Average SNR, linear
        mode: Power constraint of the search

    Returns:
        (R(t_p_opt) - R(n_tx)) / R(n_tx) * 100, never negative
    """
    design = optimize_training_length(config.at(snr=rho), mode)
    baseline = design.candidate_rates[0]
    if baseline <= 0:
        return 0.0
    return (design.rate.bits_per_use - baseline) / baseline * 100.0
