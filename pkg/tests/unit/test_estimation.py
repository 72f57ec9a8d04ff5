"""Unit tests for LMMSE channel estimation."""

import numpy as np
import pytest

from rtrimimo.estimation import (
    empirical_mse,
    lmmse_estimate,
    mse_floor,
    normalized_mse,
    training_gain,
)
from rtrimimo.exceptions import ConstraintViolationError, DimensionMismatchError, DomainError
from rtrimimo.streams import RandomSource
from rtrimimo.system import make_orthogonal_training, sample_channel, training_rx
from rtrimimo.testing import ZeroSource, reference_link_config


# ============================================================================
# Closed-Form Tests
# ============================================================================


def test_training_gain_ideal_hardware():
    """Test g = rho_p T_p / N_t when delta = 0."""
    assert training_gain(12.5, 4, 4, 0.0) == pytest.approx(12.5)
    assert normalized_mse(12.5) == pytest.approx(1.0 / 13.5)


def test_training_gain_with_impairments():
    """Test distortion divides the gain by 1 + rho_p delta^2."""
    gain = training_gain(10.0, 8, 4, 0.175)

    assert gain == pytest.approx(10.0 * 8 / (4 * (1 + 10.0 * 0.175**2)))


def test_normalized_mse_domain():
    """Test a negative gain is rejected."""
    assert normalized_mse(0.0) == 1.0

    with pytest.raises(DomainError):
        normalized_mse(-0.1)


def test_mse_floor_reference_values():
    """Test the high-SNR MSE floor for the LTE EVM endpoints."""
    assert mse_floor(4, 4, 0.175) == pytest.approx(0.0297151, rel=1e-5)
    assert mse_floor(4, 4, 0.08) == pytest.approx(1.0 / 157.25, rel=1e-10)


def test_mse_floor_requires_impairments():
    """Test ideal hardware has no floor."""
    with pytest.raises(DomainError):
        mse_floor(4, 4, 0.0)


def test_mse_approaches_floor():
    """Test the MSE saturates at the floor as rho_p grows."""
    delta = 0.175
    floor = mse_floor(4, 4, delta)
    values = [normalized_mse(training_gain(rho, 4, 4, delta)) for rho in (1.0, 1e2, 1e4, 1e9)]

    assert all(b < a for a, b in zip(values, values[1:]))
    assert all(v > floor for v in values)
    assert values[-1] == pytest.approx(floor, rel=1e-6)


def test_longer_training_lowers_floor():
    """Test the floor falls as T_p grows."""
    floors = [mse_floor(t_p, 4, 0.08) for t_p in (4, 8, 16, 32)]

    assert all(b < a for a, b in zip(floors, floors[1:]))


# ============================================================================
# Estimator Tests
# ============================================================================


def test_lmmse_noiseless_shrinkage():
    """Test noiseless ideal pilots give H_hat = g / (1 + g) H."""
    rho_p, t_p = 12.5, 6
    h = sample_channel(4, 4, RandomSource(20))
    s_p = make_orthogonal_training(4, t_p)
    y_p = training_rx(h, s_p, rho_p, 0.0, ZeroSource())

    estimate = lmmse_estimate(y_p, s_p, rho_p, 0.0)
    gain = training_gain(rho_p, t_p, 4, 0.0)

    assert np.allclose(estimate.h_hat, gain / (1 + gain) * h, rtol=0.0, atol=1e-12)


def test_lmmse_variance_decomposition():
    """Test est_var + err_var = 1 and err_var = 1 / (1 + g)."""
    s_p = make_orthogonal_training(4, 4)
    rng = RandomSource(21)
    y_p = training_rx(sample_channel(4, 4, rng), s_p, 3.0, 0.08, rng)

    estimate = lmmse_estimate(y_p, s_p, 3.0, 0.08)

    assert estimate.gain == pytest.approx(training_gain(3.0, 4, 4, 0.08))
    assert estimate.err_var == pytest.approx(normalized_mse(estimate.gain))
    assert estimate.est_var + estimate.err_var == pytest.approx(1.0, abs=1e-12)


def test_lmmse_non_orthogonal_pilots():
    """Test non-orthogonal pilots still estimate but leave variances empty."""
    s_p = RandomSource(22).complex_normal((2, 5))
    rng = RandomSource(23)
    y_p = training_rx(sample_channel(3, 2, rng), s_p, 2.0, 0.0, rng)

    estimate = lmmse_estimate(y_p, s_p, 2.0, 0.0)

    assert estimate.h_hat.shape == (3, 2)
    assert estimate.est_var is None
    assert estimate.err_var is None
    assert estimate.gain is None


def test_lmmse_batched():
    """Test leading batch axes pass through."""
    s_p = make_orthogonal_training(4, 8)
    rng = RandomSource(24)
    y_p = training_rx(sample_channel(2, 4, rng, batch=(5, 3)), s_p, 1.0, 0.1, rng)

    assert lmmse_estimate(y_p, s_p, 1.0, 0.1).h_hat.shape == (5, 3, 2, 4)


def test_lmmse_dimension_checks():
    """Test mismatched observation and pilot shapes raise."""
    s_p = make_orthogonal_training(4, 6)

    with pytest.raises(DimensionMismatchError):
        lmmse_estimate(np.zeros((4, 5), dtype=complex), s_p, 1.0, 0.0)
    with pytest.raises(DimensionMismatchError):
        lmmse_estimate(np.zeros((4, 6), dtype=complex), s_p[0], 1.0, 0.0)
    with pytest.raises(ConstraintViolationError):
        lmmse_estimate(np.zeros((4, 6), dtype=complex), s_p, 0.0, 0.0)


def test_estimate_power_matches_est_var():
    """Test E|H_hat_ij|^2 matches the closed-form estimate variance."""
    rho_p, delta = 2.0, 0.175
    s_p = make_orthogonal_training(4, 4)
    rng = RandomSource(25)
    h = sample_channel(4, 4, rng, batch=(20_000,))

    estimate = lmmse_estimate(training_rx(h, s_p, rho_p, delta, rng), s_p, rho_p, delta)

    assert np.mean(np.abs(estimate.h_hat) ** 2) == pytest.approx(estimate.est_var, rel=0.02)


def test_estimate_orthogonal_to_error():
    """Test E[H_hat^H H_e] vanishes entrywise within 4 sigma."""
    rho_p, delta, trials = 2.0, 0.175, 50_000
    s_p = make_orthogonal_training(4, 4)
    rng = RandomSource(28)
    h = sample_channel(4, 4, rng, batch=(trials,))

    h_hat = lmmse_estimate(training_rx(h, s_p, rho_p, delta, rng), s_p, rho_p, delta).h_hat
    products = np.conj(np.swapaxes(h_hat, -1, -2)) @ (h - h_hat)

    for part in (products.real, products.imag):
        mean = part.mean(axis=0)
        std_err = part.std(axis=0, ddof=1) / np.sqrt(trials)
        assert np.all(np.abs(mean) <= 4.0 * std_err)


# ============================================================================
# Monte-Carlo MSE Tests
# ============================================================================


@pytest.mark.parametrize("delta", [0.0, 0.08, 0.175])
@pytest.mark.parametrize("rho_p", [0.1, 1.0, 10.0, 100.0])
def test_empirical_mse_matches_closed_form(rho_p, delta):
    """Test the Monte-Carlo MSE agrees with 1 / (1 + g) within 4 sigma."""
    config = reference_link_config(delta=delta)
    rng = RandomSource.for_experiment(3, "mse_check", int(rho_p * 100 + delta * 1000))

    mean, std_err = empirical_mse(config, 4, rho_p, 20_000, rng)
    expected = normalized_mse(training_gain(rho_p, 4, 4, delta))

    assert std_err > 0
    assert abs(mean - expected) <= 4.0 * std_err


def test_empirical_mse_reaches_floor():
    """Test the Monte-Carlo MSE sits on the floor at very high SNR."""
    delta = 0.175
    mean, std_err = empirical_mse(reference_link_config(delta=delta), 4, 1e6, 20_000, RandomSource(26))

    assert abs(mean - mse_floor(4, 4, delta)) <= 4.0 * std_err


def test_empirical_mse_insensitive_at_low_snr():
    """Test impairments barely move the MSE when noise dominates."""
    ideal = empirical_mse(reference_link_config(delta=0.0), 4, 0.1, 20_000, RandomSource(29, 1))
    impaired = empirical_mse(reference_link_config(delta=0.175), 4, 0.1, 20_000, RandomSource(29, 2))

    pooled = np.hypot(ideal[1], impaired[1])
    assert abs(impaired[0] - ideal[0]) <= 4.0 * pooled


def test_empirical_mse_worker_independent():
    """Test parallel and serial runs are bit-identical."""
    config = reference_link_config(delta=0.08)
    rng = RandomSource(27, 5)

    serial = empirical_mse(config, 4, 3.0, 1_000, rng, block_size=128, max_workers=1)
    parallel = empirical_mse(config, 4, 3.0, 1_000, rng, block_size=128, max_workers=4)

    assert serial == parallel


def test_empirical_mse_rejects_short_training():
    """Test t_p < n_tx is rejected."""
    with pytest.raises(ConstraintViolationError):
        empirical_mse(reference_link_config(), 3, 1.0, 10, RandomSource(0))
