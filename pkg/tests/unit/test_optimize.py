"""Unit tests for power allocation and training-length optimization."""

import logging

import numpy as np
import pytest

import rtrimimo.rate as rate_module
from rtrimimo.exceptions import ConstraintViolationError, NumericalInstabilityError
from rtrimimo.models import LinkConfig, PowerMode, db_to_linear
from rtrimimo.optimize import (
    alpha_high_snr_limit,
    joint_operating_point,
    optimal_alpha,
    optimize_training_length,
    relative_rate_gain,
)
from rtrimimo.rate import closed_form_rate, effective_snr_array
from rtrimimo.testing import reference_link_config


# ============================================================================
# Power Allocation Tests
# ============================================================================


def test_optimal_alpha_reference_point():
    """Test the 4x4, T = 100, 0 dB ideal-hardware optimum."""
    assert optimal_alpha(1.0, 100, 4, 4, 0.0) == pytest.approx(0.78111, abs=1e-5)


def test_optimal_alpha_degenerate_s():
    """Test s = 0 returns exactly 1/2."""
    # T = 8, T_p = T_d = N_t = 4 and delta = 0 cancel s for every rho
    for rho in (0.01, 1.0, 1e3):
        assert optimal_alpha(rho, 8, 4, 4, 0.0) == 0.5


def test_optimal_alpha_in_open_interval():
    """Test alpha stays inside (0, 1) over a wide range."""
    for rho in np.logspace(-6, 8, 30):
        for t_p in (4, 20, 99):
            for delta in (0.0, 0.08, 0.175):
                alpha = optimal_alpha(float(rho), 100, t_p, 4, delta)
                assert 0.0 < alpha < 1.0


def test_optimal_alpha_beats_grid_search():
    """Test no grid alpha does better than the closed-form optimum."""
    grid = np.arange(1, 10_000) / 10_000
    for rho, t_p, delta in [(0.1, 4, 0.0), (1.0, 10, 0.08), (100.0, 4, 0.175), (1e4, 40, 0.175)]:
        t_d = 100 - t_p
        energy = rho * 100
        alpha = optimal_alpha(rho, 100, t_p, 4, delta)

        best = float(effective_snr_array((1 - alpha) * energy / t_p, alpha * energy / t_d, t_p, 4, delta))
        searched = effective_snr_array((1 - grid) * energy / t_p, grid * energy / t_d, t_p, 4, delta)

        assert float(searched.max()) <= best * (1 + 1e-12)


def test_optimal_alpha_low_snr_limit():
    """Test alpha -> 1/2 as rho -> 0."""
    for t_p in (4, 50, 99):
        assert optimal_alpha(1e-8, 100, t_p, 4, 0.175) == pytest.approx(0.5, abs=1e-3)


def test_alpha_high_snr_limit_reference():
    """Test the high-SNR limit at T_p = 4, T_d = 96, ideal hardware."""
    limit = alpha_high_snr_limit(4, 96, 4, 0.0)

    assert limit == pytest.approx(0.83048, abs=1e-5)
    assert optimal_alpha(1e8, 100, 4, 4, 0.0) == pytest.approx(limit, abs=1e-3)


def test_alpha_high_snr_limit_with_impairments():
    """Test the limit is approached with impairments and long training."""
    for t_p in (4, 30, 80):
        for delta in (0.08, 0.175):
            limit = alpha_high_snr_limit(t_p, 100 - t_p, 4, delta)
            assert optimal_alpha(1e8, 100, t_p, 4, delta) == pytest.approx(limit, abs=1e-3)


def test_optimal_alpha_bounds():
    """Test out-of-range inputs name the violated bound."""
    with pytest.raises(ConstraintViolationError, match="rho > 0"):
        optimal_alpha(0.0, 100, 4, 4, 0.0)
    with pytest.raises(ConstraintViolationError, match="t_p"):
        optimal_alpha(1.0, 100, 3, 4, 0.0)
    with pytest.raises(ConstraintViolationError, match="t_p"):
        optimal_alpha(1.0, 100, 100, 4, 0.0)


def test_joint_operating_point():
    """Test the operating point uses the optimal alpha."""
    config = reference_link_config()
    split, rho_eff = joint_operating_point(config, 4)

    assert split.alpha == pytest.approx(0.78111, abs=1e-5)
    assert split.t_d == 96
    assert rho_eff.value > 0


# ============================================================================
# Training Length Search Tests
# ============================================================================


@pytest.mark.parametrize("snr_db", [-10.0, 0.0, 10.0, 20.0, 30.0])
def test_ideal_hardware_trains_minimally(snr_db):
    """Test delta = 0 always picks t_p = n_tx."""
    design = optimize_training_length(reference_link_config(snr=db_to_linear(snr_db)))

    assert design.t_p == 4
    assert design.mode == PowerMode.JOINT_POWER
    assert len(design.candidate_rates) == 96
    assert design.rate.bits_per_use == max(design.candidate_rates)


def test_impairments_inflate_training():
    """Test delta = 0.175 at 30 dB trains with more than n_tx pilots."""
    design = optimize_training_length(reference_link_config(snr=db_to_linear(30.0), delta=0.175))

    assert design.t_p > 4
    assert design.candidate_rates[design.t_p - 4] == design.rate.bits_per_use


def test_design_rate_matches_closed_form():
    """Test the reported rate re-evaluates to the same value."""
    config = reference_link_config(snr=10.0, delta=0.08)
    design = optimize_training_length(config)

    rate = closed_form_rate(design.rho_eff, 4, 4, design.t_d, 100)
    assert rate.bits_per_use == pytest.approx(design.rate.bits_per_use, rel=1e-14)


def test_equal_power_search():
    """Test equal power fixes alpha = t_d / T."""
    design = optimize_training_length(reference_link_config(snr=10.0, delta=0.08), PowerMode.EQUAL_POWER)

    assert design.mode == PowerMode.EQUAL_POWER
    assert design.alpha == pytest.approx(design.t_d / 100, abs=1e-12)


def test_joint_power_never_worse_than_equal_power():
    """Test optimizing alpha cannot lose rate."""
    for snr_db in (-10.0, 10.0, 30.0):
        config = reference_link_config(snr=db_to_linear(snr_db), delta=0.175)
        joint = optimize_training_length(config, PowerMode.JOINT_POWER)
        equal = optimize_training_length(config, PowerMode.EQUAL_POWER)

        assert joint.rate.bits_per_use >= equal.rate.bits_per_use * (1 - 1e-12)


def test_search_worker_independent():
    """Test the parallel search returns the same design."""
    config = reference_link_config(snr=db_to_linear(20.0), delta=0.175)

    assert optimize_training_length(config, max_workers=4) == optimize_training_length(config)


def test_search_minimal_block():
    """Test T = n_tx + 1 has a single candidate."""
    design = optimize_training_length(LinkConfig(n_tx=2, n_rx=2, coherence=3, snr=5.0))

    assert design.t_p == 2
    assert design.candidate_rates == (design.rate.bits_per_use,)


def test_search_reports_failing_training_length(monkeypatch):
    """Test a rate failure names the training length being scored."""
    monkeypatch.setattr(rate_module, "CONDITION_LIMIT", 0.5)

    with pytest.raises(NumericalInstabilityError) as excinfo:
        optimize_training_length(reference_link_config())

    assert excinfo.value.t_p == 4
    assert "t_p = 4" in str(excinfo.value)


def test_search_logs_result(caplog):
    """Test the chosen training length is logged at INFO."""
    with caplog.at_level(logging.INFO, logger="rtrimimo.optimize"):
        optimize_training_length(reference_link_config())

    assert any("Optimal t_p=4" in record.message for record in caplog.records)


# ============================================================================
# Rate Gain Tests
# ============================================================================


def test_rate_gain_ideal_hardware_is_zero():
    """Test the gain vanishes when t_p = n_tx is already optimal."""
    for snr_db in (0.0, 30.0):
        assert relative_rate_gain(reference_link_config(), db_to_linear(snr_db)) == 0.0


def test_rate_gain_with_impairments():
    """Test impairments make longer training pay off at 30 dB."""
    rho = db_to_linear(30.0)
    high = relative_rate_gain(reference_link_config(delta=0.175), rho)
    low = relative_rate_gain(reference_link_config(delta=0.08), rho)

    assert high > 0.0
    assert high >= low >= 0.0


def test_rate_gain_ignores_config_snr():
    """Test the rho argument replaces the configured SNR."""
    rho = db_to_linear(20.0)

    assert relative_rate_gain(reference_link_config(snr=0.01, delta=0.175), rho) == relative_rate_gain(
        reference_link_config(snr=5.0, delta=0.175), rho
    )
