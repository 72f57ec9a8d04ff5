"""Unit tests for random streams and block execution."""

import numpy as np
import pytest

from rtrimimo.exceptions import ConstraintViolationError
from rtrimimo.streams import (
    RandomSource,
    block_sizes,
    derive_stream_id,
    mean_and_std_err,
    run_blocks,
)
from rtrimimo.testing import ZeroSource


# ============================================================================
# RandomSource Tests
# ============================================================================


def test_same_seed_and_stream_replay():
    """Test identical (seed, stream_id) pairs give bit-identical samples."""
    a = RandomSource(42, 7).complex_normal((3, 5))
    b = RandomSource(42, 7).complex_normal((3, 5))

    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    """Test different stream ids or seeds give different samples."""
    base = RandomSource(42, 7).complex_normal(8)

    assert not np.array_equal(base, RandomSource(42, 8).complex_normal(8))
    assert not np.array_equal(base, RandomSource(43, 7).complex_normal(8))


def test_distinct_streams_uncorrelated():
    """Test two streams pass a cross-correlation independence check."""
    trials = 100_000
    a = RandomSource(1, 1).complex_normal(trials)
    b = RandomSource(1, 2).complex_normal(trials)

    correlation = abs(np.mean(a * np.conj(b)))
    assert correlation <= 4.0 / np.sqrt(trials)


def test_complex_normal_variance():
    """Test real and imaginary parts each carry half the variance."""
    samples = RandomSource(5).complex_normal(200_000, variance=2.0)

    assert np.var(samples.real) == pytest.approx(1.0, rel=0.02)
    assert np.var(samples.imag) == pytest.approx(1.0, rel=0.02)
    assert np.mean(np.abs(samples) ** 2) == pytest.approx(2.0, rel=0.02)


def test_random_source_bounds():
    """Test seeds and stream ids must be unsigned 64-bit."""
    RandomSource(2**64 - 1, 2**64 - 1)

    with pytest.raises(ConstraintViolationError):
        RandomSource(-1)
    with pytest.raises(ConstraintViolationError):
        RandomSource(0, 2**64)


def test_derive_stream_id_stable():
    """Test stream ids are deterministic 64-bit values."""
    first = derive_stream_id("mse_sweep", 3)

    assert first == derive_stream_id("mse_sweep", 3)
    assert first != derive_stream_id("mse_sweep", 4)
    assert first != derive_stream_id("rate_sweep", 3)
    assert 0 <= first < 2**64


def test_substreams_and_experiment_streams():
    """Test substream and for_experiment derive reproducible sources."""
    parent = RandomSource(9, 11)

    assert parent.substream(2).stream_id == parent.substream(2).stream_id
    assert parent.substream(2).stream_id != parent.substream(3).stream_id
    assert RandomSource.for_experiment(9, "validate", 1).stream_id == derive_stream_id("validate", 1)


def test_zero_source():
    """Test the zero source returns zeros of the requested shape."""
    source = ZeroSource()
    draws = source.complex_normal((2, 3), variance=5.0)

    assert draws.shape == (2, 3)
    assert not np.any(draws)
    assert isinstance(source.substream(4), ZeroSource)


# ============================================================================
# Block Execution Tests
# ============================================================================


def test_block_sizes():
    """Test trials split into full blocks plus a remainder."""
    assert block_sizes(10, 4) == [4, 4, 2]
    assert block_sizes(8, 4) == [4, 4]
    assert block_sizes(3, 10) == [3]

    with pytest.raises(ConstraintViolationError):
        block_sizes(0, 10)


def _power_kernel(n, stream):
    return np.abs(stream.complex_normal(n)) ** 2


def test_run_blocks_independent_of_workers():
    """Test block results do not depend on the worker count."""
    rng = RandomSource(123, 4)

    serial = run_blocks(_power_kernel, 1001, rng, block_size=100, max_workers=1)
    parallel = run_blocks(_power_kernel, 1001, rng, block_size=100, max_workers=8)

    assert serial.shape == (1001,)
    assert np.array_equal(serial, parallel)


def test_run_blocks_depends_on_block_size():
    """Test block size selects the substreams (it is part of the experiment)."""
    rng = RandomSource(123, 4)

    a = run_blocks(_power_kernel, 200, rng, block_size=100)
    b = run_blocks(_power_kernel, 200, rng, block_size=50)

    assert not np.array_equal(a, b)


def test_mean_and_std_err():
    """Test the mean and its standard error."""
    mean, std_err = mean_and_std_err(np.array([1.0, 2.0, 3.0, 4.0]))

    assert mean == 2.5
    assert std_err == pytest.approx(np.std([1.0, 2.0, 3.0, 4.0], ddof=1) / 2.0)
    assert mean_and_std_err(np.array([5.0])) == (5.0, 0.0)
