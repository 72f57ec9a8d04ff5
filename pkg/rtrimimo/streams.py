"""Reproducible random streams and block-parallel Monte-Carlo execution."""

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from rtrimimo.exceptions import ConstraintViolationError
from rtrimimo.models import U64_MAX

logger = logging.getLogger(__name__)

Shape = Union[int, Tuple[int, ...]]

# Kernel signature: (trials in this block, block stream) -> per-trial values.
BlockKernel = Callable[[int, "RandomSource"], np.ndarray]

DEFAULT_BLOCK_SIZE = 2000


def derive_stream_id(*parts: Union[int, str]) -> int:
    """Hash an identifier tuple to a 64-bit stream id.

    blake2b keeps the mapping identical on every platform and Python build,
    which the built-in ``hash`` does not.
    """
    digest = hashlib.blake2b(digest_size=8)
    for part in parts:
        digest.update(repr(part).encode("utf-8"))
        digest.update(b"\x00")
    return int.from_bytes(digest.digest(), "little")


class RandomSource:
    """A (seed, stream_id) pair bound to its own PCG64 generator.

    Identical pairs replay identical samples. Sampling mutates only this
    source, so distinct sources can be used from different threads.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if not 0 <= value <= U64_MAX:
                raise ConstraintViolationError(f"0 <= {name} <= 2**64 - 1", value)
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._generator: Optional[np.random.Generator] = None

    @classmethod
    def for_experiment(cls, seed: int, experiment_id: str, index: int = 0) -> "RandomSource":
        """Stream for grid point ``index`` of a named experiment."""
        return cls(seed, derive_stream_id(experiment_id, index))

    def substream(self, index: int) -> "RandomSource":
        """Counter-based child stream; independent of how many others exist."""
        return RandomSource(self.seed, derive_stream_id(self.stream_id, index))

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
            self._generator = np.random.Generator(np.random.PCG64(sequence))
        return self._generator

    def complex_normal(self, shape: Shape, variance: float = 1.0) -> np.ndarray:
        """Circularly-symmetric complex Gaussian samples with the given variance.

        Real and imaginary parts are independent with variance/2 each; the
        real block is drawn before the imaginary block.
        """
        real = self.generator.standard_normal(shape)
        imag = self.generator.standard_normal(shape)
        return np.sqrt(variance / 2.0) * (real + 1j * imag)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream_id={self.stream_id})"


def block_sizes(trials: int, block_size: int) -> List[int]:
    """Split ``trials`` into full blocks plus one remainder block."""
    if trials < 1:
        raise ConstraintViolationError("trials >= 1", trials)
    if block_size < 1:
        raise ConstraintViolationError("block_size >= 1", block_size)
    full, rest = divmod(trials, block_size)
    return [block_size] * full + ([rest] if rest else [])


def run_blocks(
    kernel: BlockKernel,
    trials: int,
    rng: RandomSource,
    block_size: int = DEFAULT_BLOCK_SIZE,
    max_workers: int = 1,
) -> np.ndarray:
    """
    Run a Monte-Carlo kernel over ``trials`` trials in fixed-size blocks.

    Block b always uses ``rng.substream(b)`` and results are concatenated in
    block order, so the output does not depend on ``max_workers``.

    Args:
        kernel: Callable returning one value per trial of its block
        trials: Total number of trials
        rng: Parent random source
        block_size: Trials per block
        max_workers: Number of parallel workers

    Returns:
        1-D array of per-trial values
    """
    sizes = block_sizes(trials, block_size)
    streams = [rng.substream(b) for b in range(len(sizes))]

    def run_one(index: int) -> np.ndarray:
        values = np.asarray(kernel(sizes[index], streams[index]), dtype=float)
        logger.debug(f"Block {index + 1}/{len(sizes)} done ({sizes[index]} trials)")
        return values

    if max_workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            results = list(executor.map(run_one, range(len(sizes))))
    else:
        results = [run_one(index) for index in range(len(sizes))]

    return np.concatenate(results)


def mean_and_std_err(values: np.ndarray) -> Tuple[float, float]:
    """Sample mean and its standard error (0 for a single sample)."""
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / np.sqrt(values.size))
