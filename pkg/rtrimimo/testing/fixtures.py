"""Reference configurations and helpers for tests."""

from typing import Any, Dict, List, Optional

from rtrimimo.models import DEFAULT_DELTA_LIST, LinkConfig


def reference_link_config(snr: float = 1.0, delta: float = 0.0) -> LinkConfig:
    """The 4x4, T = 100 link used by the default experiments."""
    return LinkConfig(n_tx=4, n_rx=4, coherence=100, delta=delta, snr=snr)


def create_experiment_data(
    kind: str,
    snr_grid_db: Optional[List[float]] = None,
    delta_list: Optional[List[float]] = None,
    trials: int = 200,
    seed: int = 7,
    **overrides: Any,
) -> Dict[str, Any]:
    """
    Build a raw experiment mapping as it would appear in a JSON config file.

    Args:
        kind: Experiment kind value (e.g. "mse_sweep")
        snr_grid_db: SNR grid in dB (default: 0 and 10 dB)
        delta_list: Impairment levels (default: ideal plus the LTE EVM range)
        trials: Monte-Carlo trials per point
        seed: Root seed
        **overrides: Any other ExperimentSpec field

    Returns:
        Mapping accepted by ExperimentSpec.parse
    """
    data = {
        "kind": kind,
        "config": {"n_tx": 4, "n_rx": 4, "coherence": 100},
        "snr_grid_db": snr_grid_db if snr_grid_db is not None else [0.0, 10.0],
        "delta_list": delta_list if delta_list is not None else list(DEFAULT_DELTA_LIST),
        "trials": trials,
        "seed": seed,
    }
    data.update(overrides)
    return data
