"""Testing utilities for rtrimimo."""

from rtrimimo.models import db_to_linear
from rtrimimo.testing.fixtures import create_experiment_data, reference_link_config
from rtrimimo.testing.sources import ZeroSource

__all__ = ["ZeroSource", "create_experiment_data", "db_to_linear", "reference_link_config"]
