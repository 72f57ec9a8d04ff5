"""Configuration management for rtrimimo."""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from rtrimimo.exceptions import ConfigurationError

DEFAULT_CONFIG_FILES = [
    "rtrimimo.yaml",
    "rtrimimo.yml",
    "rtrimimo.json",
]

# Top-level keys of an experiment file that configure the runtime, not the experiment.
SETTINGS_SECTIONS = ("simulation", "output")


class SimulationConfig(BaseSettings):
    """Monte-Carlo execution configuration."""

    max_workers: int = Field(default=4, ge=1, description="Number of parallel workers")
    block_size: int = Field(
        default=2000, ge=1, description="Trials per counter-based substream block"
    )

    model_config = SettingsConfigDict(env_prefix="RTRIMIMO_SIM_")


class OutputConfig(BaseSettings):
    """Result file configuration."""

    plot: bool = Field(default=False, description="Write SVG plots next to the CSVs")
    significant_digits: int = Field(default=12, ge=1, le=17, description="Digits in CSV values")

    model_config = SettingsConfigDict(env_prefix="RTRIMIMO_OUTPUT_")


class RTRIMimoConfig(BaseSettings):
    """Main rtrimimo configuration."""

    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @staticmethod
    def read_file(file_path: str) -> Dict[str, Any]:
        """
        Read a JSON or YAML file into a dictionary.

        Args:
            file_path: Path to a .json, .yaml or .yml file

        Returns:
            Parsed mapping (empty for an empty file)

        Raises:
            ConfigurationError: If the file is missing or malformed
        """
        path = Path(file_path)
        if not path.exists():
            raise ConfigurationError("file not found", config_file=file_path)

        try:
            with open(path, "r", encoding="utf-8") as f:
                if path.suffix.lower() == ".json":
                    data = json.load(f)
                else:
                    data = yaml.safe_load(f)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigurationError(f"cannot parse file: {e}", config_file=file_path) from e

        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError("top level must be a mapping", config_file=file_path)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], config_file: Optional[str] = None) -> "RTRIMimoConfig":
        """Build configuration from the settings sections of a mapping."""
        try:
            sections: Dict[str, Any] = {}
            if "simulation" in data:
                sections["simulation"] = SimulationConfig(**data["simulation"])
            if "output" in data:
                sections["output"] = OutputConfig(**data["output"])
            return cls(**sections)
        except (ValidationError, TypeError) as e:
            raise ConfigurationError(str(e), config_file=config_file) from e

    @classmethod
    def from_file(cls, file_path: str) -> "RTRIMimoConfig":
        """
        Load configuration from a JSON or YAML file.

        Args:
            file_path: Path to config file

        Returns:
            RTRIMimoConfig instance
        """
        return cls.from_dict(cls.read_file(file_path), config_file=file_path)

    @classmethod
    def load(cls, config_path: Optional[str] = None) -> "RTRIMimoConfig":
        """
        Load configuration from file or environment.

        Args:
            config_path: Optional path to config file

        Returns:
            RTRIMimoConfig instance
        """
        if config_path:
            return cls.from_file(config_path)

        for path in DEFAULT_CONFIG_FILES:
            if Path(path).exists():
                return cls.from_file(path)

        # Fall back to environment variables
        return cls()

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        return self.model_dump()


def load_experiment_file(file_path: str) -> Tuple[Dict[str, Any], RTRIMimoConfig]:
    """
    Split an experiment file into ExperimentSpec fields and runtime settings.

    Args:
        file_path: Path to a JSON or YAML experiment file

    Returns:
        Tuple of (spec fields, settings)
    """
    data = RTRIMimoConfig.read_file(file_path)
    settings = RTRIMimoConfig.from_dict(data, config_file=file_path)
    spec_fields = {key: value for key, value in data.items() if key not in SETTINGS_SECTIONS}
    return spec_fields, settings
