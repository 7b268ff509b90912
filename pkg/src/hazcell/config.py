"""
Configuration management for hazcell.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from .model import DEFAULT_UNIT_COST, CostConfig, Generation, Hazard


DEFAULT_CHUNK_SIZE = 65536
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class Config:
    """
    Runtime settings for an assessment run.

    Manifest values take precedence over these defaults; CLI flags take
    precedence over both.
    """

    # Logging
    log_level: str = "WARNING"

    # Parallelism
    workers: int = 0
    chunk_size: int = DEFAULT_CHUNK_SIZE

    # Costs
    unit_cost: float = DEFAULT_UNIT_COST
    unit_cost_by_generation: Dict[str, float] = field(default_factory=dict)

    # Vulnerability
    damage_state_thresholds: List[float] = field(
        default_factory=lambda: [0.1, 0.25, 0.5, 0.9]
    )
    exposure_thresholds: Dict[str, Optional[float]] = field(default_factory=dict)

    @classmethod
    def load(cls, config_path: Optional[str] = None) -> "Config":
        """
        Load configuration from file or environment variables.

        Args:
            config_path: Optional path to a JSON configuration file

        Returns:
            Configuration instance
        """
        load_dotenv()
        config_data: Dict[str, Any] = {}

        if config_path and os.path.exists(config_path):
            with open(config_path, "r") as f:
                config_data = json.load(f)

        env_mapping = {
            "HAZCELL_LOG": "log_level",
            "HAZCELL_WORKERS": "workers",
            "HAZCELL_CHUNK_SIZE": "chunk_size",
            "HAZCELL_UNIT_COST": "unit_cost",
        }

        for env_var, config_key in env_mapping.items():
            env_value = os.getenv(env_var)
            if env_value is None or env_value == "":
                continue
            try:
                if config_key in ["workers", "chunk_size"]:
                    config_data[config_key] = int(env_value)
                elif config_key == "unit_cost":
                    config_data[config_key] = float(env_value)
                else:
                    config_data[config_key] = env_value.upper()
            except ValueError:
                raise ValueError(f"{env_var} must be numeric, got '{env_value}'") from None

        config = cls(**config_data)
        config.log_level = check_log_level(config.log_level)
        if config.chunk_size <= 0:
            raise ValueError(f"chunk_size must be positive, got {config.chunk_size}")
        if config.workers < 0:
            raise ValueError(f"workers must be 0 (auto) or positive, got {config.workers}")
        return config

    def save(self, config_path: str) -> None:
        """
        Save configuration to file.

        Args:
            config_path: Path to save configuration file
        """
        config_dict = {
            "log_level": self.log_level,
            "workers": self.workers,
            "chunk_size": self.chunk_size,
            "unit_cost": self.unit_cost,
            "unit_cost_by_generation": self.unit_cost_by_generation,
            "damage_state_thresholds": self.damage_state_thresholds,
            "exposure_thresholds": self.exposure_thresholds,
        }

        with open(config_path, "w") as f:
            json.dump(config_dict, f, indent=2)

    def cost_config(self) -> CostConfig:
        return CostConfig(
            default_unit_cost=self.unit_cost,
            by_generation={Generation(k): v for k, v in self.unit_cost_by_generation.items()},
        )

    def exposure_threshold(self, hazard: Hazard) -> Optional[float]:
        return self.exposure_thresholds.get(hazard.value)


def check_log_level(level: str) -> str:
    """
    Upper-cased logging level name.

    Raises:
        ValueError: If the name is not a standard logging level
    """
    name = level.strip().upper()
    if name not in LOG_LEVELS:
        raise ValueError(f"log level must be one of {', '.join(LOG_LEVELS)}, got '{level}'")
    return name


def configure_logging(level: str = "WARNING") -> None:
    """Configure root logging the same way for every entry point."""
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, force=True)
