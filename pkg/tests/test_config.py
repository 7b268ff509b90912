"""
Tests for runtime configuration.
"""

import json
import logging
from dataclasses import fields

import pytest

from hazcell.config import (
    DEFAULT_CHUNK_SIZE,
    LOG_FORMAT,
    Config,
    check_log_level,
    configure_logging,
)
from hazcell.model import Generation, Hazard


class TestConfig:
    """Config loading, overrides and persistence."""

    def test_defaults(self):
        """Test default settings."""
        config = Config()
        assert config.log_level == "WARNING"
        assert config.workers == 0
        assert config.chunk_size == DEFAULT_CHUNK_SIZE
        assert config.unit_cost == 33333.00
        assert config.damage_state_thresholds == [0.1, 0.25, 0.5, 0.9]

    def test_load_from_file(self, tmp_path):
        """Test loading settings from a JSON file."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"workers": 3, "exposure_thresholds": {"cyclone": 119.0}}))
        config = Config.load(str(path))
        assert config.workers == 3
        assert config.exposure_threshold(Hazard.CYCLONE) == 119.0
        assert config.exposure_threshold(Hazard.RIVERINE) is None

    def test_missing_file_uses_defaults(self, tmp_path):
        """A missing config file falls back to defaults."""
        assert Config.load(str(tmp_path / "absent.json")) == Config()

    def test_environment_overrides_file(self, tmp_path, monkeypatch):
        """Test that environment variables win over the file."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"workers": 3, "unit_cost": 10.0}))
        monkeypatch.setenv("HAZCELL_WORKERS", "8")
        monkeypatch.setenv("HAZCELL_UNIT_COST", "45000.5")
        monkeypatch.setenv("HAZCELL_LOG", "debug")
        config = Config.load(str(path))
        assert (config.workers, config.unit_cost, config.log_level) == (8, 45000.5, "DEBUG")

    def test_non_numeric_environment_value(self, monkeypatch):
        """Test that a non-numeric environment value names its variable."""
        monkeypatch.setenv("HAZCELL_CHUNK_SIZE", "lots")
        with pytest.raises(ValueError, match="HAZCELL_CHUNK_SIZE must be numeric"):
            Config.load()

    def test_nonpositive_chunk_size(self, monkeypatch):
        """Test that chunk_size must be positive."""
        monkeypatch.setenv("HAZCELL_CHUNK_SIZE", "0")
        with pytest.raises(ValueError, match="chunk_size must be positive"):
            Config.load()

    def test_unknown_log_level(self, monkeypatch):
        """Test that an unknown HAZCELL_LOG value is a validation error."""
        monkeypatch.setenv("HAZCELL_LOG", "verbose")
        with pytest.raises(ValueError, match="log level must be one of"):
            Config.load()

    def test_log_level_from_file_is_checked(self, tmp_path, monkeypatch):
        """Test that a log level from the config file is checked too."""
        monkeypatch.delenv("HAZCELL_LOG", raising=False)
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"log_level": "loud"}))
        with pytest.raises(ValueError, match="got 'loud'"):
            Config.load(str(path))

    def test_save_and_load(self, tmp_path):
        """Test save followed by load."""
        path = tmp_path / "saved.json"
        config = Config(workers=2, unit_cost_by_generation={"5G": 60000.0})
        config.save(str(path))
        assert Config.load(str(path)) == config
        assert set(json.loads(path.read_text())) == {f.name for f in fields(Config)}

    def test_cost_config(self):
        """Test per-generation unit costs."""
        cost = Config(unit_cost=100.0, unit_cost_by_generation={"2G": 5.0}).cost_config()
        assert cost.unit_cost_for(Generation.G2) == 5.0
        assert cost.unit_cost_for(Generation.G4) == 100.0


class TestCheckLogLevel:
    """Log level names."""

    @pytest.mark.parametrize("level", ["debug", " Info ", "CRITICAL"])
    def test_accepts_standard_names(self, level):
        """Test that standard names are accepted in any case."""
        assert check_log_level(level) == level.strip().upper()

    def test_rejects_other_names(self):
        """Test that non-standard names raise ValueError."""
        with pytest.raises(ValueError, match="verbose"):
            check_log_level("verbose")


class TestConfigureLogging:
    """Root logger setup."""

    def test_level_and_format(self):
        """Test the root logger level and format."""
        configure_logging("info")
        root = logging.getLogger()
        assert root.level == logging.INFO
        assert root.handlers[0].formatter._fmt == LOG_FORMAT
        configure_logging("WARNING")
