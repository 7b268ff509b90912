"""
Shared fixtures.
"""

import shutil
from pathlib import Path

import pytest


FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden"
FIXTURE_KEY = "riverine__historical__1980__rp100__WATCH"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def assess_manifest(tmp_path) -> Path:
    """Copy of the three-asset bundle; returns its manifest path."""
    target = tmp_path / "bundle"
    shutil.copytree(FIXTURES / "assess", target)
    return target / "manifest.json"


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ("HAZCELL_LOG", "HAZCELL_WORKERS", "HAZCELL_CHUNK_SIZE", "HAZCELL_UNIT_COST"):
        monkeypatch.delenv(name, raising=False)
