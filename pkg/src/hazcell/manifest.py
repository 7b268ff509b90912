"""
Scenario manifest parsing and serialization.

A manifest is a JSON document naming the asset file, regions, damage
curves, the hazard layer jobs and which historical layers serve as
baselines. Relative paths resolve against the manifest's directory.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from .model import (
    HISTORICAL_EPOCH,
    CostConfig,
    Generation,
    Hazard,
    ManifestError,
    Pathway,
    Scenario,
    TowerDesign,
    Units,
)


logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"


class CurveBinding(BaseModel):
    """A damage curve file and the hazards it serves."""

    model_config = ConfigDict(frozen=True)

    curve_id: str
    path: str = Field(description="CSV path, or builtin:<name> for a shipped curve")
    hazards: List[Hazard] = Field(default_factory=list)
    tower_design: TowerDesign = TowerDesign.UNKNOWN


class LayerJob(BaseModel):
    """One hazard layer to assess."""

    model_config = ConfigDict(frozen=True)

    scenario: Scenario
    raster: str
    curve_id: str
    units: Optional[Units] = None


class Baseline(BaseModel):
    """Historical reference for one hazard and return period."""

    model_config = ConfigDict(frozen=True)

    hazard: Hazard
    return_period_years: int = Field(gt=0)

    @property
    def group_key(self) -> str:
        return (
            f"{self.hazard.value}__{Pathway.HISTORICAL.value}__{HISTORICAL_EPOCH}"
            f"__rp{self.return_period_years}"
        )


class ScenarioManifest(BaseModel):
    """Everything one assessment run needs."""

    assets: str
    regions: Optional[str] = None
    region_lookup: Optional[str] = None
    unit_cost: Optional[float] = Field(default=None, ge=0)
    unit_cost_by_generation: Dict[Generation, float] = Field(default_factory=dict)
    curves: List[CurveBinding] = Field(default_factory=list)
    jobs: List[LayerJob] = Field(default_factory=list)
    baselines: List[Baseline] = Field(default_factory=list)
    thresholds: Dict[Hazard, float] = Field(default_factory=dict)
    damage_states: Optional[List[float]] = None
    output_dir: Optional[str] = None

    _base_dir: Path = PrivateAttr(default_factory=Path.cwd)

    @model_validator(mode="after")
    def _check_keys(self) -> "ScenarioManifest":
        seen: Set[str] = set()
        for job in self.jobs:
            key = job.scenario.key
            if key in seen:
                raise ValueError(f"duplicate scenario key {key}")
            seen.add(key)

        curve_ids = [c.curve_id for c in self.curves]
        duplicates = sorted({c for c in curve_ids if curve_ids.count(c) > 1})
        if duplicates:
            raise ValueError(f"duplicate curve_id {', '.join(duplicates)}")

        for threshold in self.thresholds.values():
            if threshold < 0:
                raise ValueError(f"exposure threshold {threshold!r} is negative")
        return self

    @property
    def base_dir(self) -> Path:
        return self._base_dir

    def resolve(self, relative: str) -> Path:
        path = Path(relative)
        return path if path.is_absolute() else self._base_dir / path

    def curve_binding(self, curve_id: str) -> CurveBinding:
        for binding in self.curves:
            if binding.curve_id == curve_id:
                return binding
        raise ManifestError(f"unknown curve_id '{curve_id}'")

    def cost_config(self, default_unit_cost: float) -> CostConfig:
        return CostConfig(
            default_unit_cost=self.unit_cost if self.unit_cost is not None else default_unit_cost,
            by_generation=self.unit_cost_by_generation,
        )

    def baseline_for(self, scenario: Scenario) -> Optional[Baseline]:
        for baseline in self.baselines:
            if (
                baseline.hazard == scenario.hazard
                and baseline.return_period_years == scenario.return_period_years
            ):
                return baseline
        return None

    def validate_references(self) -> None:
        """
        Check that every referenced file and curve exists.

        Raises:
            ManifestError: Naming the first dangling path or curve
        """
        for name in ("assets", "regions", "region_lookup"):
            value = getattr(self, name)
            if value is not None and not self.resolve(value).is_file():
                path = str(self.resolve(value))
                raise ManifestError(f"{name} file not found: {path}", path)

        for binding in self.curves:
            if binding.path.startswith(BUILTIN_PREFIX):
                continue
            path = self.resolve(binding.path)
            if not path.is_file():
                raise ManifestError(
                    f"curve {binding.curve_id} file not found: {path}", str(path)
                )

        curve_ids = {c.curve_id for c in self.curves}
        group_keys = {job.scenario.group_key for job in self.jobs}
        for job in self.jobs:
            if job.curve_id not in curve_ids:
                raise ManifestError(
                    f"job {job.scenario.key} references unknown curve_id '{job.curve_id}'"
                )
            path = self.resolve(job.raster)
            if not path.is_file():
                raise ManifestError(
                    f"job {job.scenario.key} raster not found: {path}", str(path)
                )
        for baseline in self.baselines:
            if baseline.group_key not in group_keys:
                raise ManifestError(f"baseline {baseline.group_key} has no jobs")


def parse_manifest(raw: str, base_dir: Union[str, Path, None] = None) -> ScenarioManifest:
    """
    Parse a manifest JSON string.

    Raises:
        ManifestError: If the JSON or the manifest structure is invalid
    """
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ManifestError(f"Invalid JSON format: {e}") from e
    try:
        manifest = ScenarioManifest.model_validate(data)
    except ValueError as e:
        raise ManifestError(f"Invalid manifest format: {e}") from e
    manifest._base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    return manifest


def load_manifest(path: Union[str, Path]) -> ScenarioManifest:
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}", str(path))
    manifest = parse_manifest(path.read_text(encoding="utf-8"), base_dir=path.parent)
    logger.info(f"Loaded manifest {path} with {len(manifest.jobs)} jobs")
    return manifest


def serialize_manifest(manifest: ScenarioManifest) -> str:
    """Deterministic JSON text for a manifest."""
    return json.dumps(manifest.model_dump(mode="json"), indent=2) + "\n"


def write_manifest(manifest: ScenarioManifest, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_manifest(manifest), encoding="utf-8")


def job_counts(manifest: ScenarioManifest) -> Dict[Tuple[str, str], int]:
    """Jobs per (hazard, pathway), for logging and validation summaries."""
    counts: Dict[Tuple[str, str], int] = {}
    for job in manifest.jobs:
        key = (job.scenario.hazard.value, job.scenario.pathway.value)
        counts[key] = counts.get(key, 0) + 1
    return counts
