"""
Assessment engine.

Assets are cut into fixed-size contiguous partitions that are assessed in
parallel and concatenated back in partition order, so the worker count
never changes a result.
"""

import logging
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import (
    Dict,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .config import DEFAULT_CHUNK_SIZE, Config
from .ingest import (
    default_curve_path,
    default_region_lookup,
    read_asset_table,
    read_curve,
    read_raster,
    read_region_lookup,
    read_regions,
)
from .manifest import BUILTIN_PREFIX, CurveBinding, ScenarioManifest
from .model import (
    HAZARD_UNITS,
    UNASSIGNED,
    UNKNOWN,
    AggregateResult,
    Asset,
    AssetTable,
    DamageCurve,
    DamageState,
    ExposureRecord,
    Hazard,
    HazardRaster,
    IngestReport,
    InvalidInputError,
    ManifestError,
    Region,
    Scenario,
    TowerDesign,
    UnitMismatchError,
    Units,
    to_cents,
)
from .spatial import RegionIndex, sample_many
from .vulnerability import (
    DEFAULT_DAMAGE_STATE_THRESHOLDS,
    CurveSet,
    classify_damage_states,
    damage_fractions,
    exposure_threshold_for,
    select_curve,
)


logger = logging.getLogger(__name__)

SCENARIO_FIELDS = ("hazard", "pathway", "epoch", "return_period_years", "model_member")
GROUP_KEYS = (
    "region_id",
    "continent",
    "income_group",
    "generation",
    "country_iso3",
    "scenario_key",
) + SCENARIO_FIELDS

RECORD_COLUMNS = (
    "asset_id",
    "region_id",
    "continent",
    "income_group",
    "country_iso3",
    "generation",
    "lon",
    "lat",
    "intensity",
    "exposed",
    "damage_fraction",
    "damage_state",
    "damage_cost",
)

REGION_COLUMNS = (
    "region_id",
    "name",
    "continent",
    "income_group",
    "country_iso3",
    "cell_count",
    "damage_cost_total",
)


class ResolvedJob(NamedTuple):
    scenario: Scenario
    raster_path: Path
    curve: DamageCurve
    units: Units


# ---------------------------------------------------------------------------
# Jobs
# ---------------------------------------------------------------------------


def load_curve(manifest: ScenarioManifest, binding: CurveBinding) -> DamageCurve:
    if binding.path.startswith(BUILTIN_PREFIX):
        name = binding.path[len(BUILTIN_PREFIX):]
        path = default_curve_path(name)
        if not path.is_file():
            raise ManifestError(f"unknown builtin curve '{name}'")
        return read_curve(path, curve_id=binding.curve_id)
    return read_curve(manifest.resolve(binding.path), curve_id=binding.curve_id)


def load_curves(manifest: ScenarioManifest) -> Dict[str, DamageCurve]:
    return {binding.curve_id: load_curve(manifest, binding) for binding in manifest.curves}


def enumerate_jobs(
    manifest: ScenarioManifest, curves: Optional[Mapping[str, DamageCurve]] = None
) -> List[ResolvedJob]:
    """
    Jobs ordered by hazard, pathway, epoch, return period and model member.

    Raises:
        ManifestError: If a raster path or curve reference does not resolve
    """
    manifest.validate_references()
    curves = curves if curves is not None else load_curves(manifest)
    jobs = []
    for job in manifest.jobs:
        if job.curve_id not in curves:
            raise ManifestError(f"job {job.scenario.key} references unknown curve '{job.curve_id}'")
        units = job.units or HAZARD_UNITS[job.scenario.hazard]
        curve = curves[job.curve_id]
        if curve.intensity_unit != units:
            raise UnitMismatchError(
                f"job {job.scenario.key} is in {units.value} but curve {curve.curve_id} "
                f"expects {curve.intensity_unit.value}"
            )
        jobs.append(
            ResolvedJob(job.scenario, manifest.resolve(job.raster), curve, units)
        )
    return sorted(jobs, key=lambda j: j.scenario.sort_key())


def curve_set_for(
    manifest: ScenarioManifest, job: ResolvedJob, curves: Mapping[str, DamageCurve]
) -> CurveSet:
    """The job's curve as hazard default plus any tower-design overrides."""
    curve_set = CurveSet()
    curve_set.register(job.curve, job.scenario.hazard)
    for binding in manifest.curves:
        if binding.tower_design != TowerDesign.UNKNOWN and job.scenario.hazard in binding.hazards:
            curve_set.register(curves[binding.curve_id], job.scenario.hazard, binding.tower_design)
    return curve_set


# ---------------------------------------------------------------------------
# Per-layer assessment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionCatalogue:
    """Region attributes by index position; the extra last row is 'unassigned'."""

    region_id: np.ndarray
    continent: np.ndarray
    income_group: np.ndarray
    country_iso3: np.ndarray

    @classmethod
    def from_index(cls, index: Optional[RegionIndex]) -> "RegionCatalogue":
        regions: List[Region] = index.regions if index is not None else []

        def column(values: Iterable[str], last: str) -> np.ndarray:
            return np.array(list(values) + [last], dtype=object)

        return cls(
            region_id=column((r.region_id for r in regions), UNASSIGNED),
            continent=column((r.continent for r in regions), UNKNOWN),
            income_group=column((r.income_group.value for r in regions), UNKNOWN),
            country_iso3=column((r.country_iso3 for r in regions), UNKNOWN),
        )


@dataclass(frozen=True)
class LayerResult:
    """Columnar exposure records for one layer, in asset order."""

    scenario: Scenario
    frame: pd.DataFrame

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def cell_count(self) -> int:
        return int(self.frame["exposed"].sum())

    @property
    def damage_cost_total(self) -> float:
        return math.fsum(self.frame["damage_cost"].tolist())

    def tidy(self) -> pd.DataFrame:
        """Records with scenario columns attached, ready for ``aggregate``."""
        frame = self.frame.copy()
        frame["scenario_key"] = self.scenario.key
        for name in SCENARIO_FIELDS:
            value = getattr(self.scenario, name)
            frame[name] = getattr(value, "value", value)
        return frame

    def exposed_only(self) -> pd.DataFrame:
        return self.frame[self.frame["exposed"].to_numpy()].reset_index(drop=True)

    def to_records(self) -> List[ExposureRecord]:
        records = []
        for row in self.frame.itertuples(index=False):
            records.append(
                ExposureRecord(
                    asset_id=row.asset_id,
                    scenario=self.scenario,
                    intensity=None if math.isnan(row.intensity) else float(row.intensity),
                    exposed=bool(row.exposed),
                    damage_fraction=float(row.damage_fraction),
                    damage_cost=float(row.damage_cost),
                    damage_state=row.damage_state,
                    region_id=row.region_id,
                    continent=row.continent,
                    income_group=row.income_group,
                    country_iso3=row.country_iso3,
                    generation=row.generation,
                )
            )
        return records


def _partitions(n: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]


def _assess_partition(
    assets: AssetTable,
    raster: HazardRaster,
    curves_by_design: Mapping[str, DamageCurve],
    thresholds: Mapping[str, float],
    damage_state_thresholds: Sequence[float],
    index: Optional[RegionIndex],
    catalogue: RegionCatalogue,
) -> Dict[str, np.ndarray]:
    intensity = sample_many(raster, assets.lon, assets.lat)
    limit = np.zeros(len(assets))
    for design, value in thresholds.items():
        limit[assets.tower_design == design] = value
    with np.errstate(invalid="ignore"):
        exposed = ~np.isnan(intensity) & (intensity > limit)

    fraction = np.zeros(len(assets))
    for design in sorted(set(assets.tower_design[exposed].tolist())):
        mask = exposed & (assets.tower_design == design)
        fraction[mask] = damage_fractions(curves_by_design[design], intensity[mask])
    cost = fraction * assets.unit_cost
    state = np.where(
        exposed,
        classify_damage_states(fraction, damage_state_thresholds),
        DamageState.DS0_NONE.value,
    )

    if index is not None:
        positions = index.locate_many(assets.lon, assets.lat)
    else:
        positions = np.full(len(assets), -1, dtype=np.int64)

    return {
        "asset_id": assets.asset_id,
        "region_id": catalogue.region_id[positions],
        "continent": catalogue.continent[positions],
        "income_group": catalogue.income_group[positions],
        "country_iso3": np.where(
            assets.country_iso3 == UNKNOWN, catalogue.country_iso3[positions], assets.country_iso3
        ),
        "generation": assets.generation,
        "lon": assets.lon,
        "lat": assets.lat,
        "intensity": intensity,
        "exposed": exposed,
        "damage_fraction": fraction,
        "damage_state": state,
        "damage_cost": cost,
    }


def _n_jobs(workers: int) -> int:
    return -1 if workers == 0 else workers


def default_threshold(hazard: Hazard, curve: DamageCurve) -> float:
    """Flood layers count any depth above 0; cyclones start at the curve's first damage."""
    if hazard == Hazard.CYCLONE:
        return exposure_threshold_for(curve)
    return 0.0


def assess_layer_table(
    assets: Union[AssetTable, Sequence[Asset]],
    raster: HazardRaster,
    curve: DamageCurve,
    scenario: Scenario,
    region_index: Optional[RegionIndex] = None,
    *,
    curve_set: Optional[CurveSet] = None,
    threshold: Optional[float] = None,
    damage_state_thresholds: Sequence[float] = DEFAULT_DAMAGE_STATE_THRESHOLDS,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> LayerResult:
    """
    Intersect assets with one hazard layer.

    Args:
        assets: Assets as a table or a list
        raster: Hazard layer
        curve: Hazard default damage curve
        scenario: Scenario the layer represents
        region_index: Regions to assign assets to; all unassigned if None
        curve_set: Tower-design specific curves; ``curve`` is used when absent
        threshold: Exposure threshold for every design; when None each design
            uses ``default_threshold`` of its own curve
        damage_state_thresholds: Fraction cut points for DS1..DS5
        workers: Parallel workers, 0 for one per core
        chunk_size: Assets per partition

    Returns:
        One record per asset in input order

    Raises:
        UnitMismatchError: If a curve's unit differs from the raster's
    """
    if not isinstance(assets, AssetTable):
        assets = AssetTable.from_assets(assets)
    if curve_set is None:
        curve_set = CurveSet()
        curve_set.register(curve, scenario.hazard)
    curves_by_design = {
        design.value: select_curve(curve_set, scenario.hazard, design) for design in TowerDesign
    }
    for selected in curves_by_design.values():
        if selected.intensity_unit != raster.units:
            raise UnitMismatchError(
                f"curve {selected.curve_id} is in {selected.intensity_unit.value} "
                f"but the {scenario.key} raster is in {raster.units.value}"
            )
    thresholds = {
        design: default_threshold(scenario.hazard, selected) if threshold is None else threshold
        for design, selected in curves_by_design.items()
    }
    if chunk_size <= 0:
        raise InvalidInputError(f"chunk_size must be positive, got {chunk_size}")

    catalogue = RegionCatalogue.from_index(region_index)
    bounds = _partitions(len(assets), chunk_size)
    logger.debug(f"Assessing {scenario.key}: {len(assets)} assets in {len(bounds)} partitions")

    parts = Parallel(n_jobs=_n_jobs(workers), prefer="threads")(
        delayed(_assess_partition)(
            assets.slice(start, stop),
            raster,
            curves_by_design,
            thresholds,
            damage_state_thresholds,
            region_index,
            catalogue,
        )
        for start, stop in bounds
    )
    if parts:
        columns = {name: np.concatenate([p[name] for p in parts]) for name in RECORD_COLUMNS}
    else:
        columns = {name: np.array([], dtype=object) for name in RECORD_COLUMNS}
        for name in ("lon", "lat", "intensity", "damage_fraction", "damage_cost"):
            columns[name] = np.array([], dtype=np.float64)
        columns["exposed"] = np.array([], dtype=bool)

    result = LayerResult(scenario, pd.DataFrame(columns, columns=list(RECORD_COLUMNS)))
    logger.info(f"Assessed {scenario.key}: {result.cell_count} of {len(result)} assets exposed")
    return result


def assess_layer(
    assets: Union[AssetTable, Sequence[Asset]],
    raster: HazardRaster,
    curve: DamageCurve,
    scenario: Scenario,
    region_index: Optional[RegionIndex] = None,
    **kwargs,
) -> List[ExposureRecord]:
    """One ExposureRecord per asset (see ``assess_layer_table``)."""
    return assess_layer_table(assets, raster, curve, scenario, region_index, **kwargs).to_records()


# ---------------------------------------------------------------------------
# Aggregation and ensembles
# ---------------------------------------------------------------------------


def records_frame(records: Sequence[ExposureRecord]) -> pd.DataFrame:
    rows = []
    for record in records:
        rows.append(
            {
                "asset_id": record.asset_id,
                "region_id": record.region_id,
                "continent": record.continent,
                "income_group": record.income_group.value,
                "country_iso3": record.country_iso3,
                "generation": record.generation.value if record.generation else UNKNOWN,
                "scenario_key": record.scenario.key,
                "hazard": record.scenario.hazard.value,
                "pathway": record.scenario.pathway.value,
                "epoch": record.scenario.epoch,
                "return_period_years": record.scenario.return_period_years,
                "model_member": record.scenario.model_member,
                "exposed": record.exposed,
                "damage_cost": record.damage_cost,
            }
        )
    return pd.DataFrame(rows)


def _plain(value):
    return value.item() if isinstance(value, np.generic) else value


def aggregate(
    records: Union[Sequence[ExposureRecord], pd.DataFrame, LayerResult],
    group_by: Sequence[str] = (),
) -> List[AggregateResult]:
    """
    Exposed cell counts and exact cost totals per group, sorted by group key.

    Raises:
        InvalidInputError: If a group_by key is not a known grouping column
    """
    unknown = [key for key in group_by if key not in GROUP_KEYS]
    if unknown:
        raise InvalidInputError(f"cannot group by {', '.join(unknown)}")

    if isinstance(records, LayerResult):
        frame = records.tidy()
    elif isinstance(records, pd.DataFrame):
        frame = records
    else:
        frame = records_frame(records)
    if frame.empty:
        return []
    missing = [key for key in group_by if key not in frame.columns]
    if missing:
        raise InvalidInputError(f"records lack grouping columns {', '.join(missing)}")

    if group_by:
        groups = frame.groupby(list(group_by), sort=True)
    else:
        groups = [((), frame)]

    results = []
    for key, group in groups:
        key = key if isinstance(key, tuple) else (key,)
        results.append(
            AggregateResult(
                key={name: _plain(value) for name, value in zip(group_by, key)},
                cell_count=int(group["exposed"].sum()),
                total_assets=len(group),
                damage_cost_total=math.fsum(group["damage_cost"].tolist()),
            )
        )
    return results


def member_stats(values: Sequence[float]) -> Tuple[float, float, float]:
    """
    (mean, min, max) of ensemble member values.

    Raises:
        InvalidInputError: If there are no members
    """
    if len(values) == 0:
        raise InvalidInputError("ensemble has no members")
    low, high = min(values), max(values)
    mean = math.fsum(values) / len(values)
    return min(max(mean, low), high), low, high


def mean_count(counts: Sequence[int]) -> int:
    """Mean of member cell counts, rounded half up."""
    if len(counts) == 0:
        raise InvalidInputError("ensemble has no members")
    mean = Decimal(sum(int(c) for c in counts)) / len(counts)
    return int(mean.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def ensemble_stats(
    results: Sequence[AggregateResult], over: str = "model_member"
) -> List[AggregateResult]:
    """
    Collapse results that differ only in ``over`` into one ensemble result.

    The ensemble's cell_count is the mean member count rounded half up and
    its damage_cost_total is the mean member cost.
    """
    groups: Dict[Tuple, List[AggregateResult]] = {}
    for result in results:
        if over not in result.key:
            raise InvalidInputError(f"result {result.key} has no '{over}' key")
        key = tuple(sorted((k, v) for k, v in result.key.items() if k != over))
        groups.setdefault(key, []).append(result)

    collapsed = []
    for key in sorted(groups, key=lambda k: [(name, str(value)) for name, value in k]):
        members = groups[key]
        mean, low, high = member_stats([m.damage_cost_total for m in members])
        collapsed.append(
            AggregateResult(
                key=dict(key),
                cell_count=mean_count([m.cell_count for m in members]),
                total_assets=max(m.total_assets for m in members),
                damage_cost_total=mean,
                members=len(members),
                ensemble_mean=mean,
                ensemble_min=low,
                ensemble_max=high,
            )
        )
    return collapsed


def _as_decimal(value: Union[int, float, Decimal]) -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, (int, np.integer)):
        return Decimal(int(value))
    return Decimal(repr(float(value)))


def pct_change_vs_baseline(
    future: Union[int, float, Decimal], baseline: Union[int, float, Decimal]
) -> Optional[int]:
    """
    Percent change from baseline, rounded half away from zero.

    Returns None (undefined change) when the baseline is zero.

    Raises:
        InvalidInputError: If the baseline is negative
    """
    future_d, baseline_d = _as_decimal(future), _as_decimal(baseline)
    if baseline_d < 0:
        raise InvalidInputError(f"baseline must be nonnegative, got {baseline}")
    if baseline_d == 0:
        return None
    change = (future_d / baseline_d - 1) * 100
    return int(change.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def percent_shares(totals: Mapping[str, Union[int, float, Decimal]]) -> Dict[str, Optional[int]]:
    """Integer percent of the overall total contributed by each group."""
    values = {group: _as_decimal(value) for group, value in totals.items()}
    grand = sum(values.values(), Decimal(0))
    return {
        group: (
            None if grand == 0
            else int((value / grand * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP))
        )
        for group, value in values.items()
    }


def share_by(
    frame: pd.DataFrame, key: str, metric: str = "damage_cost"
) -> Dict[str, Optional[int]]:
    """
    Percent of exposed cells (``metric="cell_count"``) or of damage cost
    contributed by each ``key`` group.
    """
    if key not in GROUP_KEYS:
        raise InvalidInputError(f"cannot group by {key}")
    exposed = frame[frame["exposed"].to_numpy(dtype=bool)] if "exposed" in frame else frame
    if metric == "cell_count":
        totals = exposed.groupby(key).size()
    else:
        totals = exposed.groupby(key)[metric].agg(lambda s: math.fsum(s.tolist()))
    return percent_shares({str(group): value for group, value in totals.items()})


def inventory(assets: AssetTable) -> pd.DataFrame:
    """Asset counts and percent shares per generation."""
    counts = pd.Series(assets.generation, dtype=object).value_counts()
    total = int(counts.sum())
    rows = []
    for generation in sorted(counts.index):
        count = int(counts[generation])
        share = (Decimal(count) / total * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
        rows.append({"generation": generation, "cells": count, "share_pct": str(share)})
    return pd.DataFrame(rows, columns=["generation", "cells", "share_pct"])


# ---------------------------------------------------------------------------
# Whole-manifest runs
# ---------------------------------------------------------------------------


@dataclass
class LayerOutcome:
    """Exposed records and per-region totals for one job."""

    scenario: Scenario
    exposures: pd.DataFrame
    regions: pd.DataFrame
    total_assets: int

    @property
    def cell_count(self) -> int:
        return int(self.regions["cell_count"].sum())

    @property
    def damage_cost_total(self) -> float:
        return math.fsum(self.regions["damage_cost_total"].tolist())

    @property
    def damage_cost_cents(self) -> Decimal:
        """Sum of the rounded region totals, so files reconcile to the cent."""
        return sum((to_cents(v) for v in self.regions["damage_cost_total"]), Decimal("0.00"))


@dataclass(frozen=True)
class LayerSummary:
    """Summary row for one job with its ensemble group's statistics."""

    scenario: Scenario
    total_assets: int
    cell_count: int
    damage_cost: Decimal
    members: int
    cell_count_mean: int
    cell_count_min: int
    cell_count_max: int
    damage_cost_mean: Decimal
    damage_cost_min: Decimal
    damage_cost_max: Decimal
    baseline: Optional[str] = None
    pct_change_count: Optional[int] = None
    pct_change_cost: Optional[int] = None


@dataclass
class AssessmentRun:
    manifest: ScenarioManifest
    asset_report: IngestReport
    regions: List[Region]
    layers: List[LayerOutcome] = field(default_factory=list)
    summary: List[LayerSummary] = field(default_factory=list)

    def layer(self, key: str) -> LayerOutcome:
        for layer in self.layers:
            if layer.scenario.key == key:
                return layer
        raise InvalidInputError(
            f"unknown scenario key '{key}'; valid keys: "
            + ", ".join(layer.scenario.key for layer in self.layers)
        )


def region_table(regions: Sequence[Region]) -> pd.DataFrame:
    """One row per region_id (first part's attributes), sorted, plus 'unassigned'."""
    seen: Dict[str, Region] = {}
    for region in regions:
        seen.setdefault(region.region_id, region)
    rows = [
        {
            "region_id": region_id,
            "name": region.name,
            "continent": region.continent,
            "income_group": region.income_group.value,
            "country_iso3": region.country_iso3,
        }
        for region_id, region in sorted(seen.items())
    ]
    rows.append(
        {
            "region_id": UNASSIGNED,
            "name": "",
            "continent": UNKNOWN,
            "income_group": UNKNOWN,
            "country_iso3": UNKNOWN,
        }
    )
    return pd.DataFrame(rows, columns=list(REGION_COLUMNS[:5]))


def region_totals(layer: LayerResult, table: pd.DataFrame) -> pd.DataFrame:
    """Per-region exposed counts and exact cost sums, in ``table`` order."""
    exposed = layer.exposed_only()
    counts = exposed.groupby("region_id").size()
    costs = exposed.groupby("region_id")["damage_cost"].agg(lambda s: math.fsum(s.tolist()))
    out = table.copy()
    out["cell_count"] = [int(counts.get(r, 0)) for r in out["region_id"]]
    out["damage_cost_total"] = [float(costs.get(r, 0.0)) for r in out["region_id"]]
    return out


def summarize(manifest: ScenarioManifest, layers: Sequence[LayerOutcome]) -> List[LayerSummary]:
    """Per-job rows with ensemble statistics and baseline deltas."""
    groups: Dict[str, List[LayerOutcome]] = {}
    for layer in layers:
        groups.setdefault(layer.scenario.group_key, []).append(layer)

    def count_mean(members: Sequence[LayerOutcome]) -> Decimal:
        return Decimal(sum(m.cell_count for m in members)) / len(members)

    def cost_mean(members: Sequence[LayerOutcome]) -> Decimal:
        total = sum((m.damage_cost_cents for m in members), Decimal(0))
        return (total / len(members)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)

    rows = []
    for layer in layers:
        members = groups[layer.scenario.group_key]
        baseline = manifest.baseline_for(layer.scenario)
        pct_count = pct_cost = None
        baseline_key = None
        if baseline is not None and baseline.group_key in groups:
            baseline_key = baseline.group_key
            reference = groups[baseline_key]
            pct_count = pct_change_vs_baseline(count_mean(members), count_mean(reference))
            pct_cost = pct_change_vs_baseline(cost_mean(members), cost_mean(reference))
        rows.append(
            LayerSummary(
                scenario=layer.scenario,
                total_assets=layer.total_assets,
                cell_count=layer.cell_count,
                damage_cost=layer.damage_cost_cents,
                members=len(members),
                cell_count_mean=mean_count([m.cell_count for m in members]),
                cell_count_min=min(m.cell_count for m in members),
                cell_count_max=max(m.cell_count for m in members),
                damage_cost_mean=cost_mean(members),
                damage_cost_min=min(m.damage_cost_cents for m in members),
                damage_cost_max=max(m.damage_cost_cents for m in members),
                baseline=baseline_key,
                pct_change_count=pct_count,
                pct_change_cost=pct_cost,
            )
        )
    return rows


def load_regions(manifest: ScenarioManifest) -> List[Region]:
    if manifest.regions is None:
        return []
    if manifest.region_lookup is not None:
        lookup = read_region_lookup(manifest.resolve(manifest.region_lookup))
    else:
        lookup = default_region_lookup()
    return read_regions(manifest.resolve(manifest.regions), lookup)


def assess_manifest(
    manifest: ScenarioManifest, config: Optional[Config] = None, workers: Optional[int] = None
) -> AssessmentRun:
    """
    Run every job in a manifest.

    Args:
        manifest: Parsed manifest
        config: Runtime configuration; defaults to ``Config()``
        workers: Overrides ``config.workers`` when given

    Returns:
        Per-job outcomes in job order and their summary rows
    """
    config = config or Config()
    workers = config.workers if workers is None else workers

    curves = load_curves(manifest)
    jobs = enumerate_jobs(manifest, curves)

    cost_config = manifest.cost_config(config.unit_cost)
    if not manifest.unit_cost_by_generation:
        cost_config = cost_config.model_copy(
            update={"by_generation": config.cost_config().by_generation}
        )
    assets, report = read_asset_table(manifest.resolve(manifest.assets), cost_config)

    regions = load_regions(manifest)
    index = RegionIndex(regions) if regions else None
    table = region_table(regions)
    damage_states = manifest.damage_states or config.damage_state_thresholds

    run = AssessmentRun(manifest=manifest, asset_report=report, regions=regions)
    for job in jobs:
        raster = read_raster(job.raster_path, job.units)
        threshold = manifest.thresholds.get(job.scenario.hazard)
        if threshold is None:
            threshold = config.exposure_threshold(job.scenario.hazard)
        layer = assess_layer_table(
            assets,
            raster,
            job.curve,
            job.scenario,
            index,
            curve_set=curve_set_for(manifest, job, curves),
            threshold=threshold,
            damage_state_thresholds=damage_states,
            workers=workers,
            chunk_size=config.chunk_size,
        )
        run.layers.append(
            LayerOutcome(
                scenario=job.scenario,
                exposures=layer.exposed_only(),
                regions=region_totals(layer, table),
                total_assets=len(layer),
            )
        )

    run.summary = summarize(manifest, run.layers)
    return run
