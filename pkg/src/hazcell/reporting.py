"""
Output files: per-layer exposure and region CSVs, the run summary, tidy
report tables and GeoJSON for mapping.

Every value is formatted to a string before pandas writes it, so files are
byte-identical across runs: costs carry two decimals, counts and percents
are integers and coordinates/intensities use the shortest float repr.
"""

import json
import logging
import math
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from .engine import (
    AssessmentRun,
    LayerOutcome,
    LayerSummary,
    enumerate_jobs,
    load_curves,
    load_regions,
    mean_count,
    pct_change_vs_baseline,
    percent_shares,
)
from .ingest import read_raster
from .manifest import ScenarioManifest
from .model import (
    UNASSIGNED,
    HazcellError,
    InvalidInputError,
    Region,
    format_usd,
    parse_scenario_key,
)
from .spatial import zonal_sums


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SUMMARY_FILE = "summary.csv"

EXPOSURE_COLUMNS = [
    "asset_id",
    "region_id",
    "continent",
    "income_group",
    "generation",
    "lon",
    "lat",
    "intensity",
    "damage_fraction",
    "damage_state",
    "damage_cost",
]

REGION_COLUMNS = [
    "region_id",
    "name",
    "continent",
    "income_group",
    "country_iso3",
    "cell_count",
    "damage_cost_total",
]

SUMMARY_COLUMNS = [
    "scenario_key",
    "hazard",
    "pathway",
    "epoch",
    "return_period_years",
    "annual_probability",
    "model_member",
    "assets",
    "cell_count",
    "damage_cost_total",
    "members",
    "cell_count_mean",
    "cell_count_min",
    "cell_count_max",
    "damage_cost_mean",
    "damage_cost_min",
    "damage_cost_max",
    "baseline",
    "pct_change_count",
    "pct_change_cost",
]

SCENARIO_COLUMNS = ["hazard", "pathway", "epoch", "return_period_years", "annual_probability"]

REPORT_COLUMNS = SCENARIO_COLUMNS + ["by", "group", "members", "statistic", "value"]

PCT_CHANGE_COLUMNS = SCENARIO_COLUMNS + [
    "by",
    "group",
    "metric",
    "baseline",
    "baseline_value",
    "value",
    "pct_change",
]

ZONAL_COLUMNS = SCENARIO_COLUMNS + [
    "model_member",
    "by",
    "group",
    "flooded_pixels",
    "mean_intensity",
]

REPORT_KINDS = ("counts", "costs", "pct_change", "shares", "zonal")
REPORT_BY = ("global", "region_id", "continent", "income_group", "generation")
ZONAL_BY = ("global", "region_id", "continent", "income_group")

GLOBAL_GROUP = "all"
ENSEMBLE_MEAN = "ensemble_mean"
UNDEFINED = "NA"


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def _pct(value: Optional[int], baseline: Optional[str]) -> str:
    if baseline is None:
        return ""
    return UNDEFINED if value is None else str(value)


def exposure_frame(layer: LayerOutcome) -> pd.DataFrame:
    """Exposed assets in asset input order."""
    frame = layer.exposures
    return pd.DataFrame(
        {
            "asset_id": frame["asset_id"].astype(str),
            "region_id": frame["region_id"].astype(str),
            "continent": frame["continent"].astype(str),
            "income_group": frame["income_group"].astype(str),
            "generation": frame["generation"].astype(str),
            "lon": [repr(float(v)) for v in frame["lon"]],
            "lat": [repr(float(v)) for v in frame["lat"]],
            "intensity": [repr(float(v)) for v in frame["intensity"]],
            "damage_fraction": [repr(float(v)) for v in frame["damage_fraction"]],
            "damage_state": frame["damage_state"].astype(str),
            "damage_cost": [format_usd(v) for v in frame["damage_cost"]],
        },
        columns=EXPOSURE_COLUMNS,
    )


def regions_frame(layer: LayerOutcome) -> pd.DataFrame:
    """Every region sorted by region_id, then the unassigned row."""
    frame = layer.regions
    return pd.DataFrame(
        {
            "region_id": frame["region_id"].astype(str),
            "name": frame["name"].astype(str),
            "continent": frame["continent"].astype(str),
            "income_group": frame["income_group"].astype(str),
            "country_iso3": frame["country_iso3"].astype(str),
            "cell_count": [str(int(v)) for v in frame["cell_count"]],
            "damage_cost_total": [format_usd(v) for v in frame["damage_cost_total"]],
        },
        columns=REGION_COLUMNS,
    )


def summary_frame(summary: Sequence[LayerSummary]) -> pd.DataFrame:
    rows = []
    for row in summary:
        scenario = row.scenario
        rows.append(
            {
                "scenario_key": scenario.key,
                "hazard": scenario.hazard.value,
                "pathway": scenario.pathway.value,
                "epoch": str(scenario.epoch),
                "return_period_years": str(scenario.return_period_years),
                "annual_probability": repr(scenario.annual_probability),
                "model_member": scenario.model_member,
                "assets": str(row.total_assets),
                "cell_count": str(row.cell_count),
                "damage_cost_total": str(row.damage_cost),
                "members": str(row.members),
                "cell_count_mean": str(row.cell_count_mean),
                "cell_count_min": str(row.cell_count_min),
                "cell_count_max": str(row.cell_count_max),
                "damage_cost_mean": str(row.damage_cost_mean),
                "damage_cost_min": str(row.damage_cost_min),
                "damage_cost_max": str(row.damage_cost_max),
                "baseline": row.baseline or "",
                "pct_change_count": _pct(row.pct_change_count, row.baseline),
                "pct_change_cost": _pct(row.pct_change_cost, row.baseline),
            }
        )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def write_run(run: AssessmentRun, out_dir: PathLike) -> List[Path]:
    """
    Write exposure and region CSVs for every layer plus summary.csv.

    Returns:
        Paths written, in write order
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for layer in run.layers:
        key = layer.scenario.key
        written.append(write_csv(exposure_frame(layer), out_dir / f"exposure_{key}.csv"))
        written.append(write_csv(regions_frame(layer), out_dir / f"regions_{key}.csv"))
    written.append(write_csv(summary_frame(run.summary), out_dir / SUMMARY_FILE))
    logger.info(f"Wrote {len(written)} files to {out_dir}")
    return written


# ---------------------------------------------------------------------------
# Reading back
# ---------------------------------------------------------------------------


def _read_str_csv(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise FileNotFoundError(f"No such file: {path}")
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def read_summary(out_dir: PathLike) -> pd.DataFrame:
    summary = _read_str_csv(Path(out_dir) / SUMMARY_FILE)
    missing = [c for c in ("scenario_key", "baseline") if c not in summary.columns]
    if missing:
        raise InvalidInputError(f"{SUMMARY_FILE} lacks columns {', '.join(missing)}")
    return summary


def read_layer_file(out_dir: PathLike, prefix: str, key: str) -> pd.DataFrame:
    return _read_str_csv(Path(out_dir) / f"{prefix}_{key}.csv")


def _groups(summary: pd.DataFrame) -> List[Tuple[str, List[str], str]]:
    """(group_key, member scenario keys, baseline group key) in summary order."""
    order: List[str] = []
    members: Dict[str, List[str]] = {}
    baselines: Dict[str, str] = {}
    for row in summary.itertuples(index=False):
        group_key = parse_scenario_key(row.scenario_key).group_key
        if group_key not in members:
            order.append(group_key)
            members[group_key] = []
            baselines[group_key] = row.baseline
        members[group_key].append(row.scenario_key)
    return [(g, members[g], baselines[g]) for g in order]


def _scenario_cells(key: str) -> Dict[str, str]:
    scenario = parse_scenario_key(key)
    return {
        "hazard": scenario.hazard.value,
        "pathway": scenario.pathway.value,
        "epoch": str(scenario.epoch),
        "return_period_years": str(scenario.return_period_years),
        "annual_probability": repr(scenario.annual_probability),
    }


def member_totals(
    out_dir: PathLike, key: str, by: str
) -> Dict[str, Tuple[int, Decimal]]:
    """
    Exposed cell count and cost per ``by`` group for one layer.

    Region-level groupings come from the regions file so they reconcile with
    summary.csv; generation comes from the exposure file.
    """
    if by == "generation":
        frame = read_layer_file(out_dir, "exposure", key)
        column = by
        counts = frame.groupby(column).size() if not frame.empty else {}
        totals: Dict[str, Tuple[int, Decimal]] = {}
        for group in sorted(set(frame[column])) if not frame.empty else []:
            costs = frame.loc[frame[column] == group, "damage_cost"]
            totals[group] = (int(counts[group]), sum((Decimal(c) for c in costs), Decimal("0.00")))
        return totals

    frame = read_layer_file(out_dir, "regions", key)
    totals = {}
    for row in frame.itertuples(index=False):
        group = GLOBAL_GROUP if by == "global" else getattr(row, by)
        count, cost = totals.get(group, (0, Decimal("0.00")))
        totals[group] = (count + int(row.cell_count), cost + Decimal(row.damage_cost_total))
    return totals


def _ensemble(
    out_dir: PathLike, member_keys: Sequence[str], by: str
) -> Dict[str, Tuple[List[int], List[Decimal]]]:
    per_member = [member_totals(out_dir, key, by) for key in member_keys]
    groups = sorted(set().union(*[set(m) for m in per_member])) if per_member else []
    out = {}
    for group in groups:
        counts = [m.get(group, (0, Decimal("0.00")))[0] for m in per_member]
        costs = [m.get(group, (0, Decimal("0.00")))[1] for m in per_member]
        out[group] = (counts, costs)
    return out


def _mean_cost(costs: Sequence[Decimal]) -> Decimal:
    return (sum(costs, Decimal(0)) / len(costs)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _check_by(by: str, allowed: Sequence[str]) -> None:
    if by not in allowed:
        raise InvalidInputError(f"--by must be one of {', '.join(allowed)}, got '{by}'")


def counts_report(out_dir: PathLike, by: str = "global", metric: str = "counts") -> pd.DataFrame:
    """Ensemble mean/min/max of exposed cells (or costs) per group and scenario."""
    _check_by(by, REPORT_BY)
    rows = []
    for group_key, member_keys, _ in _groups(read_summary(out_dir)):
        cells = _scenario_cells(member_keys[0])
        for group, (counts, costs) in _ensemble(out_dir, member_keys, by).items():
            if metric == "counts":
                stats = {
                    "mean": str(mean_count(counts)),
                    "min": str(min(counts)),
                    "max": str(max(counts)),
                }
            else:
                stats = {
                    "mean": str(_mean_cost(costs)),
                    "min": str(min(costs)),
                    "max": str(max(costs)),
                }
            for statistic, value in stats.items():
                rows.append(
                    {
                        **cells,
                        "by": by,
                        "group": group,
                        "members": str(len(member_keys)),
                        "statistic": statistic,
                        "value": value,
                    }
                )
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def pct_change_report(out_dir: PathLike, by: str = "global") -> pd.DataFrame:
    """Percent change of ensemble means against each scenario's baseline."""
    _check_by(by, REPORT_BY)
    groups = _groups(read_summary(out_dir))
    members_of = {group_key: member_keys for group_key, member_keys, _ in groups}
    rows = []
    for group_key, member_keys, baseline in groups:
        if not baseline or baseline == group_key or baseline not in members_of:
            continue
        cells = _scenario_cells(member_keys[0])
        future = _ensemble(out_dir, member_keys, by)
        reference = _ensemble(out_dir, members_of[baseline], by)
        n_future, n_reference = len(member_keys), len(members_of[baseline])
        for group in sorted(set(future) | set(reference)):
            counts, costs = future.get(group, ([0] * n_future, [Decimal("0.00")] * n_future))
            base_counts, base_costs = reference.get(
                group, ([0] * n_reference, [Decimal("0.00")] * n_reference)
            )
            pairs = {
                "cell_count": (
                    Decimal(sum(base_counts)) / n_reference,
                    Decimal(sum(counts)) / n_future,
                    str(mean_count(base_counts)),
                    str(mean_count(counts)),
                ),
                "damage_cost": (
                    _mean_cost(base_costs),
                    _mean_cost(costs),
                    str(_mean_cost(base_costs)),
                    str(_mean_cost(costs)),
                ),
            }
            for metric, (base_value, value, base_text, value_text) in pairs.items():
                change = pct_change_vs_baseline(value, base_value)
                rows.append(
                    {
                        **cells,
                        "by": by,
                        "group": group,
                        "metric": metric,
                        "baseline": baseline,
                        "baseline_value": base_text,
                        "value": value_text,
                        "pct_change": UNDEFINED if change is None else str(change),
                    }
                )
    return pd.DataFrame(rows, columns=PCT_CHANGE_COLUMNS)


def shares_report(out_dir: PathLike, by: str = "global") -> pd.DataFrame:
    """Percent of the ensemble-mean exposed cells and cost held by each group."""
    _check_by(by, REPORT_BY)
    rows = []
    for _, member_keys, _ in _groups(read_summary(out_dir)):
        cells = _scenario_cells(member_keys[0])
        ensemble = _ensemble(out_dir, member_keys, by)
        n = len(member_keys)
        count_shares = percent_shares(
            {group: Decimal(sum(c)) / n for group, (c, _) in ensemble.items()}
        )
        cost_shares = percent_shares({group: _mean_cost(c) for group, (_, c) in ensemble.items()})
        for group in ensemble:
            for statistic, share in (
                ("cell_share_pct", count_shares[group]),
                ("cost_share_pct", cost_shares[group]),
            ):
                rows.append(
                    {
                        **cells,
                        "by": by,
                        "group": group,
                        "members": str(n),
                        "statistic": statistic,
                        "value": UNDEFINED if share is None else str(share),
                    }
                )
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def _zonal_groups(regions: Sequence[Region], by: str) -> Dict[str, List[Region]]:
    groups: Dict[str, List[Region]] = {}
    for region in regions:
        if by == "global":
            group = GLOBAL_GROUP
        elif by == "income_group":
            group = region.income_group.value
        else:
            group = getattr(region, by)
        groups.setdefault(group, []).append(region)
    return dict(sorted(groups.items()))


def zonal_report(
    manifest: ScenarioManifest, by: str = "global", threshold: float = 0.0
) -> pd.DataFrame:
    """
    Flooded pixel counts and mean intensities per region group and layer.

    A pixel counts once per group when its center lies inside any of the
    group's regions. Each scenario's members are followed by an
    ensemble_mean row: the mean pixel count rounded half up and the
    pixel-weighted mean intensity over all members.
    """
    _check_by(by, ZONAL_BY)
    regions = load_regions(manifest)
    if not regions:
        raise InvalidInputError("zonal reports need a manifest with regions")
    groups = _zonal_groups(regions, by)
    jobs = enumerate_jobs(manifest, load_curves(manifest))

    rows = []
    by_group_key: Dict[str, List[Tuple[str, Dict[str, Tuple[int, float]]]]] = {}
    for job in jobs:
        raster = read_raster(job.raster_path, job.units)
        sums = {group: zonal_sums(raster, parts, threshold) for group, parts in groups.items()}
        by_group_key.setdefault(job.scenario.group_key, []).append((job.scenario.key, sums))

    for members in by_group_key.values():
        cells = _scenario_cells(members[0][0])
        for key, sums in members:
            member = parse_scenario_key(key).model_member
            for group, (count, total) in sums.items():
                rows.append(_zonal_row(cells, member, by, group, count, total))
        for group in groups:
            counts = [sums[group][0] for _, sums in members]
            totals = [sums[group][1] for _, sums in members]
            rows.append(
                {
                    **_zonal_row(cells, ENSEMBLE_MEAN, by, group, sum(counts), math.fsum(totals)),
                    "flooded_pixels": str(mean_count(counts)),
                }
            )
    return pd.DataFrame(rows, columns=ZONAL_COLUMNS)


def _zonal_row(
    cells: Dict[str, str], member: str, by: str, group: str, count: int, total: float
) -> Dict[str, str]:
    return {
        **cells,
        "model_member": member,
        "by": by,
        "group": group,
        "flooded_pixels": str(count),
        "mean_intensity": repr(total / count) if count else "",
    }


def build_report(
    out_dir: PathLike,
    kind: str,
    by: str = "global",
    manifest: Optional[ScenarioManifest] = None,
    threshold: float = 0.0,
) -> pd.DataFrame:
    """
    Build one tidy report table.

    Raises:
        InvalidInputError: On an unknown kind or grouping, or a zonal report
            without a manifest
    """
    if kind == "counts":
        return counts_report(out_dir, by, "counts")
    if kind == "costs":
        return counts_report(out_dir, by, "costs")
    if kind == "pct_change":
        return pct_change_report(out_dir, by)
    if kind == "shares":
        return shares_report(out_dir, by)
    if kind == "zonal":
        if manifest is None:
            raise InvalidInputError("zonal reports need --manifest")
        return zonal_report(manifest, by, threshold)
    raise InvalidInputError(f"--kind must be one of {', '.join(REPORT_KINDS)}, got '{kind}'")


def write_report(frame: pd.DataFrame, out_dir: PathLike, kind: str, by: str) -> Path:
    return write_csv(frame, Path(out_dir) / f"report_{kind}_{by}.csv")


# ---------------------------------------------------------------------------
# GeoJSON
# ---------------------------------------------------------------------------


def regions_geojson(regions: Sequence[Region], totals: pd.DataFrame) -> Dict:
    """
    FeatureCollection with one feature per region_id.

    ``totals`` is a regions file; regions missing from it report zero.
    """
    counts = dict(zip(totals["region_id"], totals["cell_count"]))
    costs = dict(zip(totals["region_id"], totals["damage_cost_total"]))
    parts: Dict[str, List[Region]] = {}
    for region in regions:
        parts.setdefault(region.region_id, []).append(region)

    features = []
    for region_id in sorted(parts):
        polygons = [
            [[list(vertex) for vertex in ring] for ring in region.polygon]
            for region in parts[region_id]
        ]
        if len(polygons) == 1:
            geometry = {"type": "Polygon", "coordinates": polygons[0]}
        else:
            geometry = {"type": "MultiPolygon", "coordinates": polygons}
        features.append(
            {
                "type": "Feature",
                "properties": {
                    "region_id": region_id,
                    "cell_count": int(counts.get(region_id, 0)),
                    "damage_cost_total": float(Decimal(costs.get(region_id, "0.00"))),
                },
                "geometry": geometry,
            }
        )
    return {"type": "FeatureCollection", "features": features}


def export_geojson(manifest: ScenarioManifest, out_dir: PathLike, scenario_key: str) -> Path:
    """
    Write ``regions_<key>.geojson`` for an assessed layer.

    Raises:
        InvalidInputError: If ``scenario_key`` is not in summary.csv
    """
    summary = read_summary(out_dir)
    keys = list(summary["scenario_key"])
    if scenario_key not in keys:
        raise InvalidInputError(
            f"unknown scenario key '{scenario_key}'; valid keys: {', '.join(keys) or '(none)'}"
        )
    regions = load_regions(manifest)
    if not regions:
        raise HazcellError("the manifest has no regions to export")
    totals = read_layer_file(out_dir, "regions", scenario_key)
    totals = totals[totals["region_id"] != UNASSIGNED]
    path = Path(out_dir) / f"regions_{scenario_key}.geojson"
    path.write_text(json.dumps(regions_geojson(regions, totals), indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path
