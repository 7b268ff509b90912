"""
Tests for output files and report tables.
"""

import json
import math

import pandas as pd
import pytest

from hazcell.config import Config
from hazcell.engine import assess_manifest as run_manifest
from hazcell.manifest import load_manifest
from hazcell.model import InvalidInputError
from hazcell.reporting import (
    ENSEMBLE_MEAN,
    PCT_CHANGE_COLUMNS,
    REGION_COLUMNS,
    REPORT_COLUMNS,
    UNDEFINED,
    build_report,
    counts_report,
    export_geojson,
    pct_change_report,
    read_summary,
    shares_report,
    write_report,
    write_run,
    zonal_report,
)
from tests.conftest import FIXTURE_KEY, GOLDEN

BASELINE_KEY = "riverine__historical__1980__rp100__WATCH"
FUTURE_KEY = "riverine__RCP8.5__2050__rp100__GFDL-ESM2M"


def write_layer_outputs(out_dir, layers):
    """
    Hand-built summary.csv and regions files.

    ``layers`` maps scenario key to (baseline group key, [(region_id, count, cost)]).
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = pd.DataFrame(
        [{"scenario_key": key, "baseline": baseline} for key, (baseline, _) in layers.items()]
    )
    summary.to_csv(out_dir / "summary.csv", index=False)
    for key, (_, rows) in layers.items():
        frame = pd.DataFrame(
            [
                {
                    "region_id": region_id,
                    "name": region_id,
                    "continent": "Asia",
                    "income_group": "HIC",
                    "country_iso3": "JPN",
                    "cell_count": str(count),
                    "damage_cost_total": cost,
                }
                for region_id, count, cost in rows
            ],
            columns=REGION_COLUMNS,
        )
        frame.to_csv(out_dir / f"regions_{key}.csv", index=False)
    return out_dir


def run_fixture(manifest_path, out_dir):
    run = run_manifest(load_manifest(manifest_path), Config(workers=1))
    write_run(run, out_dir)
    return run


class TestWriteRun:
    """Byte-stable run outputs."""

    def test_matches_golden_files(self, assess_manifest, tmp_path):
        """Test the fixture run against the golden files."""
        out = tmp_path / "out"
        run_fixture(assess_manifest, out)
        for name in (
            "summary.csv",
            f"regions_{FIXTURE_KEY}.csv",
            f"exposure_{FIXTURE_KEY}.csv",
        ):
            assert (out / name).read_bytes() == (GOLDEN / name).read_bytes(), name

    def test_rerun_is_byte_identical(self, assess_manifest, tmp_path):
        """Test that a second run writes the same bytes."""
        run_fixture(assess_manifest, tmp_path / "a")
        run_fixture(assess_manifest, tmp_path / "b")
        for path in sorted((tmp_path / "a").iterdir()):
            assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes()

    def test_layer_lookup_lists_valid_keys(self, assess_manifest):
        """Test that an unknown layer lists the valid keys."""
        run = run_manifest(load_manifest(assess_manifest), Config(workers=1))
        with pytest.raises(InvalidInputError, match="valid keys"):
            run.layer("cyclone__historical__1980__rp100__STORM")

    def test_summary_reads_back(self, assess_manifest, tmp_path):
        """Test reading summary.csv back."""
        run_fixture(assess_manifest, tmp_path)
        summary = read_summary(tmp_path)
        assert summary["scenario_key"].tolist() == [FIXTURE_KEY]
        assert summary["damage_cost_total"].tolist() == ["24999.75"]

    def test_summary_without_key_column(self, tmp_path):
        """Test a summary without scenario_key."""
        (tmp_path / "summary.csv").write_text("a,b\n1,2\n")
        with pytest.raises(InvalidInputError, match="scenario_key"):
            read_summary(tmp_path)


class TestCountsReport:
    """Ensemble count and cost statistics."""

    def test_global(self, assess_manifest, tmp_path):
        """Test global counts."""
        run_fixture(assess_manifest, tmp_path)
        report = counts_report(tmp_path)
        assert list(report.columns) == REPORT_COLUMNS
        assert dict(zip(report["statistic"], report["value"])) == {
            "mean": "2",
            "min": "2",
            "max": "2",
        }
        assert set(report["group"]) == {"all"}

    def test_by_region(self, assess_manifest, tmp_path):
        """Test counts per region."""
        run_fixture(assess_manifest, tmp_path)
        report = counts_report(tmp_path, "region_id", "costs")
        means = report[report["statistic"] == "mean"]
        assert dict(zip(means["group"], means["value"])) == {
            "east": "8333.25",
            "unassigned": "0.00",
            "west": "16666.50",
        }

    def test_by_generation(self, assess_manifest, tmp_path):
        """Test counts per generation."""
        run_fixture(assess_manifest, tmp_path)
        report = counts_report(tmp_path, "generation")
        means = report[report["statistic"] == "mean"]
        assert dict(zip(means["group"], means["value"])) == {"3G": "1", "4G": "1"}

    def test_ensemble_mean_rounds_half_up(self, tmp_path):
        """Test that the ensemble mean count rounds half up."""
        out = write_layer_outputs(
            tmp_path,
            {
                FUTURE_KEY: ("", [("r1", 1, "0.01")]),
                "riverine__RCP8.5__2050__rp100__HadGEM2-ES": ("", [("r1", 2, "0.02")]),
            },
        )
        report = counts_report(out, "global", "costs")
        values = dict(zip(report["statistic"], report["value"]))
        assert values == {"mean": "0.02", "min": "0.01", "max": "0.02"}
        counts = counts_report(out)
        assert counts.loc[counts["statistic"] == "mean", "value"].tolist() == ["2"]

    def test_empty_summary_gives_header_only(self, tmp_path):
        """An empty summary gives a header-only report."""
        (tmp_path / "summary.csv").write_text("scenario_key,baseline\n")
        report = counts_report(tmp_path)
        assert report.empty
        path = write_report(report, tmp_path, "counts", "global")
        assert path.name == "report_counts_global.csv"
        assert path.read_text() == ",".join(REPORT_COLUMNS) + "\n"

    def test_unknown_grouping(self, assess_manifest, tmp_path):
        """Test an unsupported grouping."""
        run_fixture(assess_manifest, tmp_path)
        with pytest.raises(InvalidInputError, match="--by must be one of"):
            counts_report(tmp_path, "tower_design")


class TestPctChangeReport:
    """Percent change against the baseline ensemble."""

    def test_acceptance_pair(self, tmp_path):
        """Test a baseline and future pair."""
        out = write_layer_outputs(
            tmp_path,
            {
                BASELINE_KEY: ("riverine__historical__1980__rp100", [("r1", 522, "52.20")]),
                FUTURE_KEY: ("riverine__historical__1980__rp100", [("r1", 878, "87.80")]),
            },
        )
        report = pct_change_report(out)
        assert list(report.columns) == PCT_CHANGE_COLUMNS
        changes = dict(zip(report["metric"], report["pct_change"]))
        assert changes == {"cell_count": "68", "damage_cost": "68"}
        cost = report[report["metric"] == "damage_cost"].iloc[0]
        assert (cost["baseline_value"], cost["value"]) == ("52.20", "87.80")

    def test_zero_baseline_is_undefined(self, tmp_path):
        """Test that a zero baseline writes NA."""
        out = write_layer_outputs(
            tmp_path,
            {
                BASELINE_KEY: ("riverine__historical__1980__rp100", [("r1", 0, "0.00")]),
                FUTURE_KEY: ("riverine__historical__1980__rp100", [("r1", 3, "9.00")]),
            },
        )
        assert set(pct_change_report(out)["pct_change"]) == {UNDEFINED}

    def test_baseline_rows_are_skipped(self, assess_manifest, tmp_path):
        """Test that baseline layers get no rows."""
        run_fixture(assess_manifest, tmp_path)
        assert pct_change_report(tmp_path).empty


class TestSharesReport:
    """Group shares of the ensemble mean."""

    def test_by_region(self, assess_manifest, tmp_path):
        """Test percent change per region."""
        run_fixture(assess_manifest, tmp_path)
        report = shares_report(tmp_path, "region_id")
        cells = report[report["statistic"] == "cell_share_pct"]
        costs = report[report["statistic"] == "cost_share_pct"]
        assert dict(zip(cells["group"], cells["value"])) == {
            "east": "50",
            "unassigned": "0",
            "west": "50",
        }
        assert dict(zip(costs["group"], costs["value"])) == {
            "east": "33",
            "unassigned": "0",
            "west": "67",
        }

    def test_nothing_exposed(self, tmp_path):
        """Test shares when nothing is exposed."""
        out = write_layer_outputs(tmp_path, {BASELINE_KEY: ("", [("r1", 0, "0.00")])})
        assert set(shares_report(out)["value"]) == {UNDEFINED}


class TestZonalReport:
    """Pixel statistics per region group."""

    def test_by_region(self, assess_manifest):
        """Test zonal stats per region."""
        report = zonal_report(load_manifest(assess_manifest), "region_id")
        members = report[report["model_member"] == "WATCH"]
        assert dict(zip(members["group"], members["flooded_pixels"])) == {"east": "2", "west": "1"}
        assert dict(zip(members["group"], members["mean_intensity"])) == {
            "east": repr(math.fsum([1.0, 0.3]) / 2),
            "west": repr(0.6),
        }
        ensemble = report[report["model_member"] == ENSEMBLE_MEAN]
        assert ensemble["flooded_pixels"].tolist() == members["flooded_pixels"].tolist()

    def test_global_with_threshold(self, assess_manifest):
        """Test global zonal stats above a threshold."""
        report = zonal_report(load_manifest(assess_manifest), "global", threshold=0.5)
        row = report[report["model_member"] == "WATCH"].iloc[0]
        assert (row["group"], row["flooded_pixels"]) == ("all", "2")
        assert row["mean_intensity"] == repr(math.fsum([0.6, 1.0]) / 2)

    def test_nothing_flooded(self, assess_manifest):
        """Test a threshold above every pixel."""
        report = zonal_report(load_manifest(assess_manifest), "global", threshold=5.0)
        assert set(report["flooded_pixels"]) == {"0"}
        assert set(report["mean_intensity"]) == {""}

    def test_needs_manifest(self, tmp_path):
        """Test that the zonal report needs a manifest."""
        with pytest.raises(InvalidInputError, match="--manifest"):
            build_report(tmp_path, "zonal")

    def test_generation_grouping_rejected(self, assess_manifest):
        """Test that zonal stats cannot group by generation."""
        with pytest.raises(InvalidInputError, match="--by must be one of"):
            zonal_report(load_manifest(assess_manifest), "generation")


class TestBuildReport:
    """Dispatch by report kind."""

    def test_unknown_kind(self, tmp_path):
        """Test an unknown report kind."""
        with pytest.raises(InvalidInputError, match="--kind must be one of"):
            build_report(tmp_path, "histogram")

    def test_costs_kind(self, assess_manifest, tmp_path):
        """Test the costs report."""
        run_fixture(assess_manifest, tmp_path)
        report = build_report(tmp_path, "costs")
        assert dict(zip(report["statistic"], report["value"]))["mean"] == "24999.75"


class TestExportGeojson:
    """Region features for mapping."""

    def test_features(self, assess_manifest, tmp_path):
        """Test exported region features."""
        run_fixture(assess_manifest, tmp_path)
        path = export_geojson(load_manifest(assess_manifest), tmp_path, FIXTURE_KEY)
        assert path.name == f"regions_{FIXTURE_KEY}.geojson"
        data = json.loads(path.read_text())
        properties = {f["properties"]["region_id"]: f["properties"] for f in data["features"]}
        assert properties == {
            "east": {"region_id": "east", "cell_count": 1, "damage_cost_total": 8333.25},
            "west": {"region_id": "west", "cell_count": 1, "damage_cost_total": 16666.5},
        }
        assert {f["geometry"]["type"] for f in data["features"]} == {"Polygon"}

    def test_region_without_exposure(self, assess_manifest, tmp_path):
        """Regions with no exposure still get a feature."""
        bundle = assess_manifest.parent
        (bundle / "assets.csv").write_text(
            (bundle / "assets.csv").read_text().replace("1.5,0.5", "5.0,5.0")
        )
        run_fixture(assess_manifest, tmp_path)
        path = export_geojson(load_manifest(assess_manifest), tmp_path, FIXTURE_KEY)
        features = json.loads(path.read_text())["features"]
        east = next(f for f in features if f["properties"]["region_id"] == "east")
        assert east["properties"]["cell_count"] == 0
        assert east["properties"]["damage_cost_total"] == 0.0

    def test_unknown_key(self, assess_manifest, tmp_path):
        """Test exporting an unknown scenario key."""
        run_fixture(assess_manifest, tmp_path)
        with pytest.raises(InvalidInputError, match="valid keys: " + FIXTURE_KEY):
            export_geojson(load_manifest(assess_manifest), tmp_path, "nope")
