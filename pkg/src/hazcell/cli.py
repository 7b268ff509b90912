"""
Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 validation failure.
"""

import logging
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

import typer

from .config import Config, check_log_level, configure_logging
from .engine import assess_manifest, enumerate_jobs, inventory, load_curves, load_regions
from .ingest import read_asset_table, read_raster
from .manifest import job_counts, load_manifest
from .model import HazcellError, InvalidInputError
from .reporting import build_report, export_geojson, write_report, write_run
from .synthetic import write_demo_bundle


logger = logging.getLogger(__name__)

app = typer.Typer(help="Exposure and damage of cellular assets to flood and cyclone hazards.")

EXIT_RUNTIME = 1
EXIT_INVALID = 2


class ReportKind(str, Enum):
    COUNTS = "counts"
    COSTS = "costs"
    PCT_CHANGE = "pct_change"
    SHARES = "shares"
    ZONAL = "zonal"


class ReportBy(str, Enum):
    GLOBAL = "global"
    REGION_ID = "region_id"
    CONTINENT = "continent"
    INCOME_GROUP = "income_group"
    GENERATION = "generation"


@contextmanager
def exit_on_error() -> Iterator[None]:
    """Turn pipeline errors into one stderr line and an exit code."""
    try:
        yield
    except (InvalidInputError, ValueError, FileNotFoundError) as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=EXIT_INVALID)
    except (HazcellError, OSError) as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=EXIT_RUNTIME)


def _config(ctx: typer.Context) -> Config:
    return ctx.obj if isinstance(ctx.obj, Config) else Config()


@app.callback()
def main(
    ctx: typer.Context,
    log_level: Optional[str] = typer.Option(
        None, "--log-level", help="DEBUG, INFO, WARNING, ERROR or CRITICAL (default: $HAZCELL_LOG)"
    ),
    config: Optional[Path] = typer.Option(None, "--config", help="JSON configuration file"),
) -> None:
    with exit_on_error():
        settings = Config.load(str(config) if config else None)
        if log_level:
            settings.log_level = check_log_level(log_level)
        configure_logging(settings.log_level)
    ctx.obj = settings


@app.command()
def validate(
    manifest: Path = typer.Option(..., "--manifest", help="Scenario manifest JSON"),
) -> None:
    """Check a manifest and every file it references."""
    with exit_on_error():
        parsed = load_manifest(manifest)
        curves = load_curves(parsed)
        jobs = enumerate_jobs(parsed, curves)
        _, report = read_asset_table(parsed.resolve(parsed.assets))
        regions = load_regions(parsed)
        for job in jobs:
            read_raster(job.raster_path, job.units)

    typer.echo(
        f"assets: {report.total_records} records, {report.accepted_count} accepted, "
        f"{report.rejected_count} rejected"
    )
    for line_number, reason in report.rejection_reasons:
        typer.echo(f"  line {line_number}: {reason}")
    typer.echo(f"regions: {len(regions)} polygon parts")
    typer.echo(f"curves: {len(curves)}")
    for (hazard, pathway), count in sorted(job_counts(parsed).items()):
        typer.echo(f"jobs: {hazard} {pathway}: {count}")
    typer.echo("ok")


@app.command()
def assess(
    ctx: typer.Context,
    manifest: Path = typer.Option(..., "--manifest", help="Scenario manifest JSON"),
    out: Optional[Path] = typer.Option(
        None, "--out", help="Output directory (default: the manifest's output_dir)"
    ),
    workers: Optional[int] = typer.Option(
        None, "--workers", min=0, help="Parallel workers, 0 for one per core"
    ),
) -> None:
    """Assess every layer and write exposure, region and summary CSVs."""
    settings = _config(ctx)
    with exit_on_error():
        parsed = load_manifest(manifest)
        if out is None:
            if parsed.output_dir is None:
                raise InvalidInputError("no --out given and the manifest has no output_dir")
            out = parsed.resolve(parsed.output_dir)
        run = assess_manifest(parsed, settings, workers)
        write_run(run, out)
    typer.echo(str(out / "summary.csv"))


@app.command()
def report(
    out: Path = typer.Option(..., "--out", help="Directory holding assess outputs"),
    kind: ReportKind = typer.Option(ReportKind.COUNTS, "--kind"),
    by: ReportBy = typer.Option(ReportBy.GLOBAL, "--by"),
    manifest: Optional[Path] = typer.Option(
        None, "--manifest", help="Needed by --kind zonal for rasters and regions"
    ),
    threshold: float = typer.Option(
        0.0, "--threshold", min=0.0, help="Zonal pixels count when strictly above this"
    ),
) -> None:
    """Write a tidy report_<kind>_<by>.csv table."""
    with exit_on_error():
        parsed = load_manifest(manifest) if manifest is not None else None
        frame = build_report(out, kind.value, by.value, parsed, threshold)
        path = write_report(frame, out, kind.value, by.value)
    typer.echo(str(path))


@app.command("export-geojson")
def export_geojson_command(
    out: Path = typer.Option(..., "--out", help="Directory holding assess outputs"),
    scenario: str = typer.Option(..., "--scenario", help="Scenario key"),
    manifest: Path = typer.Option(..., "--manifest", help="Manifest naming the regions"),
) -> None:
    """Write regions_<key>.geojson with per-region totals."""
    with exit_on_error():
        path = export_geojson(load_manifest(manifest), out, scenario)
    typer.echo(str(path))


@app.command()
def demo(
    out: Path = typer.Option(..., "--out", help="Directory for the bundle"),
    seed: int = typer.Option(0, "--seed"),
    assets: int = typer.Option(10000, "--assets", min=0, help="Number of synthetic cells"),
) -> None:
    """Write a synthetic input bundle with its manifest."""
    with exit_on_error():
        path = write_demo_bundle(out, seed=seed, n_assets=assets)
    typer.echo(str(path))


@app.command("inventory")
def inventory_command(
    ctx: typer.Context,
    assets: Path = typer.Option(..., "--assets", help="Asset CSV"),
) -> None:
    """Print asset counts and shares per generation as CSV."""
    with exit_on_error():
        table, _ = read_asset_table(assets, _config(ctx).cost_config())
        frame = inventory(table)
    typer.echo(frame.to_csv(index=False, lineterminator="\n"), nl=False)
