"""
Seeded synthetic inputs for demos, throughput checks and tests.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd

from .ingest import (
    ASSET_COLUMNS,
    load_default_curves,
    write_curve,
    write_raster_asc,
    write_regions,
)
from .manifest import Baseline, CurveBinding, LayerJob, ScenarioManifest, write_manifest
from .model import (
    CYCLONE_MODELS,
    DEFAULT_UNIT_COST,
    HISTORICAL_EPOCH,
    RADIO_GENERATION,
    RIVERINE_MODELS,
    Asset,
    AssetTable,
    Hazard,
    HazardRaster,
    IncomeGroup,
    Pathway,
    Radio,
    Region,
    Scenario,
    TowerDesign,
    Units,
)


logger = logging.getLogger(__name__)

BBox = Tuple[float, float, float, float]

DEFAULT_BBOX: BBox = (-10.0, -10.0, 10.0, 10.0)

# Share of the global cell inventory per radio standard.
GENERATION_SHARES: Dict[Radio, float] = {
    Radio.GSM: 0.103,
    Radio.UMTS: 0.4186,
    Radio.LTE: 0.478,
    Radio.NR: 0.0004,
}

CONTINENTS = ("Africa", "Asia", "Europe", "North America", "Oceania", "South America")
INCOME_GROUPS = (IncomeGroup.HIC, IncomeGroup.UMC, IncomeGroup.LMC, IncomeGroup.LIC)

MCC = "901"
NET = "70"


def synthetic_asset_table(
    n: int,
    seed: int = 0,
    bbox: BBox = DEFAULT_BBOX,
    unit_cost: float = DEFAULT_UNIT_COST,
) -> AssetTable:
    """``n`` assets scattered uniformly over ``bbox`` with the global radio mix."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    rng = np.random.default_rng(seed)
    radios = np.array([radio.value for radio in GENERATION_SHARES], dtype=object)
    weights = np.array(list(GENERATION_SHARES.values()))
    radio = radios[rng.choice(len(radios), size=n, p=weights / weights.sum())]
    generation_of = {r.value: g.value for r, g in RADIO_GENERATION.items()}
    x0, y0, x1, y1 = bbox
    cells = np.arange(n)
    return AssetTable(
        asset_id=np.array(
            [f"{MCC}-{NET}-{cell // 4096}-{cell}" for cell in cells.tolist()], dtype=object
        ),
        lon=rng.uniform(x0, x1, n),
        lat=rng.uniform(y0, y1, n),
        radio=radio,
        generation=np.array([generation_of[r] for r in radio], dtype=object),
        tower_design=np.full(n, TowerDesign.UNKNOWN.value, dtype=object),
        unit_cost=np.full(n, float(unit_cost)),
        country_iso3=np.full(n, "unknown", dtype=object),
    )


def synthetic_assets(n: int, seed: int = 0, bbox: BBox = DEFAULT_BBOX) -> List[Asset]:
    return synthetic_asset_table(n, seed, bbox).to_assets()


def write_asset_csv(assets: AssetTable, path: Union[str, Path]) -> None:
    """Write assets in the OpenCellID export layout."""
    parts = [asset_id.split("-") for asset_id in assets.asset_id.tolist()]
    n = len(assets)
    frame = pd.DataFrame(
        {
            "radio": assets.radio,
            "mcc": [p[0] for p in parts],
            "net": [p[1] for p in parts],
            "area": [p[2] for p in parts],
            "cell": [p[3] for p in parts],
            "unit": ["0"] * n,
            "lon": [repr(float(v)) for v in assets.lon],
            "lat": [repr(float(v)) for v in assets.lat],
            "range": ["1000"] * n,
            "samples": ["1"] * n,
            "changeable": ["1"] * n,
            "created": ["0"] * n,
            "updated": ["0"] * n,
            "averageSignal": ["0"] * n,
        },
        columns=list(ASSET_COLUMNS),
    )
    frame.to_csv(path, index=False, lineterminator="\n")


def synthetic_raster(
    ncols: int,
    nrows: int,
    seed: int = 0,
    xll: float = DEFAULT_BBOX[0],
    yll: float = DEFAULT_BBOX[1],
    cellsize: float = 0.1,
    max_intensity: float = 5.0,
    dry_share: float = 0.5,
    nodata_share: float = 0.1,
    units: Union[str, Units] = Units.METERS_DEPTH,
    nodata: float = -9999.0,
) -> HazardRaster:
    """
    Random intensity grid.

    A ``dry_share`` of pixels is 0, a ``nodata_share`` is nodata and the
    rest are uniform in (0, max_intensity], rounded to 3 decimals.
    """
    rng = np.random.default_rng(seed)
    values = np.round(rng.uniform(0.0, max_intensity, (nrows, ncols)), 3)
    draw = rng.uniform(size=(nrows, ncols))
    values[draw < dry_share] = 0.0
    values[draw >= 1.0 - nodata_share] = nodata
    return HazardRaster(
        ncols=ncols,
        nrows=nrows,
        xll=xll,
        yll=yll,
        cellsize=cellsize,
        nodata=nodata,
        values=values,
        units=units,
    )


def scaled(raster: HazardRaster, factor: float) -> HazardRaster:
    """Copy of ``raster`` with valid values multiplied by ``factor``."""
    values = np.where(raster.nodata_mask, raster.nodata, np.round(raster.values * factor, 3))
    return HazardRaster(**raster.model_dump(exclude={"values"}), values=values)


def synthetic_regions(nx: int, ny: int, bbox: BBox = DEFAULT_BBOX) -> List[Region]:
    """``nx`` by ``ny`` rectangular regions tiling ``bbox``; shared edges are exact."""
    x0, y0, x1, y1 = bbox
    xs = np.linspace(x0, x1, nx + 1).tolist()
    ys = np.linspace(y0, y1, ny + 1).tolist()
    regions = []
    for j in range(ny):
        for i in range(nx):
            number = j * nx + i
            ring = (
                (xs[i], ys[j]),
                (xs[i + 1], ys[j]),
                (xs[i + 1], ys[j + 1]),
                (xs[i], ys[j + 1]),
                (xs[i], ys[j]),
            )
            regions.append(
                Region(
                    region_id=f"R{j:02d}{i:02d}",
                    name=f"Tile {j}-{i}",
                    polygon=(ring,),
                    continent=CONTINENTS[number % len(CONTINENTS)],
                    income_group=INCOME_GROUPS[number % len(INCOME_GROUPS)],
                )
            )
    return regions


def write_demo_bundle(out_dir: Union[str, Path], seed: int = 0, n_assets: int = 10000) -> Path:
    """
    Write a complete synthetic input bundle and its manifest.

    Riverine layers cover the WATCH baseline plus five RCP8.5 2050 models;
    cyclone layers cover the STORM baseline plus four 2050 models. Future
    members scale the baseline grid up by 5% per member.

    Returns:
        Path of the written manifest.json
    """
    out_dir = Path(out_dir)
    (out_dir / "rasters").mkdir(parents=True, exist_ok=True)
    (out_dir / "curves").mkdir(parents=True, exist_ok=True)

    write_asset_csv(synthetic_asset_table(n_assets, seed), out_dir / "assets.csv")
    write_regions(synthetic_regions(4, 4), out_dir / "regions.geojson")

    curves = load_default_curves()
    for name, curve in curves.items():
        write_curve(curve, out_dir / "curves" / f"{name}.csv")

    flood = synthetic_raster(200, 200, seed=seed)
    wind = synthetic_raster(
        200, 200, seed=seed + 1, max_intensity=300.0, dry_share=0.2, units=Units.KMH_WIND
    )
    layers = [
        (Hazard.RIVERINE, "WATCH", flood, "flood_depth_default"),
        (Hazard.CYCLONE, "STORM", wind, "wind_default"),
    ]
    for number, model in enumerate(RIVERINE_MODELS):
        factor = 1 + 0.05 * (number + 1)
        layers.append((Hazard.RIVERINE, model, scaled(flood, factor), "flood_depth_default"))
    for number, model in enumerate(CYCLONE_MODELS):
        factor = 1 + 0.05 * (number + 1)
        layers.append((Hazard.CYCLONE, model, scaled(wind, factor), "wind_default"))

    jobs = []
    for hazard, member, raster, curve_id in layers:
        historical = member in ("WATCH", "STORM")
        scenario = Scenario(
            hazard=hazard,
            pathway=Pathway.HISTORICAL if historical else Pathway.RCP85,
            epoch=HISTORICAL_EPOCH if historical else 2050,
            return_period_years=100,
            model_member=member,
        )
        raster_path = f"rasters/{scenario.key}.asc"
        write_raster_asc(raster, out_dir / raster_path)
        jobs.append(
            LayerJob(scenario=scenario, raster=raster_path, curve_id=curve_id, units=raster.units)
        )

    manifest = ScenarioManifest(
        assets="assets.csv",
        regions="regions.geojson",
        curves=[
            CurveBinding(
                curve_id="flood_depth_default",
                path="curves/flood_depth_default.csv",
                hazards=[Hazard.RIVERINE, Hazard.COASTAL],
            ),
            CurveBinding(
                curve_id="wind_default", path="curves/wind_default.csv", hazards=[Hazard.CYCLONE]
            ),
        ],
        jobs=jobs,
        baselines=[
            Baseline(hazard=Hazard.RIVERINE, return_period_years=100),
            Baseline(hazard=Hazard.CYCLONE, return_period_years=100),
        ],
    )
    path = out_dir / "manifest.json"
    write_manifest(manifest, path)
    logger.info(f"Wrote demo bundle with {len(jobs)} layers to {out_dir}")
    return path
