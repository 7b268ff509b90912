"""
Readers (and the ASCII grid writer) for every external data file.

Asset rows are validated one by one and either accepted or rejected with a
reason; structural problems with a file are fatal.
"""

import json
import logging
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .model import (
    RADIO_GENERATION,
    UNKNOWN,
    Asset,
    AssetTable,
    CostConfig,
    DamageCurve,
    Generation,
    HazardRaster,
    IncomeGroup,
    IngestReport,
    InvalidInputError,
    Region,
    TowerDesign,
    Units,
)


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

ASSET_COLUMNS = (
    "radio",
    "mcc",
    "net",
    "area",
    "cell",
    "unit",
    "lon",
    "lat",
    "range",
    "samples",
    "changeable",
    "created",
    "updated",
    "averageSignal",
)

ASC_REQUIRED_KEYS = ("ncols", "nrows", "cellsize")
ASC_DEFAULT_NODATA = -9999.0

MAX_LOGGED_REJECTIONS = 20

_GENERATION_BY_RADIO = {radio.value: gen.value for radio, gen in RADIO_GENERATION.items()}
_TOWER_DESIGNS = {design.value for design in TowerDesign}


def _require_file(path: PathLike) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"No such file: {path}")
    return path


def read_asset_table(
    path: PathLike, cost_config: Optional[CostConfig] = None
) -> Tuple[AssetTable, IngestReport]:
    """
    Read an OpenCellID-style asset CSV into columnar form.

    Args:
        path: CSV with the documented header; extra columns are ignored
            apart from the optional ``unit_cost``, ``tower_design`` and
            ``country_iso3`` overrides
        cost_config: Unit cost defaults; falls back to 33,333.00 per cell

    Returns:
        The accepted assets in file order and the ingest report

    Raises:
        FileNotFoundError: If the file does not exist
        InvalidInputError: If the header is missing required columns
    """
    path = _require_file(path)
    cost_config = cost_config or CostConfig()

    lines = pd.Series(path.read_text(encoding="utf-8-sig").splitlines(), dtype=object)
    if lines.empty or not lines.iloc[0].strip():
        raise InvalidInputError(f"{path}: missing header row")

    header = [name.strip() for name in lines.iloc[0].split(",")]
    missing = [name for name in ASSET_COLUMNS if name not in header]
    if missing:
        raise InvalidInputError(f"{path}: header missing columns {', '.join(missing)}")

    body = lines.iloc[1:]
    body = body[body.str.strip() != ""]
    # Header is line 1.
    line_numbers = body.index.to_numpy() + 1
    total = len(body)

    fields = body.str.split(",")
    n_fields = fields.str.len().to_numpy()
    width_ok = n_fields == len(header)
    rows = pd.DataFrame(
        fields[width_ok].tolist(), columns=header, index=body.index[width_ok], dtype=object
    ).reindex(body.index)
    rows = rows.apply(lambda col: col.str.strip())

    reasons = np.full(total, "", dtype=object)

    def reject(mask: np.ndarray, messages: Union[str, np.ndarray]) -> None:
        fresh = mask & (reasons == "")
        if isinstance(messages, str):
            reasons[fresh] = messages
        else:
            reasons[fresh] = messages[fresh]

    reject(~width_ok, np.array(
        [f"expected {len(header)} fields, got {n}" for n in n_fields], dtype=object
    ))

    radio = rows["radio"].fillna("").str.upper()
    generation = radio.map(_GENERATION_BY_RADIO)
    reject(
        generation.isna().to_numpy(),
        ("unknown radio '" + rows["radio"].fillna("") + "'").to_numpy(dtype=object),
    )

    lon = pd.to_numeric(rows["lon"], errors="coerce").to_numpy(dtype=np.float64)
    lat = pd.to_numeric(rows["lat"], errors="coerce").to_numpy(dtype=np.float64)
    reject(np.isnan(lon), "lon is not a number")
    reject(np.isnan(lat), "lat is not a number")
    with np.errstate(invalid="ignore"):
        reject(~((lon >= -180) & (lon <= 180)), "lon out of range")
        reject(~((lat >= -90) & (lat <= 90)), "lat out of range")

    default_cost = generation.map(
        lambda g: cost_config.unit_cost_for(Generation(g)) if isinstance(g, str) else np.nan
    ).to_numpy(dtype=np.float64)
    unit_cost = default_cost
    if "unit_cost" in rows.columns:
        raw = rows["unit_cost"].fillna("")
        given = raw != ""
        parsed = pd.to_numeric(raw.where(given), errors="coerce").to_numpy(dtype=np.float64)
        bad = given.to_numpy() & ~(np.isfinite(parsed) & (parsed >= 0))
        reject(bad, "unit_cost must be a nonnegative number")
        unit_cost = np.where(given.to_numpy(), parsed, default_cost)

    tower_design = np.full(total, TowerDesign.UNKNOWN.value, dtype=object)
    if "tower_design" in rows.columns:
        raw = rows["tower_design"].fillna("").str.lower()
        given = (raw != "").to_numpy()
        known = raw.isin(_TOWER_DESIGNS).to_numpy()
        reject(given & ~known, ("unknown tower_design '" + raw + "'").to_numpy(dtype=object))
        tower_design = np.where(given, raw.to_numpy(dtype=object), tower_design)

    country = np.full(total, UNKNOWN, dtype=object)
    if "country_iso3" in rows.columns:
        raw = rows["country_iso3"].fillna("").str.upper()
        country = np.where((raw != "").to_numpy(), raw.to_numpy(dtype=object), country)

    ok = reasons == ""
    asset_id = (
        rows["mcc"].fillna("") + "-" + rows["net"].fillna("") + "-"
        + rows["area"].fillna("") + "-" + rows["cell"].fillna("")
    ).to_numpy(dtype=object)

    table = AssetTable(
        asset_id=asset_id[ok],
        lon=lon[ok],
        lat=lat[ok],
        radio=radio.to_numpy(dtype=object)[ok],
        generation=generation.to_numpy(dtype=object)[ok],
        tower_design=tower_design[ok],
        unit_cost=unit_cost[ok],
        country_iso3=country[ok],
    )
    rejected = [(int(n), str(r)) for n, r in zip(line_numbers[~ok], reasons[~ok])]
    report = IngestReport(
        source=str(path),
        total_records=total,
        accepted_count=int(ok.sum()),
        rejected_count=len(rejected),
        rejection_reasons=rejected,
    )

    logger.info(
        f"Read {report.accepted_count} assets from {path} "
        f"({report.rejected_count} rejected)"
    )
    for line_number, reason in rejected[:MAX_LOGGED_REJECTIONS]:
        logger.warning(f"{path}:{line_number}: {reason}")
    if len(rejected) > MAX_LOGGED_REJECTIONS:
        logger.warning(f"{path}: {len(rejected) - MAX_LOGGED_REJECTIONS} more rejected rows")
    return table, report


def read_assets(
    path: PathLike, cost_config: Optional[CostConfig] = None
) -> Tuple[List[Asset], IngestReport]:
    """Read an asset CSV into Asset models (see ``read_asset_table``)."""
    table, report = read_asset_table(path, cost_config)
    return table.to_assets(), report


def read_raster_asc(path: PathLike, units: Union[str, Units]) -> HazardRaster:
    """
    Read an ESRI ASCII grid.

    Header keys are case-insensitive; ``xllcenter``/``yllcenter`` are
    converted to corner coordinates. The first data line is the northern row.

    Raises:
        InvalidInputError: On a missing header key, a row with the wrong
            number of values, a wrong row count or a nonpositive cellsize
    """
    path = _require_file(path)
    lines = path.read_text(encoding="utf-8").splitlines()

    header: Dict[str, str] = {}
    position = 0
    while position < len(lines):
        tokens = lines[position].split()
        if not tokens:
            position += 1
            continue
        key = tokens[0].lower()
        if key[0].isalpha() and key not in ("nan", "inf", "-inf"):
            if len(tokens) != 2:
                raise InvalidInputError(f"{path}:{position + 1}: malformed header line")
            header[key] = tokens[1]
            position += 1
            continue
        break

    for key in ASC_REQUIRED_KEYS:
        if key not in header:
            raise InvalidInputError(f"{path}: header key '{key}' missing")
    if "xllcorner" not in header and "xllcenter" not in header:
        raise InvalidInputError(f"{path}: header key 'xllcorner' missing")
    if "yllcorner" not in header and "yllcenter" not in header:
        raise InvalidInputError(f"{path}: header key 'yllcorner' missing")

    try:
        ncols = int(header["ncols"])
        nrows = int(header["nrows"])
        cellsize = float(header["cellsize"])
        nodata = float(header.get("nodata_value", ASC_DEFAULT_NODATA))
        xll = float(header.get("xllcorner", header.get("xllcenter")))
        yll = float(header.get("yllcorner", header.get("yllcenter")))
    except ValueError as e:
        raise InvalidInputError(f"{path}: bad header value: {e}") from e

    if cellsize <= 0:
        raise InvalidInputError(f"{path}: cellsize must be positive, got {cellsize!r}")
    if ncols <= 0 or nrows <= 0:
        raise InvalidInputError(f"{path}: ncols and nrows must be positive")
    if "xllcorner" not in header:
        xll -= cellsize / 2
    if "yllcorner" not in header:
        yll -= cellsize / 2

    rows: List[np.ndarray] = []
    for number, line in enumerate(lines[position:], start=position + 1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != ncols:
            raise InvalidInputError(
                f"{path}:{number}: expected {ncols} values, got {len(tokens)}"
            )
        try:
            rows.append(np.array(tokens, dtype=np.float64))
        except ValueError as e:
            raise InvalidInputError(f"{path}:{number}: {e}") from e
    if len(rows) != nrows:
        raise InvalidInputError(f"{path}: expected {nrows} rows, got {len(rows)}")

    try:
        raster = HazardRaster(
            ncols=ncols,
            nrows=nrows,
            xll=xll,
            yll=yll,
            cellsize=cellsize,
            nodata=nodata,
            values=np.vstack(rows),
            units=units,
        )
    except ValueError as e:
        raise InvalidInputError(f"{path}: {e}") from e
    logger.info(f"Read {nrows}x{ncols} raster from {path}")
    return raster


def write_raster_asc(raster: HazardRaster, path: PathLike) -> None:
    """Write an ESRI ASCII grid using shortest round-trip float formatting."""
    header = [
        f"ncols         {raster.ncols}",
        f"nrows         {raster.nrows}",
        f"xllcorner     {raster.xll!r}",
        f"yllcorner     {raster.yll!r}",
        f"cellsize      {raster.cellsize!r}",
        f"NODATA_value  {raster.nodata!r}",
    ]
    body = [" ".join(map(repr, row)) for row in raster.values.tolist()]
    Path(path).write_text("\n".join(header + body) + "\n", encoding="utf-8")


def read_raster_geotiff(path: PathLike, units: Union[str, Units]) -> HazardRaster:
    """
    Read band 1 of a north-up GeoTIFF.

    Requires the optional ``geotiff`` extra (rasterio).
    """
    path = _require_file(path)
    try:
        import rasterio
    except ImportError:
        raise InvalidInputError(
            f"{path}: GeoTIFF support needs rasterio (pip install 'hazcell[geotiff]')"
        ) from None

    with rasterio.open(path) as dataset:
        transform = dataset.transform
        if transform.b != 0 or transform.d != 0 or transform.e != -transform.a:
            raise InvalidInputError(f"{path}: only north-up square-pixel grids are supported")
        values = dataset.read(1).astype(np.float64)
        nodata = dataset.nodata if dataset.nodata is not None else ASC_DEFAULT_NODATA
        cellsize = float(transform.a)
        return HazardRaster(
            ncols=dataset.width,
            nrows=dataset.height,
            xll=float(transform.c),
            yll=float(transform.f) - dataset.height * cellsize,
            cellsize=cellsize,
            nodata=float(nodata),
            values=values,
            units=units,
        )


def read_raster(path: PathLike, units: Union[str, Units]) -> HazardRaster:
    """Read a hazard raster, choosing the reader from the file suffix."""
    suffix = Path(path).suffix.lower()
    if suffix in (".tif", ".tiff"):
        return read_raster_geotiff(path, units)
    return read_raster_asc(path, units)


def read_region_lookup(path: PathLike) -> Dict[str, Tuple[str, IncomeGroup]]:
    """Read a ``country_iso3,continent,income_group`` lookup CSV."""
    path = _require_file(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = {"country_iso3", "continent", "income_group"} - set(frame.columns)
    if missing:
        raise InvalidInputError(f"{path}: lookup missing columns {', '.join(sorted(missing))}")
    lookup: Dict[str, Tuple[str, IncomeGroup]] = {}
    for row in frame.itertuples(index=False):
        try:
            income = IncomeGroup(row.income_group or UNKNOWN)
        except ValueError:
            raise InvalidInputError(
                f"{path}: unknown income group '{row.income_group}'"
            ) from None
        lookup[row.country_iso3.upper()] = (row.continent or UNKNOWN, income)
    return lookup


def read_regions(
    path: PathLike, lookup: Optional[Dict[str, Tuple[str, IncomeGroup]]] = None
) -> List[Region]:
    """
    Read a GeoJSON FeatureCollection of Polygon/MultiPolygon regions.

    Every polygon part becomes its own Region; parts of a MultiPolygon share
    the feature's region_id. Continent and income group left unknown in the
    properties are filled from ``lookup`` by country code.

    Raises:
        InvalidInputError: On a missing region_id, an unsupported geometry,
            an unclosed ring or an antimeridian-crossing ring
    """
    path = _require_file(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{path}: invalid JSON format: {e}") from e
    if document.get("type") != "FeatureCollection":
        raise InvalidInputError(f"{path}: expected a FeatureCollection")

    regions: List[Region] = []
    for number, feature in enumerate(document.get("features", [])):
        properties = feature.get("properties") or {}
        region_id = properties.get("region_id")
        if region_id in (None, ""):
            raise InvalidInputError(f"{path}: feature {number} has no region_id property")
        geometry = feature.get("geometry") or {}
        if geometry.get("type") == "Polygon":
            parts = [geometry["coordinates"]]
        elif geometry.get("type") == "MultiPolygon":
            parts = geometry["coordinates"]
        else:
            raise InvalidInputError(
                f"{path}: feature {region_id} has unsupported geometry {geometry.get('type')}"
            )

        country = str(properties.get("country_iso3") or UNKNOWN).upper()
        if country == UNKNOWN.upper():
            country = UNKNOWN
        continent = properties.get("continent") or UNKNOWN
        income = properties.get("income_group") or UNKNOWN
        if lookup and country in lookup:
            if continent == UNKNOWN:
                continent = lookup[country][0]
            if income == UNKNOWN:
                income = lookup[country][1]

        for part in parts:
            try:
                regions.append(
                    Region(
                        region_id=str(region_id),
                        name=str(properties.get("name") or ""),
                        polygon=tuple(
                            tuple((float(x), float(y)) for x, y, *_ in ring) for ring in part
                        ),
                        continent=continent,
                        income_group=income,
                        country_iso3=country,
                    )
                )
            except ValueError as e:
                raise InvalidInputError(f"{path}: region {region_id}: {e}") from e

    logger.info(f"Read {len(regions)} region parts from {path}")
    return regions


def write_regions(regions: Sequence[Region], path: PathLike) -> None:
    """Write regions as a FeatureCollection; parts sharing a region_id become a MultiPolygon."""
    parts: Dict[str, List[Region]] = {}
    for region in regions:
        parts.setdefault(region.region_id, []).append(region)
    features = []
    for region_id, members in parts.items():
        first = members[0]
        polygons = [[[list(v) for v in ring] for ring in r.polygon] for r in members]
        geometry = (
            {"type": "Polygon", "coordinates": polygons[0]}
            if len(polygons) == 1
            else {"type": "MultiPolygon", "coordinates": polygons}
        )
        features.append(
            {
                "type": "Feature",
                "properties": {
                    "region_id": region_id,
                    "name": first.name,
                    "continent": first.continent,
                    "income_group": first.income_group.value,
                    "country_iso3": first.country_iso3,
                },
                "geometry": geometry,
            }
        )
    document = {"type": "FeatureCollection", "features": features}
    Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")


def write_curve(curve: DamageCurve, path: PathLike) -> None:
    lines = [f"intensity_unit,{curve.intensity_unit.value}", "intensity,fraction"]
    lines += [f"{x!r},{f!r}" for x, f in curve.knots]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_curve(path: PathLike, curve_id: Optional[str] = None) -> DamageCurve:
    """
    Read a damage curve CSV.

    The first line is ``intensity_unit,<unit>``; an optional
    ``intensity,fraction`` header follows, then one knot per row.
    """
    path = _require_file(path)
    with path.open(encoding="utf-8") as f:
        first = f.readline().strip().split(",")
    if len(first) != 2 or first[0].strip() != "intensity_unit":
        raise InvalidInputError(f"{path}: first line must be 'intensity_unit,<unit>'")

    try:
        frame = pd.read_csv(path, skiprows=1, header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise InvalidInputError(f"{path}: no knot rows") from None
    if frame.shape[1] != 2:
        raise InvalidInputError(f"{path}: expected 2 columns per knot row")
    frame = frame.apply(lambda col: col.str.strip())
    if not frame.empty and frame.iloc[0, 0] == "intensity":
        frame = frame.iloc[1:]

    try:
        # float() keeps knots bit-identical to values parsed from rasters
        knots = tuple((float(x), float(f)) for x, f in frame.itertuples(index=False))
    except (TypeError, ValueError):
        raise InvalidInputError(f"{path}: knot rows must be numeric") from None

    try:
        return DamageCurve(
            curve_id=curve_id or path.stem,
            intensity_unit=first[1].strip(),
            knots=knots,
        )
    except ValueError as e:
        raise InvalidInputError(f"{path}: {e}") from e


def default_curve_path(name: str) -> Path:
    """Path of a curve shipped in ``hazcell/data``."""
    return Path(str(resources.files("hazcell") / "data" / f"{name}.csv"))


def load_default_curves() -> Dict[str, DamageCurve]:
    """Default flood depth-damage and cyclone wind curves."""
    return {
        name: read_curve(default_curve_path(name))
        for name in ("flood_depth_default", "wind_default")
    }


def default_region_lookup() -> Dict[str, Tuple[str, IncomeGroup]]:
    return read_region_lookup(Path(str(resources.files("hazcell") / "data" / "region_lookup.csv")))


__all__ = [
    "ASSET_COLUMNS",
    "default_curve_path",
    "default_region_lookup",
    "load_default_curves",
    "read_asset_table",
    "read_assets",
    "read_curve",
    "read_raster",
    "read_raster_asc",
    "read_raster_geotiff",
    "read_region_lookup",
    "read_regions",
    "write_curve",
    "write_raster_asc",
    "write_regions",
]
