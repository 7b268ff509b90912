"""
Geometric kernel: raster sampling, mosaicking, zonal statistics and
point-in-polygon region assignment.

Every vectorized routine evaluates the same floating point expressions as
its scalar counterpart, so both paths agree bit for bit.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .model import HazardRaster, InvalidInputError, Region


logger = logging.getLogger(__name__)

MIN_INDEX_BINS = 8
ALIGNMENT_TOLERANCE = 1e-6


def _cell_of(raster: HazardRaster, lon: float, lat: float) -> Optional[Tuple[int, int]]:
    if not (raster.xll <= lon <= raster.xmax and raster.yll <= lat <= raster.ytop):
        return None
    # Half-open cells: a point on an internal edge belongs to the east/south cell.
    col = min(math.floor((lon - raster.xll) / raster.cellsize), raster.ncols - 1)
    row = min(math.floor((raster.ytop - lat) / raster.cellsize), raster.nrows - 1)
    return row, col


def sample(raster: HazardRaster, lon: float, lat: float) -> Optional[float]:
    """
    Value of the cell containing (lon, lat), or None outside the extent or
    on nodata.
    """
    cell = _cell_of(raster, lon, lat)
    if cell is None:
        return None
    value = float(raster.values[cell])
    if value == raster.nodata or math.isnan(value):
        return None
    return value


def sample_many(raster: HazardRaster, lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
    """Vectorized ``sample``; absent values are NaN."""
    lons = np.asarray(lons, dtype=np.float64)
    lats = np.asarray(lats, dtype=np.float64)
    out = np.full(lons.shape, np.nan)
    inside = (
        (lons >= raster.xll) & (lons <= raster.xmax)
        & (lats >= raster.yll) & (lats <= raster.ytop)
    )
    if not inside.any():
        return out
    cols = np.minimum(
        np.floor((lons[inside] - raster.xll) / raster.cellsize), raster.ncols - 1
    ).astype(np.intp)
    rows = np.minimum(
        np.floor((raster.ytop - lats[inside]) / raster.cellsize), raster.nrows - 1
    ).astype(np.intp)
    values = raster.values[rows, cols]
    values = np.where(values == raster.nodata, np.nan, values)
    out[inside] = values
    return out


def mosaic(rasters: Sequence[HazardRaster], combine: str = "max") -> HazardRaster:
    """
    Combine aligned rasters over the union of their extents.

    Each output cell is the maximum of every non-nodata input covering it and
    nodata where none does. The output uses the first raster's nodata value.

    Raises:
        InvalidInputError: On an empty input, mixed units or cellsizes,
            grids that do not share a lattice, or an unsupported combine
    """
    if combine != "max":
        raise InvalidInputError(f"unsupported combine '{combine}'")
    if not rasters:
        raise InvalidInputError("mosaic needs at least one raster")

    first = rasters[0]
    cellsize = first.cellsize
    for raster in rasters[1:]:
        if raster.units != first.units:
            raise InvalidInputError(
                f"cannot mosaic {raster.units.value} with {first.units.value}"
            )
        if not math.isclose(raster.cellsize, cellsize, rel_tol=1e-12):
            raise InvalidInputError(
                f"cellsize {raster.cellsize!r} differs from {cellsize!r}"
            )

    def offset(delta: float) -> int:
        steps = delta / cellsize
        if abs(steps - round(steps)) > ALIGNMENT_TOLERANCE:
            raise InvalidInputError("rasters are not aligned to a common grid")
        return int(round(steps))

    xll = min(r.xll for r in rasters)
    yll = min(r.yll for r in rasters)
    ncols = max(offset(r.xll - xll) + r.ncols for r in rasters)
    nrows = max(offset(r.yll - yll) + r.nrows for r in rasters)

    merged = np.full((nrows, ncols), np.nan)
    for raster in rasters:
        col0 = offset(raster.xll - xll)
        row0 = nrows - (offset(raster.yll - yll) + raster.nrows)
        window = merged[row0:row0 + raster.nrows, col0:col0 + raster.ncols]
        np.fmax(window, raster.masked(), out=window)

    logger.debug(f"Mosaicked {len(rasters)} rasters into {nrows}x{ncols}")
    return HazardRaster(
        ncols=ncols,
        nrows=nrows,
        xll=xll,
        yll=yll,
        cellsize=cellsize,
        nodata=first.nodata,
        values=np.where(np.isnan(merged), first.nodata, merged),
        units=first.units,
    )


def _on_segment(x: float, y: float, xi: float, yi: float, xj: float, yj: float) -> bool:
    if (xj - xi) * (y - yi) - (yj - yi) * (x - xi) != 0.0:
        return False
    return min(xi, xj) <= x <= max(xi, xj) and min(yi, yj) <= y <= max(yi, yj)


def point_in_polygon(region: Region, lon: float, lat: float) -> bool:
    """
    Even-odd ray casting over all rings (holes subtract).

    A point exactly on any ring edge counts as inside.
    """
    inside = False
    for ring in region.polygon:
        for (xi, yi), (xj, yj) in zip(ring, ring[1:]):
            if _on_segment(lon, lat, xi, yi, xj, yj):
                return True
            if (yi > lat) != (yj > lat) and lon < (xj - xi) * (lat - yi) / (yj - yi) + xi:
                inside = not inside
    return inside


def points_in_polygon(region: Region, lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
    """Vectorized ``point_in_polygon``."""
    x = np.asarray(lons, dtype=np.float64)
    y = np.asarray(lats, dtype=np.float64)
    inside = np.zeros(x.shape, dtype=bool)
    on_edge = np.zeros(x.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for ring in region.ring_arrays:
            for (xi, yi), (xj, yj) in zip(ring[:-1], ring[1:]):
                on_edge |= (
                    ((xj - xi) * (y - yi) - (yj - yi) * (x - xi) == 0.0)
                    & (x >= min(xi, xj)) & (x <= max(xi, xj))
                    & (y >= min(yi, yj)) & (y <= max(yi, yj))
                )
                spans = (yi > y) != (yj > y)
                inside ^= spans & (x < (xj - xi) * (y - yi) / (yj - yi) + xi)
    return inside | on_edge


class RegionIndex:
    """
    Uniform grid of bins over the regions' bounding box.

    Each bin lists, in file order, the regions whose bounding box reaches
    into it. Bin membership is computed with the same floor expression used
    for query points, so a query never misses a candidate.
    """

    def __init__(self, regions: Sequence[Region]):
        self.regions: List[Region] = list(regions)
        n_rings = sum(len(r.polygon) for r in self.regions)
        self.nbins = max(MIN_INDEX_BINS, math.ceil(math.sqrt(n_rings)))

        if self.regions:
            boxes = np.array([r.bbox for r in self.regions], dtype=np.float64)
            self.bbox = (
                float(boxes[:, 0].min()),
                float(boxes[:, 1].min()),
                float(boxes[:, 2].max()),
                float(boxes[:, 3].max()),
            )
        else:
            boxes = np.empty((0, 4))
            self.bbox = (0.0, 0.0, 0.0, 0.0)
        x0, y0, x1, y1 = self.bbox
        self.bin_width = (x1 - x0) / self.nbins or 1.0
        self.bin_height = (y1 - y0) / self.nbins or 1.0

        self.bins: List[List[int]] = [[] for _ in range(self.nbins * self.nbins)]
        for position, (bx0, by0, bx1, by1) in enumerate(boxes):
            c0, r0 = self._bin_of(bx0, by0)
            c1, r1 = self._bin_of(bx1, by1)
            for r in range(r0, r1 + 1):
                for c in range(c0, c1 + 1):
                    self.bins[r * self.nbins + c].append(position)
        logger.debug(
            f"Indexed {len(self.regions)} regions into {self.nbins}x{self.nbins} bins"
        )

    def _bin_of(self, x: float, y: float) -> Tuple[int, int]:
        c = math.floor((x - self.bbox[0]) / self.bin_width)
        r = math.floor((y - self.bbox[1]) / self.bin_height)
        return min(max(c, 0), self.nbins - 1), min(max(r, 0), self.nbins - 1)

    def _covers(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x0, y0, x1, y1 = self.bbox
        return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)

    def candidates(self, lon: float, lat: float) -> List[int]:
        if not self.regions or not self._covers(np.float64(lon), np.float64(lat)):
            return []
        c, r = self._bin_of(lon, lat)
        return self.bins[r * self.nbins + c]

    def locate(self, lon: float, lat: float) -> int:
        """Position of the first region containing the point, or -1."""
        for position in self.candidates(lon, lat):
            if point_in_polygon(self.regions[position], lon, lat):
                return position
        return -1

    def locate_many(self, lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
        """Vectorized ``locate``."""
        x = np.asarray(lons, dtype=np.float64)
        y = np.asarray(lats, dtype=np.float64)
        found = np.full(x.shape, -1, dtype=np.int64)
        if not self.regions or x.size == 0:
            return found

        covered = np.flatnonzero(self._covers(x, y))
        if covered.size == 0:
            return found
        cols = np.clip(
            np.floor((x[covered] - self.bbox[0]) / self.bin_width), 0, self.nbins - 1
        ).astype(np.int64)
        rows = np.clip(
            np.floor((y[covered] - self.bbox[1]) / self.bin_height), 0, self.nbins - 1
        ).astype(np.int64)
        bin_ids = rows * self.nbins + cols

        order = np.argsort(bin_ids, kind="stable")
        sorted_bins = bin_ids[order]
        starts = np.flatnonzero(np.r_[True, sorted_bins[1:] != sorted_bins[:-1]])
        stops = np.r_[starts[1:], sorted_bins.size]
        for start, stop in zip(starts, stops):
            members = covered[order[start:stop]]
            pending = members
            for position in self.bins[int(sorted_bins[start])]:
                if pending.size == 0:
                    break
                hit = points_in_polygon(self.regions[position], x[pending], y[pending])
                found[pending[hit]] = position
                pending = pending[~hit]
        return found


def assign_region(index: RegionIndex, lon: float, lat: float) -> Optional[str]:
    """
    region_id of the first region (file order) containing the point, or None
    when the point is unassigned.
    """
    position = index.locate(lon, lat)
    return index.regions[position].region_id if position >= 0 else None


def assign_regions(index: RegionIndex, lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
    """Region positions for many points; -1 marks unassigned."""
    return index.locate_many(lons, lats)


def pixel_centers(raster: HazardRaster) -> Tuple[np.ndarray, np.ndarray]:
    """Longitudes of column centers and latitudes of row centers (north first)."""
    cols = np.arange(raster.ncols, dtype=np.float64)
    rows = np.arange(raster.nrows, dtype=np.float64)
    return (
        raster.xll + (cols + 0.5) * raster.cellsize,
        raster.ytop - (rows + 0.5) * raster.cellsize,
    )


def zonal_mask(raster: HazardRaster, regions: Sequence[Region], threshold: float) -> np.ndarray:
    """
    Boolean grid of pixels whose center lies in any of ``regions`` and whose
    value is valid and above ``threshold``.
    """
    if threshold < 0:
        raise InvalidInputError(f"threshold must be nonnegative, got {threshold!r}")
    centers_x, centers_y = pixel_centers(raster)
    with np.errstate(invalid="ignore"):
        selected = ~raster.nodata_mask & (raster.values > threshold)
    covered = np.zeros(selected.shape, dtype=bool)
    for region in regions:
        x0, y0, x1, y1 = region.bbox
        col_idx = np.flatnonzero((centers_x >= x0) & (centers_x <= x1))
        row_idx = np.flatnonzero((centers_y >= y0) & (centers_y <= y1))
        if col_idx.size == 0 or row_idx.size == 0:
            continue
        grid_rows, grid_cols = np.meshgrid(row_idx, col_idx, indexing="ij")
        window = selected[grid_rows, grid_cols]
        if not window.any():
            continue
        hit = np.zeros(window.shape, dtype=bool)
        hit[window] = points_in_polygon(
            region, centers_x[grid_cols[window]], centers_y[grid_rows[window]]
        )
        covered[grid_rows, grid_cols] |= hit
    return covered & selected


def zonal_sums(
    raster: HazardRaster, regions: Sequence[Region], threshold: float = 0.0
) -> Tuple[int, float]:
    """Count and exact sum of the pixels selected by ``zonal_mask``."""
    mask = zonal_mask(raster, regions, threshold)
    values = raster.values[mask]
    return int(values.size), math.fsum(values.tolist())


def zonal_stats(
    raster: HazardRaster, region: Region, threshold: float = 0.0
) -> Tuple[int, Optional[float]]:
    """
    Flooded pixel count and mean intensity over those pixels.

    A pixel counts when its center is inside the region and its value is
    valid and strictly above ``threshold``. Returns (0, None) when nothing
    counts.
    """
    count, total = zonal_sums(raster, [region], threshold)
    if count == 0:
        return 0, None
    return count, total / count
