"""
Builders shared by the test modules.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np

from hazcell.model import DamageCurve, HazardRaster, Region


def make_raster(
    values,
    xll: float = 0.0,
    yll: float = 0.0,
    cellsize: float = 1.0,
    nodata: float = -9999.0,
    units: str = "meters_depth",
) -> HazardRaster:
    array = np.asarray(values, dtype=np.float64)
    return HazardRaster(
        ncols=array.shape[1],
        nrows=array.shape[0],
        xll=xll,
        yll=yll,
        cellsize=cellsize,
        nodata=nodata,
        values=array,
        units=units,
    )


def square(region_id: str, x0: float, y0: float, x1: float, y1: float, **attrs) -> Region:
    ring = ((x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0))
    return Region(region_id=region_id, polygon=(ring,), **attrs)


def c_shape(region_id: str = "c") -> Region:
    """A C opening to the east; the notch spans x 1..3, y 1..2."""
    ring = ((0.0, 0.0), (3.0, 0.0), (3.0, 1.0), (1.0, 1.0), (1.0, 2.0), (3.0, 2.0),
            (3.0, 3.0), (0.0, 3.0), (0.0, 0.0))
    return Region(region_id=region_id, polygon=(ring,))


def segment_curve(knots: Sequence[Tuple[float, float]], unit: str = "meters_depth") -> DamageCurve:
    return DamageCurve(curve_id="test", intensity_unit=unit, knots=tuple(knots))


def brute_inside(region: Region, x: float, y: float) -> bool:
    """Per-point even-odd ray cast with on-edge points inside."""
    inside = False
    for ring in region.polygon:
        for k in range(len(ring) - 1):
            xi, yi = ring[k]
            xj, yj = ring[k + 1]
            cross = (xj - xi) * (y - yi) - (yj - yi) * (x - xi)
            if cross == 0.0 and min(xi, xj) <= x <= max(xi, xj) and min(yi, yj) <= y <= max(yi, yj):
                return True
            if (yi > y) != (yj > y):
                if x < (xj - xi) * (y - yi) / (yj - yi) + xi:
                    inside = not inside
    return inside


def brute_region(regions: Sequence[Region], x: float, y: float) -> int:
    for position, region in enumerate(regions):
        if brute_inside(region, x, y):
            return position
    return -1


def brute_sample(raster: HazardRaster, x: float, y: float):
    """Containing cell value by direct row/column arithmetic, None when absent."""
    xmax = raster.xll + raster.ncols * raster.cellsize
    ytop = raster.yll + raster.nrows * raster.cellsize
    if x < raster.xll or x > xmax or y < raster.yll or y > ytop:
        return None
    col = min(int(math.floor((x - raster.xll) / raster.cellsize)), raster.ncols - 1)
    row = min(int(math.floor((ytop - y) / raster.cellsize)), raster.nrows - 1)
    value = float(raster.values[row][col])
    return None if value == raster.nodata else value


def brute_fraction(knots: Sequence[Tuple[float, float]], x: float) -> float:
    if x <= knots[0][0]:
        return knots[0][1]
    if x >= knots[-1][0]:
        return knots[-1][1]
    for (x0, f0), (x1, f1) in zip(knots, knots[1:]):
        if x0 <= x < x1:
            return min(max(f0 + (x - x0) * (f1 - f0) / (x1 - x0), f0), f1)
    raise AssertionError("unreachable")


def random_polygon(rng: np.random.Generator, cx: float, cy: float, radius: float) -> Region:
    """Star-shaped (possibly concave) polygon around (cx, cy)."""
    n = int(rng.integers(3, 9))
    angles = np.sort(rng.uniform(0, 2 * np.pi, n))
    radii = rng.uniform(0.3, 1.0, n) * radius
    ring: List[Tuple[float, float]] = [
        (round(cx + r * math.cos(a), 3), round(cy + r * math.sin(a), 3))
        for a, r in zip(angles.tolist(), radii.tolist())
    ]
    ring.append(ring[0])
    return Region(region_id=f"p{int(rng.integers(0, 10**6))}", polygon=(tuple(ring),))
