"""
Domain types shared across the hazard exposure pipeline.

All models are frozen after construction; validation happens in pydantic
validators so an invalid instance cannot exist.
"""

import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)


logger = logging.getLogger(__name__)

DEFAULT_UNIT_COST = 33333.00
UNKNOWN = "unknown"
UNASSIGNED = "unassigned"
HISTORICAL_EPOCH = 1980

CENT = Decimal("0.01")


class HazcellError(Exception):
    """Base class for pipeline errors."""


class InvalidInputError(HazcellError, ValueError):
    """Input data or configuration violates a documented invariant."""


class RejectedRecordError(InvalidInputError):
    """A single input record could not be accepted."""

    def __init__(self, reason: str, value: Any = None):
        super().__init__(reason)
        self.reason = reason
        self.value = value


class UnknownRadioError(RejectedRecordError):
    """Radio label outside GSM/UMTS/LTE/NR."""

    def __init__(self, value: Any):
        super().__init__(f"unknown radio '{value}'", value)


class UnitMismatchError(InvalidInputError):
    """Curve and raster (or caller) disagree on intensity units."""


class ManifestError(InvalidInputError):
    """Manifest is malformed or references something that does not resolve."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


class Radio(str, Enum):
    GSM = "GSM"
    UMTS = "UMTS"
    LTE = "LTE"
    NR = "NR"


class Generation(str, Enum):
    G2 = "2G"
    G3 = "3G"
    G4 = "4G"
    G5 = "5G"


class TowerDesign(str, Enum):
    MONOPOLE = "monopole"
    SELF_SUPPORTED = "self_supported"
    GUYED = "guyed"
    UNKNOWN = "unknown"


class Units(str, Enum):
    METERS_DEPTH = "meters_depth"
    KMH_WIND = "kmh_wind"
    MS_WIND = "ms_wind"


class Hazard(str, Enum):
    COASTAL = "coastal"
    RIVERINE = "riverine"
    CYCLONE = "cyclone"


class Pathway(str, Enum):
    HISTORICAL = "historical"
    RCP45 = "RCP4.5"
    RCP85 = "RCP8.5"


class IncomeGroup(str, Enum):
    HIC = "HIC"
    UMC = "UMC"
    LMC = "LMC"
    LIC = "LIC"
    UNKNOWN = "unknown"


class DamageState(str, Enum):
    DS0_NONE = "DS0_none"
    DS1_BACKUP_EXHAUSTED = "DS1_backup_exhausted"
    DS2_GENERATOR_FAILURE = "DS2_generator_failure"
    DS3_GENERATOR_DAMAGE = "DS3_generator_damage"
    DS4_EQUIPMENT_LOSS = "DS4_equipment_loss"
    DS5_CATASTROPHIC = "DS5_catastrophic"


DAMAGE_STATES: Tuple[DamageState, ...] = tuple(DamageState)

RADIO_GENERATION: Dict[Radio, Generation] = {
    Radio.GSM: Generation.G2,
    Radio.UMTS: Generation.G3,
    Radio.LTE: Generation.G4,
    Radio.NR: Generation.G5,
}

RIVERINE_MODELS = (
    "GFDL-ESM2M",
    "HadGEM2-ES",
    "IPSL-CM5A-LR",
    "MIROC-ESM-CHEM",
    "NorESM1-M",
)
# WATCH is the observation-forced historical riverine layer.
RIVERINE_MEMBERS = RIVERINE_MODELS + ("WATCH",)

CYCLONE_MODELS = (
    "CMCC-CM2-VHR4",
    "CNRM-CM6-1-HR",
    "EC-Earth3P-HR",
    "HadGEM3-GC31-HM",
)
# STORM is the present-climate cyclone layer.
CYCLONE_MEMBERS = CYCLONE_MODELS + ("STORM",)

COASTAL_MEMBERS = tuple(
    f"p{percentile}_{subsidence}_subsidence"
    for percentile in (5, 50, 95)
    for subsidence in ("with", "without")
)

MEMBERS_BY_HAZARD: Dict[Hazard, Tuple[str, ...]] = {
    Hazard.RIVERINE: RIVERINE_MEMBERS,
    Hazard.CYCLONE: CYCLONE_MEMBERS,
    Hazard.COASTAL: COASTAL_MEMBERS,
}

# Intensity unit a layer is assumed to carry when the manifest does not say.
HAZARD_UNITS: Dict[Hazard, Units] = {
    Hazard.COASTAL: Units.METERS_DEPTH,
    Hazard.RIVERINE: Units.METERS_DEPTH,
    Hazard.CYCLONE: Units.KMH_WIND,
}


def map_radio_generation(radio: Union[str, Radio]) -> Generation:
    """
    Map a radio label to its cellular generation.

    Args:
        radio: GSM, UMTS, LTE or NR (case-insensitive)

    Returns:
        The generation the radio standard belongs to

    Raises:
        UnknownRadioError: If the label is not one of the four radios
    """
    label = radio.value if isinstance(radio, Radio) else str(radio).strip().upper()
    try:
        return RADIO_GENERATION[Radio(label)]
    except ValueError:
        raise UnknownRadioError(radio) from None


def to_cents(value: float) -> Decimal:
    """Round to cents, half away from zero, from the shortest float repr."""
    return Decimal(repr(float(value))).quantize(CENT, rounding=ROUND_HALF_UP) + 0


def format_usd(value: float) -> str:
    return str(to_cents(value))


class CostConfig(BaseModel):
    """Per-cell replacement cost settings used while reading assets."""

    model_config = ConfigDict(frozen=True)

    default_unit_cost: float = Field(default=DEFAULT_UNIT_COST, ge=0)
    by_generation: Dict[Generation, float] = Field(default_factory=dict)

    @field_validator("by_generation")
    @classmethod
    def _nonnegative(cls, value: Dict[Generation, float]) -> Dict[Generation, float]:
        for generation, cost in value.items():
            if cost < 0:
                raise ValueError(f"unit cost for {generation.value} is negative")
        return value

    def unit_cost_for(self, generation: Generation) -> float:
        return self.by_generation.get(generation, self.default_unit_cost)


class Asset(BaseModel):
    """One cellular cell."""

    model_config = ConfigDict(frozen=True)

    asset_id: str
    lon: float = Field(ge=-180, le=180)
    lat: float = Field(ge=-90, le=90)
    radio: Radio
    generation: Generation
    tower_design: TowerDesign = TowerDesign.UNKNOWN
    unit_cost: float = Field(default=DEFAULT_UNIT_COST, ge=0)
    country_iso3: str = UNKNOWN

    @model_validator(mode="before")
    @classmethod
    def _derive_generation(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("generation") is None and "radio" in data:
            data = dict(data)
            data["generation"] = map_radio_generation(data["radio"])
        return data

    @field_validator("radio", mode="before")
    @classmethod
    def _normalise_radio(cls, value: Any) -> Any:
        if isinstance(value, str):
            return value.strip().upper()
        return value

    @model_validator(mode="after")
    def _generation_matches_radio(self) -> "Asset":
        expected = map_radio_generation(self.radio)
        if self.generation != expected:
            raise ValueError(
                f"generation {self.generation.value} does not match radio "
                f"{self.radio.value} (expected {expected.value})"
            )
        return self


@dataclass(frozen=True)
class AssetTable:
    """
    Columnar view of a list of assets.

    The engine works on these arrays directly so millions of cells never
    become individual model objects.
    """

    asset_id: np.ndarray
    lon: np.ndarray
    lat: np.ndarray
    radio: np.ndarray
    generation: np.ndarray
    tower_design: np.ndarray
    unit_cost: np.ndarray
    country_iso3: np.ndarray

    def __len__(self) -> int:
        return int(self.lon.shape[0])

    @classmethod
    def empty(cls) -> "AssetTable":
        return cls.from_assets([])

    @classmethod
    def from_assets(cls, assets: Sequence[Asset]) -> "AssetTable":
        return cls(
            asset_id=np.array([a.asset_id for a in assets], dtype=object),
            lon=np.array([a.lon for a in assets], dtype=np.float64),
            lat=np.array([a.lat for a in assets], dtype=np.float64),
            radio=np.array([a.radio.value for a in assets], dtype=object),
            generation=np.array([a.generation.value for a in assets], dtype=object),
            tower_design=np.array([a.tower_design.value for a in assets], dtype=object),
            unit_cost=np.array([a.unit_cost for a in assets], dtype=np.float64),
            country_iso3=np.array([a.country_iso3 for a in assets], dtype=object),
        )

    def to_assets(self) -> List[Asset]:
        return [
            Asset(
                asset_id=self.asset_id[i],
                lon=float(self.lon[i]),
                lat=float(self.lat[i]),
                radio=self.radio[i],
                generation=self.generation[i],
                tower_design=self.tower_design[i],
                unit_cost=float(self.unit_cost[i]),
                country_iso3=self.country_iso3[i],
            )
            for i in range(len(self))
        ]

    def slice(self, start: int, stop: int) -> "AssetTable":
        return AssetTable(
            asset_id=self.asset_id[start:stop],
            lon=self.lon[start:stop],
            lat=self.lat[start:stop],
            radio=self.radio[start:stop],
            generation=self.generation[start:stop],
            tower_design=self.tower_design[start:stop],
            unit_cost=self.unit_cost[start:stop],
            country_iso3=self.country_iso3[start:stop],
        )


class HazardRaster(BaseModel):
    """
    Georeferenced intensity grid.

    ``values`` has shape (nrows, ncols) and row 0 is the northernmost row.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    ncols: int = Field(gt=0)
    nrows: int = Field(gt=0)
    xll: float
    yll: float
    cellsize: float = Field(gt=0)
    nodata: float
    values: np.ndarray
    units: Units

    @field_validator("values", mode="before")
    @classmethod
    def _as_readonly_array(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=np.float64, copy=True)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _check_grid(self) -> "HazardRaster":
        if self.values.size != self.ncols * self.nrows:
            raise ValueError(
                f"expected {self.ncols * self.nrows} values, got {self.values.size}"
            )
        if self.values.shape != (self.nrows, self.ncols):
            object.__setattr__(self, "values", self.values.reshape(self.nrows, self.ncols))
        data = self.values[~self.nodata_mask]
        if np.isnan(data).any():
            raise ValueError("raster contains NaN values that are not nodata")
        if data.size and data.min() < 0:
            raise ValueError(f"raster contains negative value {data.min()!r}")
        return self

    @property
    def nodata_mask(self) -> np.ndarray:
        if np.isnan(self.nodata):
            return np.isnan(self.values)
        return self.values == self.nodata

    @property
    def xmax(self) -> float:
        return self.xll + self.ncols * self.cellsize

    @property
    def ytop(self) -> float:
        return self.yll + self.nrows * self.cellsize

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        return (self.xll, self.yll, self.xmax, self.ytop)

    def masked(self) -> np.ndarray:
        """Values with nodata replaced by NaN."""
        return np.where(self.nodata_mask, np.nan, self.values)

    def identical(self, other: "HazardRaster") -> bool:
        """Bit-for-bit comparison of header and values."""
        return (
            self.ncols == other.ncols
            and self.nrows == other.nrows
            and repr(self.xll) == repr(other.xll)
            and repr(self.yll) == repr(other.yll)
            and repr(self.cellsize) == repr(other.cellsize)
            and repr(self.nodata) == repr(other.nodata)
            and self.units == other.units
            and self.values.tobytes() == other.values.tobytes()
        )


class Scenario(BaseModel):
    """Hazard x pathway x epoch x return period x model member."""

    model_config = ConfigDict(frozen=True)

    hazard: Hazard
    pathway: Pathway
    epoch: int
    return_period_years: int = Field(gt=0)
    model_member: str

    @computed_field  # type: ignore[misc]
    @property
    def annual_probability(self) -> float:
        return 1 / self.return_period_years

    @model_validator(mode="after")
    def _check_consistency(self) -> "Scenario":
        historical = self.pathway == Pathway.HISTORICAL
        if historical != (self.epoch == HISTORICAL_EPOCH):
            raise ValueError(
                f"pathway {self.pathway.value} is inconsistent with epoch {self.epoch}: "
                f"the historical pathway is exactly epoch {HISTORICAL_EPOCH}"
            )
        members = MEMBERS_BY_HAZARD[self.hazard]
        if self.model_member not in members:
            raise ValueError(
                f"unknown {self.hazard.value} model member '{self.model_member}'; "
                f"expected one of {', '.join(members)}"
            )
        return self

    @property
    def key(self) -> str:
        return scenario_key(self)

    @property
    def group_key(self) -> str:
        """Key shared by all members of one ensemble."""
        return (
            f"{self.hazard.value}__{self.pathway.value}__{self.epoch}"
            f"__rp{self.return_period_years}"
        )

    def sort_key(self) -> Tuple[str, str, int, int, str]:
        return (
            self.hazard.value,
            self.pathway.value,
            self.epoch,
            self.return_period_years,
            self.model_member,
        )


def scenario_key(scenario: Scenario) -> str:
    """``<hazard>__<pathway>__<epoch>__rp<RP>__<member>``"""
    return f"{scenario.group_key}__{scenario.model_member}"


def parse_scenario_key(key: str) -> Scenario:
    parts = key.split("__")
    if len(parts) != 5 or not parts[3].startswith("rp"):
        raise InvalidInputError(f"malformed scenario key '{key}'")
    hazard, pathway, epoch, rp, member = parts
    try:
        return Scenario(
            hazard=hazard,
            pathway=pathway,
            epoch=int(epoch),
            return_period_years=int(rp[2:]),
            model_member=member,
        )
    except ValueError as e:
        raise InvalidInputError(f"invalid scenario key '{key}': {e}") from e


def validate_scenario(scenario: Union[Scenario, Dict[str, Any]]) -> Scenario:
    """
    Re-validate a scenario, recomputing its annual probability.

    Raises:
        InvalidInputError: On inconsistent pathway/epoch or a nonpositive
            return period
    """
    data = scenario.model_dump() if isinstance(scenario, Scenario) else dict(scenario)
    data.pop("annual_probability", None)
    try:
        return Scenario.model_validate(data)
    except ValueError as e:
        raise InvalidInputError(f"invalid scenario: {e}") from e


class DamageCurve(BaseModel):
    """Monotone piecewise-linear map from intensity to damage fraction."""

    model_config = ConfigDict(frozen=True)

    curve_id: str
    intensity_unit: Units
    knots: Tuple[Tuple[float, float], ...]

    @model_validator(mode="after")
    def _check_knots(self) -> "DamageCurve":
        if len(self.knots) < 2:
            raise ValueError(f"curve {self.curve_id} needs at least 2 knots")
        if self.knots[0][0] < 0:
            raise ValueError(f"curve {self.curve_id} starts below zero intensity")
        for (x0, f0), (x1, f1) in zip(self.knots, self.knots[1:]):
            if not x1 > x0:
                raise ValueError(
                    f"curve {self.curve_id} intensities not strictly increasing at {x1!r}"
                )
            if f1 < f0:
                raise ValueError(f"curve {self.curve_id} fractions decrease at {x1!r}")
        for _, fraction in self.knots:
            if not 0.0 <= fraction <= 1.0:
                raise ValueError(
                    f"curve {self.curve_id} fraction {fraction!r} outside [0, 1]"
                )
        return self

    @cached_property
    def intensities(self) -> np.ndarray:
        return np.array([x for x, _ in self.knots], dtype=np.float64)

    @cached_property
    def fractions(self) -> np.ndarray:
        return np.array([f for _, f in self.knots], dtype=np.float64)


Ring = Tuple[Tuple[float, float], ...]


class Region(BaseModel):
    """One polygon part of a reporting region (first ring outer, others holes)."""

    model_config = ConfigDict(frozen=True)

    region_id: str
    name: str = ""
    polygon: Tuple[Ring, ...]
    continent: str = UNKNOWN
    income_group: IncomeGroup = IncomeGroup.UNKNOWN
    country_iso3: str = UNKNOWN

    @field_validator("polygon")
    @classmethod
    def _check_rings(cls, rings: Tuple[Ring, ...]) -> Tuple[Ring, ...]:
        if not rings:
            raise ValueError("polygon has no rings")
        for ring in rings:
            if len(ring) < 4:
                raise ValueError(f"ring has {len(ring)} vertices, need at least 4")
            if ring[0] != ring[-1]:
                raise ValueError(f"ring not closed: {ring[0]} != {ring[-1]}")
            for (x0, _), (x1, _) in zip(ring, ring[1:]):
                if abs(x1 - x0) > 180:
                    raise ValueError("ring crosses the antimeridian")
            for x, y in ring:
                if not (-180 <= x <= 180 and -90 <= y <= 90):
                    raise ValueError(f"vertex ({x}, {y}) outside lon/lat range")
        return rings

    @cached_property
    def ring_arrays(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.array(ring, dtype=np.float64) for ring in self.polygon)

    @cached_property
    def bbox(self) -> Tuple[float, float, float, float]:
        xs = [x for ring in self.polygon for x, _ in ring]
        ys = [y for ring in self.polygon for _, y in ring]
        return (min(xs), min(ys), max(xs), max(ys))


class ExposureRecord(BaseModel):
    """Outcome of intersecting one asset with one hazard layer."""

    model_config = ConfigDict(frozen=True)

    asset_id: str
    scenario: Scenario
    intensity: Optional[float] = None
    exposed: bool = False
    damage_fraction: float = Field(default=0.0, ge=0, le=1)
    damage_cost: float = Field(default=0.0, ge=0)
    damage_state: DamageState = DamageState.DS0_NONE
    region_id: str = UNASSIGNED
    continent: str = UNKNOWN
    income_group: IncomeGroup = IncomeGroup.UNKNOWN
    country_iso3: str = UNKNOWN
    generation: Optional[Generation] = None

    @model_validator(mode="after")
    def _absent_means_undamaged(self) -> "ExposureRecord":
        if self.intensity is None and self.exposed:
            raise ValueError("record without intensity cannot be exposed")
        if not self.exposed and (
            self.damage_fraction != 0
            or self.damage_cost != 0
            or self.damage_state != DamageState.DS0_NONE
        ):
            raise ValueError("unexposed record must carry zero damage")
        return self


class AggregateResult(BaseModel):
    """Grouped totals, optionally with ensemble statistics and a baseline delta."""

    model_config = ConfigDict(frozen=True)

    key: Dict[str, Union[str, int]] = Field(default_factory=dict)
    cell_count: int = Field(ge=0)
    total_assets: int = Field(ge=0)
    damage_cost_total: float = Field(ge=0)
    members: int = Field(default=1, ge=1)
    ensemble_mean: Optional[float] = None
    ensemble_min: Optional[float] = None
    ensemble_max: Optional[float] = None
    pct_change_vs_baseline: Optional[int] = None

    @model_validator(mode="after")
    def _check_ranges(self) -> "AggregateResult":
        if self.cell_count > self.total_assets:
            raise ValueError(
                f"cell_count {self.cell_count} exceeds assets in group {self.total_assets}"
            )
        stats = (self.ensemble_min, self.ensemble_mean, self.ensemble_max)
        if all(s is not None for s in stats) and not stats[0] <= stats[1] <= stats[2]:
            raise ValueError(f"ensemble statistics out of order: {stats}")
        return self


class IngestReport(BaseModel):
    """Accepted/rejected accounting for one input file."""

    source: str
    total_records: int = Field(ge=0)
    accepted_count: int = Field(ge=0)
    rejected_count: int = Field(ge=0)
    rejection_reasons: List[Tuple[int, str]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _totals_add_up(self) -> "IngestReport":
        if self.accepted_count + self.rejected_count != self.total_records:
            raise ValueError("accepted + rejected must equal total records")
        return self
