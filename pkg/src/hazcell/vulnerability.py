"""
Vulnerability: hazard intensity to damage fraction, cost and damage state.
"""

import bisect
import logging
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .model import (
    DAMAGE_STATES,
    DamageCurve,
    DamageState,
    Hazard,
    InvalidInputError,
    TowerDesign,
    Units,
    UnitMismatchError,
)


logger = logging.getLogger(__name__)

DEFAULT_DAMAGE_STATE_THRESHOLDS: Tuple[float, ...] = (0.1, 0.25, 0.5, 0.9)


def _check_unit(curve: DamageCurve, unit: Optional[Union[str, Units]]) -> None:
    if unit is not None and Units(unit) != curve.intensity_unit:
        raise UnitMismatchError(
            f"curve {curve.curve_id} expects {curve.intensity_unit.value}, "
            f"got {Units(unit).value}"
        )


def damage_fraction(
    curve: DamageCurve, intensity: float, unit: Optional[Union[str, Units]] = None
) -> float:
    """
    Piecewise-linear damage fraction, clamped to the first and last knots.

    Args:
        curve: Damage curve
        intensity: Nonnegative hazard intensity in the curve's units
        unit: Unit the caller measured ``intensity`` in, if it should be checked

    Raises:
        UnitMismatchError: If ``unit`` differs from the curve's unit
    """
    _check_unit(curve, unit)
    if intensity < 0:
        raise InvalidInputError(f"intensity must be nonnegative, got {intensity!r}")
    xs = [x for x, _ in curve.knots]
    fs = [f for _, f in curve.knots]
    if intensity <= xs[0]:
        return fs[0]
    if intensity >= xs[-1]:
        return fs[-1]
    j = bisect.bisect_right(xs, intensity) - 1
    x0, x1, f0, f1 = xs[j], xs[j + 1], fs[j], fs[j + 1]
    value = f0 + (intensity - x0) * (f1 - f0) / (x1 - x0)
    return min(max(value, f0), f1)


def damage_fractions(
    curve: DamageCurve, intensities: np.ndarray, unit: Optional[Union[str, Units]] = None
) -> np.ndarray:
    """Vectorized ``damage_fraction``; NaN intensities give NaN."""
    _check_unit(curve, unit)
    x = np.asarray(intensities, dtype=np.float64)
    xs, fs = curve.intensities, curve.fractions
    j = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
    x0, x1, f0, f1 = xs[j], xs[j + 1], fs[j], fs[j + 1]
    value = np.minimum(np.maximum(f0 + (x - x0) * (f1 - f0) / (x1 - x0), f0), f1)
    value = np.where(x <= xs[0], fs[0], value)
    value = np.where(x >= xs[-1], fs[-1], value)
    return np.where(np.isnan(x), np.nan, value)


def damage_cost(fraction: float, unit_cost: float) -> float:
    """
    Direct damage cost, unrounded.

    Rounding to cents happens only when results are reported
    (``model.format_usd``).
    """
    return fraction * unit_cost


def _check_thresholds(thresholds: Sequence[float]) -> None:
    if len(thresholds) != len(DAMAGE_STATES) - 2:
        raise InvalidInputError(
            f"expected {len(DAMAGE_STATES) - 2} damage state thresholds, got {len(thresholds)}"
        )
    if any(not 0 < t <= 1 for t in thresholds) or list(thresholds) != sorted(set(thresholds)):
        raise InvalidInputError(
            f"damage state thresholds must increase strictly within (0, 1]: {list(thresholds)}"
        )


def classify_damage_state(
    fraction: float, thresholds: Sequence[float] = DEFAULT_DAMAGE_STATE_THRESHOLDS
) -> DamageState:
    """
    Map a damage fraction to a damage state.

    0 is DS0; each state above covers (previous threshold, threshold], with
    the last state reaching 1.
    """
    _check_thresholds(thresholds)
    if fraction <= 0:
        return DamageState.DS0_NONE
    return DAMAGE_STATES[bisect.bisect_left(list(thresholds), fraction) + 1]


def classify_damage_states(
    fractions: np.ndarray, thresholds: Sequence[float] = DEFAULT_DAMAGE_STATE_THRESHOLDS
) -> np.ndarray:
    """Vectorized ``classify_damage_state``; returns state labels."""
    _check_thresholds(thresholds)
    f = np.asarray(fractions, dtype=np.float64)
    labels = np.array([s.value for s in DAMAGE_STATES], dtype=object)
    index = np.searchsorted(np.asarray(thresholds, dtype=np.float64), f, side="left") + 1
    return np.where(f > 0, labels[np.minimum(index, len(labels) - 1)], labels[0])


def exposure_threshold_for(curve: DamageCurve) -> float:
    """Intensity of the first knot with a nonzero damage fraction."""
    for intensity, fraction in curve.knots:
        if fraction > 0:
            return intensity
    return curve.knots[-1][0]


class CurveSet:
    """
    Damage curves registered per hazard and tower design.

    The curve registered under ``TowerDesign.UNKNOWN`` is the hazard default.
    """

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)
        self.curves: Dict[Tuple[Hazard, TowerDesign], DamageCurve] = {}

    def register(
        self,
        curve: DamageCurve,
        hazard: Union[str, Hazard],
        tower_design: Union[str, TowerDesign] = TowerDesign.UNKNOWN,
    ) -> None:
        key = (Hazard(hazard), TowerDesign(tower_design))
        self.curves[key] = curve
        self.logger.debug(
            f"Registered curve {curve.curve_id} for {key[0].value}/{key[1].value}"
        )

    def select(
        self, hazard: Union[str, Hazard], tower_design: Union[str, TowerDesign]
    ) -> DamageCurve:
        return select_curve(self, hazard, tower_design)


def select_curve(
    curve_set: CurveSet,
    hazard: Union[str, Hazard],
    tower_design: Union[str, TowerDesign] = TowerDesign.UNKNOWN,
) -> DamageCurve:
    """
    The (hazard, tower_design) curve if registered, else the hazard default.

    Raises:
        InvalidInputError: If the hazard has no default curve
    """
    hazard = Hazard(hazard)
    exact = curve_set.curves.get((hazard, TowerDesign(tower_design)))
    if exact is not None:
        return exact
    default = curve_set.curves.get((hazard, TowerDesign.UNKNOWN))
    if default is None:
        raise InvalidInputError(f"no default damage curve for hazard {hazard.value}")
    return default
