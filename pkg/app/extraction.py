"""
Mark extraction for sampled circle maps.

Both the explicit realizations and the traced level curves of germs end up
here: an angle profile sampled over one period of the source circle, plus a
callable that evaluates the raw angle anywhere, turn into singular marks,
regular marks and the associated tuple.
"""
import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq, minimize_scalar

from app.config import settings
from app.exceptions import DoublePointError, ExtractionError, NonMorseError
from app.models import AstTuple, CircleMarks, RegularMark, SingularMark, StarredSymbol, StarredTuple, Symbol

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def wrap_angle(value: float) -> float:
    """Reduce to (-pi, pi]."""
    return math.pi - (math.pi - value) % TWO_PI


class ExtractionTolerances(BaseModel):
    extremum: float = Field(..., gt=0, description="Refinement tolerance for extrema in the curve parameter")
    singular_value: float = Field(..., gt=0, description="Minimum separation of singular values (rad)")
    morse: float = Field(..., ge=0, description="Second-difference floor for Morse extrema")
    reference_attempts: int = Field(..., ge=1)

    @classmethod
    def from_settings(cls) -> "ExtractionTolerances":
        return cls(
            extremum=settings.EXTREMUM_TOLERANCE,
            singular_value=settings.SINGULAR_VALUE_TOLERANCE,
            morse=settings.MORSE_TOLERANCE,
            reference_attempts=settings.REFERENCE_ANGLE_ATTEMPTS,
        )


class AngleProfile(BaseModel):
    """Raw and unwrapped angles over one period of the source parameter."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: np.ndarray
    raw: np.ndarray
    lift: np.ndarray
    period: float
    closure: float = Field(..., description="Lift of the angle at t[0] + period")
    winding: int
    evaluate: Callable[[float], float] = Field(..., description="Raw angle at any parameter value")

    @property
    def size(self) -> int:
        return len(self.t)


def build_profile(t: np.ndarray, raw: np.ndarray, period: float, evaluate: Callable[[float], float]) -> AngleProfile:
    """
    Unwrap sampled angles and measure the winding number.

    Args:
        t: Increasing parameters covering [t[0], t[0] + period)
        raw: Angle at each parameter
        period: Length of the source circle in the parameter
        evaluate: Raw angle at an arbitrary parameter (periodic)

    Raises:
        ExtractionError: For fewer than three samples
    """
    t = np.asarray(t, dtype=np.float64)
    raw = np.asarray(raw, dtype=np.float64)
    if len(t) < 3 or len(t) != len(raw):
        raise ExtractionError(f"Need at least three paired samples, got {len(t)} parameters and {len(raw)} angles")
    lift = np.unwrap(raw)
    closure = float(lift[-1] + wrap_angle(float(raw[0]) - float(lift[-1])))
    winding = int(round((closure - float(lift[0])) / TWO_PI))
    return AngleProfile(t=t, raw=raw, lift=lift, period=float(period), closure=closure, winding=winding, evaluate=evaluate)


def _cyclic_signs(profile: AngleProfile) -> np.ndarray:
    steps = np.empty(profile.size)
    steps[:-1] = np.diff(profile.lift)
    steps[-1] = profile.closure - profile.lift[-1]
    signs = np.sign(steps)
    nonzero = np.flatnonzero(signs)
    if len(nonzero) == 0:
        raise ExtractionError("Angle profile is constant")
    # forward-fill zero steps cyclically
    start = int(nonzero[0])
    current = signs[start]
    for offset in range(1, profile.size + 1):
        i = (start + offset) % profile.size
        if signs[i] == 0:
            signs[i] = current
        else:
            current = signs[i]
    return signs


def _extended(profile: AngleProfile) -> Tuple[np.ndarray, np.ndarray]:
    """Parameters and lifts over two periods."""
    shift = TWO_PI * profile.winding
    t_ext = np.concatenate([profile.t, profile.t + profile.period])
    lift_ext = np.concatenate([profile.lift, profile.lift + shift])
    return t_ext, lift_ext


def _local_lift(profile: AngleProfile, tau: float, base: float) -> float:
    return base + wrap_angle(profile.evaluate(tau) - base)


def _normalize(profile: AngleProfile, tau: float) -> float:
    t0 = float(profile.t[0])
    return t0 + (tau - t0) % profile.period


class _Extremum(BaseModel):
    vertex: int
    t: float
    lift: float
    maximum: bool


def _locate_extrema(profile: AngleProfile, tolerances: ExtractionTolerances) -> List[_Extremum]:
    signs = _cyclic_signs(profile)
    size = profile.size
    shift = TWO_PI * profile.winding
    extrema: List[_Extremum] = []
    for i in range(size):
        before, after = signs[i - 1], signs[i]
        if before == after:
            continue
        maximum = bool(before > 0)
        left_t = profile.t[i - 1] if i > 0 else profile.t[-1] - profile.period
        right_t = profile.t[i + 1] if i + 1 < size else profile.t[0] + profile.period
        left_lift = profile.lift[i - 1] if i > 0 else profile.lift[-1] - shift
        right_lift = profile.lift[i + 1] if i + 1 < size else profile.closure
        base = float(profile.lift[i])

        second_difference = right_lift - 2.0 * base + left_lift
        if abs(second_difference) <= tolerances.morse:
            raise NonMorseError(
                details={"t": float(profile.t[i]), "second_difference": float(second_difference)}
            )

        direction = -1.0 if maximum else 1.0
        result = minimize_scalar(
            lambda tau: direction * _local_lift(profile, tau, base),
            bounds=(float(left_t), float(right_t)),
            method="bounded",
            options={"xatol": tolerances.extremum},
        )
        tau, value = float(profile.t[i]), base
        if result.success and direction * float(result.fun) <= direction * base:
            tau, value = float(result.x), direction * float(result.fun)
        extrema.append(_Extremum(vertex=i, t=tau, lift=value, maximum=maximum))
    if len(extrema) % 2:
        raise ExtractionError(f"Odd number of extrema ({len(extrema)}) in a periodic profile")
    return extrema


def _check_separation(values: List[float], tolerance: float) -> None:
    ordered = sorted(values)
    gaps = [b - a for a, b in zip(ordered, ordered[1:])]
    gaps.append(ordered[0] + TWO_PI - ordered[-1])
    smallest = min(gaps)
    if smallest <= tolerance:
        raise DoublePointError(details={"smallest_gap": smallest, "tolerance": tolerance})


def _solve_on_arc(profile: AngleProfile, times: np.ndarray, lifts: np.ndarray, target: float) -> float:
    """Parameter on a monotone arc where the lift reaches ``target``."""
    increasing = lifts[-1] > lifts[0]
    if increasing:
        mono = np.maximum.accumulate(lifts)
        guess = float(np.interp(target, mono, times))
        index = int(np.searchsorted(mono, target))
    else:
        mono = np.minimum.accumulate(lifts)
        guess = float(np.interp(-target, -mono, times))
        index = int(np.searchsorted(-mono, -target))
    index = min(max(index, 1), len(times) - 1)
    a, b = float(times[index - 1]), float(times[index])
    base = float(lifts[index - 1])

    def residual(tau: float) -> float:
        return _local_lift(profile, tau, base) - target

    try:
        if residual(a) * residual(b) < 0:
            return float(brentq(residual, a, b, xtol=1e-14))
    except (ValueError, RuntimeError):
        pass
    return guess


def _regular_marks(profile: AngleProfile, extrema: List[_Extremum], values: List[float],
                   tolerance: float) -> List[RegularMark]:
    t_ext, lift_ext = _extended(profile)
    shift = TWO_PI * profile.winding
    n = len(extrema)
    marks: List[RegularMark] = []
    for k, start in enumerate(extrema):
        end = extrema[(k + 1) % n]
        end_t, end_lift = end.t, end.lift
        if k + 1 == n:
            end_t += profile.period
            end_lift += shift
        low, high = min(start.lift, end_lift), max(start.lift, end_lift)

        inside = (t_ext > start.t) & (t_ext < end_t)
        times = np.concatenate([[start.t], t_ext[inside], [end_t]])
        lifts = np.concatenate([[start.lift], lift_ext[inside], [end_lift]])

        for j, value in enumerate(values, start=1):
            q = math.ceil((low + tolerance - value) / TWO_PI)
            while value + TWO_PI * q < high - tolerance:
                target = value + TWO_PI * q
                tau = _solve_on_arc(profile, times, lifts, target)
                marks.append(RegularMark(t=_normalize(profile, tau), value=value, which_sigma=j))
                q += 1
    return marks


def _pick_reference_angle(profile: AngleProfile, tolerances: ExtractionTolerances,
                          seed: int) -> Tuple[float, int]:
    rng = np.random.default_rng(seed)
    raw = np.mod(profile.raw, TWO_PI)
    clearance = tolerances.singular_value
    for attempt in range(1, tolerances.reference_attempts + 1):
        angle = float(rng.uniform(0.0, TWO_PI))
        distance = np.abs(raw - angle)
        distance = np.minimum(distance, TWO_PI - distance)
        if float(distance.min()) > clearance:
            return angle, attempt
        logger.debug(f"Reference angle {angle:.6f} too close to a sample, re-picking")
    raise ExtractionError(
        f"No reference angle clear of the samples after {tolerances.reference_attempts} attempts",
        details={"seed": seed},
    )


def _count_preimages(profile: AngleProfile, angle: float) -> int:
    """Crossings of the lifts of ``angle`` by the whole profile."""
    low, high = float(profile.lift[0]), profile.closure
    if high < low:
        low, high = high, low
    # half-open: the closure point is the start point again
    return max(0, math.ceil((high - angle) / TWO_PI) - math.ceil((low - angle) / TWO_PI))


def extract_circle_map(profile: AngleProfile, tolerances: Optional[ExtractionTolerances] = None,
                       seed: Optional[int] = None) -> CircleMarks:
    """
    Extract singular and regular marks and the associated tuple.

    Args:
        profile: Angle profile from build_profile
        tolerances: Extraction tolerances (defaults from settings)
        seed: Seed for the reference angle of regular-type maps

    Returns:
        CircleMarks with the word read in parameter order

    Raises:
        NonMorseError: For a flat extremum
        DoublePointError: For two singular values within tolerance
        ExtractionError: For inconsistent marks
    """
    tolerances = tolerances or ExtractionTolerances.from_settings()
    seed = settings.RANDOM_SEED if seed is None else seed
    extrema = _locate_extrema(profile, tolerances)

    if not extrema:
        angle, attempts = _pick_reference_angle(profile, tolerances, seed)
        preimages = _count_preimages(profile, angle)
        if preimages == 0:
            raise ExtractionError("Regular-type profile with no preimages")
        logger.debug(f"Regular type: {preimages} preimages of {angle:.6f} (attempt {attempts})")
        return CircleMarks(
            singular_marks=[],
            regular_marks=[],
            winding=profile.winding,
            ast=AstTuple(symbols=(Symbol.P,) * preimages),
            reference_angle=angle,
        )

    values = [e.lift % TWO_PI for e in extrema]
    _check_separation(values, tolerances.singular_value)

    singular = [
        SingularMark(t=_normalize(profile, e.t), value=v, maximum=e.maximum)
        for e, v in zip(extrema, values)
    ]
    regular = _regular_marks(profile, extrema, values, tolerances.singular_value)

    labelled = [(mark.t, Symbol.S, index) for index, mark in enumerate(singular, start=1)]
    labelled += [(mark.t, Symbol.P, mark.which_sigma) for mark in regular]
    labelled.sort(key=lambda entry: entry[0])

    # number the s marks in word order
    renumber = {}
    for _, symbol, index in labelled:
        if symbol is Symbol.S:
            renumber[index] = len(renumber) + 1
    entries = tuple(StarredSymbol(symbol=symbol, index=renumber[index]) for _, symbol, index in labelled)
    starred = StarredTuple(entries=entries)
    regular = [
        RegularMark(t=mark.t, value=mark.value, which_sigma=renumber[mark.which_sigma]) for mark in regular
    ]

    logger.debug(f"Extracted {len(singular)} singular and {len(regular)} regular marks, winding {profile.winding}")
    return CircleMarks(
        singular_marks=sorted(singular, key=lambda mark: mark.t),
        regular_marks=sorted(regular, key=lambda mark: mark.t),
        winding=profile.winding,
        ast=starred.forget(),
        starred=starred,
    )
