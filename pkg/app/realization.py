"""
Explicit smooth stable circle maps realizing feasible hash tuples.

The map is built on [0, 2pi) from straight pieces of slope +-1 joined by
smoothed corners: a flat-glued bump ``j``, its normalized integral ``k`` and
the corner profile ``l``, which equals x for x <= -1, -x for x >= 1 and has a
single Morse maximum at 0.
"""
import bisect
import logging
import math
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad

from app.config import settings
from app.exceptions import ConstructionVerificationError, NumericalError, ValidationError
from app.extraction import build_profile, extract_circle_map
from app.feasibility import abs_degree, require_feasible
from app.models import AstTuple, HashTuple, RealizationReport, RealizationSpec, SampledCircleMap
from app.tuples import canonical_hash, hash_from_ast

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def bump(x: float) -> float:
    """exp(-(x-1)^-2) * exp(-(x+1)^-2) on (-1, 1), zero elsewhere."""
    if x <= -1.0 or x >= 1.0:
        return 0.0
    return math.exp(-1.0 / (x - 1.0) ** 2 - 1.0 / (x + 1.0) ** 2)


@lru_cache(maxsize=1)
def _bump_mass() -> float:
    mass, _ = quad(bump, -1.0, 1.0, epsabs=settings.QUADRATURE_TOLERANCE, epsrel=0.0, limit=200)
    return mass


def smooth_step(x: float) -> float:
    """Normalized integral of the bump from -1 to x; 0 left of -1, 1 right of 1."""
    if x <= -1.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    tolerance = settings.QUADRATURE_TOLERANCE
    if x <= 0.0:
        part, _ = quad(bump, -1.0, x, epsabs=tolerance, epsrel=0.0, limit=200)
        return part / _bump_mass()
    part, _ = quad(bump, x, 1.0, epsabs=tolerance, epsrel=0.0, limit=200)
    return 1.0 - part / _bump_mass()


def cap_l(x: float) -> float:
    """Smoothed -|x|: x for x <= -1, x - 2x k(x) inside, -x for x >= 1."""
    if x <= -1.0:
        return x
    if x >= 1.0:
        return -x
    return x - 2.0 * x * smooth_step(x)


def build_spec(h: HashTuple) -> RealizationSpec:
    """
    Partial sums X_k = sum (x_i + 1) and Y_k = sum (-1)^(i+1) (x_i + 1).

    Raises:
        InfeasibleTupleError: If h is not feasible
    """
    require_feasible(h)
    X, Y = [], []
    x_total = y_total = 0
    for i, x in enumerate(h.runs, start=1):
        x_total += x + 1
        y_total += (x + 1) if i % 2 else -(x + 1)
        X.append(x_total)
        Y.append(y_total)
    return RealizationSpec(hash=h, X=tuple(X), Y=tuple(Y))


def _height(spec: RealizationSpec, u: float) -> float:
    X, Y = spec.X_full, spec.Y_full
    k = bisect.bisect_right(X, u - 0.5) - 1
    k = min(max(k, 0), spec.n - 1)
    sign = -1.0 if k % 2 else 1.0
    if u < X[k + 1] - 0.5:
        return Y[k] + sign * (u - X[k])
    return Y[k + 1] + 0.5 * sign * cap_l(2.0 * (u - X[k + 1]))


def eval_fA(spec: RealizationSpec, x: float) -> float:
    """
    Real-valued lift of the realized circle map at x; arguments outside
    [0, 2pi) are reduced first.
    """
    x = math.fmod(x, TWO_PI)
    if x < 0.0:
        x += TWO_PI
    u = spec.X[-1] * x / TWO_PI + 0.5
    return TWO_PI / spec.n * _height(spec, u)


def minimum_samples(spec: RealizationSpec) -> int:
    return settings.REALIZATION_SAMPLES_PER_POINT * (spec.hash.m + spec.hash.n)


def default_samples(spec: RealizationSpec) -> int:
    return max(settings.REALIZATION_SAMPLES, minimum_samples(spec))


def sample_realization(spec: RealizationSpec, count: Optional[int] = None) -> SampledCircleMap:
    """
    Sample the realized map on a uniform grid of [0, 2pi).

    Raises:
        ValidationError: If count is below the minimum for this type
    """
    count = default_samples(spec) if count is None else count
    minimum = minimum_samples(spec)
    if count < minimum:
        raise ValidationError(
            f"{count} samples undersample type ({spec.hash.n},{spec.hash.m}); at least {minimum} needed",
            details={"minimum": minimum},
        )
    t = np.linspace(0.0, TWO_PI, count, endpoint=False)
    lift = np.array([eval_fA(spec, x) for x in t])
    values = np.mod(lift, TWO_PI)
    profile = build_profile(t, values, TWO_PI, lambda tau: eval_fA(spec, tau))
    return SampledCircleMap(t=t, values=values, lift=profile.lift, winding=profile.winding)


def _extract(spec: RealizationSpec, count: int):
    sampled = sample_realization(spec, count)
    profile = build_profile(sampled.t, sampled.values, TWO_PI, lambda tau: eval_fA(spec, tau))
    return sampled, extract_circle_map(profile)


def verify_realization(spec: RealizationSpec, count: Optional[int] = None) -> AstTuple:
    """
    Sample the realization, extract its tuple and check it against the input class.

    Raises:
        ConstructionVerificationError: If the extracted class or winding disagree
    """
    return realize(spec.hash, count).extracted


def realize(h: HashTuple, count: Optional[int] = None) -> RealizationReport:
    """
    Build, sample and verify the realization of a feasible hash tuple.

    Raises:
        InfeasibleTupleError: If h is not feasible
        ValidationError: If count undersamples the map
        ConstructionVerificationError: If extraction does not reproduce h
    """
    spec = build_spec(h)
    count = default_samples(spec) if count is None else count
    try:
        sampled, marks = _extract(spec, count)
    except NumericalError as e:
        raise ConstructionVerificationError(
            f"Extraction failed on the realization of {h.text}: {e.message}",
            details={"samples": count, **e.details},
        )

    expected = hash_from_ast(marks.ast) if marks.singular_marks else None
    wanted = canonical_hash(h.runs)
    degree = abs_degree(h)
    verified = expected == wanted and abs(marks.winding) == degree
    if not verified:
        raise ConstructionVerificationError(
            f"Realization of {h.text} extracted {marks.ast.word} with winding {marks.winding}",
            details={"expected_hash": wanted.runs, "extracted": marks.ast.word, "winding": marks.winding},
        )
    logger.info(f"Realized {h.text} with {count} samples, winding {marks.winding}")
    return RealizationReport(
        hash=h,
        X=list(spec.X),
        Y=list(spec.Y),
        samples=count,
        winding=sampled.winding,
        abs_deg=int(degree),
        singular_values=[mark.value for mark in marks.singular_marks],
        extracted=marks.ast,
        verified=verified,
    )
