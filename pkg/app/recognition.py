"""
Recognition of plane-to-plane germs.

For a germ g and a small epsilon the preimage of the epsilon circle is a
single loop around the origin; g restricted to it is a stable circle map
whose associated tuple, once it stops changing as epsilon shrinks, is the
topological class of g.
"""
import logging
import math
from collections import defaultdict
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import brentq

from app.config import settings
from app.exceptions import (
    DidNotStabilizeError,
    DoublePointError,
    ExtractionError,
    LevelCurveError,
    NonFoldError,
    NonMorseError,
    RegularTypeError,
)
from app.extraction import ExtractionTolerances, build_profile, extract_circle_map, wrap_angle
from app.feasibility import abs_degree, cusp_parity, is_feasible
from app.models import ClassReport, GermEquivalence, LevelCurve, MarkedCircle, PolyGerm, StarredTuple
from app.polynomials import GermEvaluator, NumberBackend, backend_for
from app.tuples import canonical_ast, hash_from_ast

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

Point = Tuple[Any, Any]


class RecognitionConfig(BaseModel):
    """Knobs of one recognition run."""
    eps0: float = Field(..., gt=0)
    epsilon_factor: float = Field(..., gt=0, lt=1)
    max_steps: int = Field(..., ge=1)
    stabilization_runs: int = Field(..., ge=1)
    strict: bool
    precision: int = Field(..., ge=53)
    seed: int
    domain_radius: float = Field(..., gt=0)
    component_radius_factor: float = Field(..., ge=1)
    start_rays: int = Field(..., ge=1)
    turning_cap: float = Field(..., gt=0)
    value_cap: float = Field(..., gt=0)
    initial_step_ratio: float = Field(..., gt=0)
    min_step_ratio: float = Field(..., gt=0)
    max_step_ratio: float = Field(..., gt=0)
    max_trace_steps: int = Field(..., ge=1)
    min_closure_steps: int = Field(..., ge=1)
    corrector_tolerance: float = Field(..., gt=0)
    corrector_max_iterations: int = Field(..., ge=1)
    fold_tolerance: float = Field(..., gt=0)
    tolerances: ExtractionTolerances

    @classmethod
    def from_settings(cls, **overrides: Any) -> "RecognitionConfig":
        """Defaults from settings; ``None`` overrides are ignored."""
        values = dict(
            eps0=settings.EPSILON_START,
            epsilon_factor=settings.EPSILON_FACTOR,
            max_steps=settings.EPSILON_MAX_STEPS,
            stabilization_runs=settings.STABILIZATION_RUNS,
            strict=settings.STRICT_STABILIZATION,
            precision=settings.PRECISION_BITS,
            seed=settings.RANDOM_SEED,
            domain_radius=settings.DOMAIN_RADIUS,
            component_radius_factor=settings.COMPONENT_RADIUS_FACTOR,
            start_rays=settings.START_RAYS,
            turning_cap=settings.TURNING_ANGLE_CAP,
            value_cap=settings.VALUE_ANGLE_CAP,
            initial_step_ratio=settings.INITIAL_STEP_RATIO,
            min_step_ratio=settings.MIN_STEP_RATIO,
            max_step_ratio=settings.MAX_STEP_RATIO,
            max_trace_steps=settings.MAX_TRACE_STEPS,
            min_closure_steps=settings.MIN_CLOSURE_STEPS,
            corrector_tolerance=settings.CORRECTOR_TOLERANCE,
            corrector_max_iterations=settings.CORRECTOR_MAX_ITERATIONS,
            fold_tolerance=settings.FOLD_TOLERANCE,
            tolerances=ExtractionTolerances.from_settings(),
        )
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


def _evaluator(g: PolyGerm, config: RecognitionConfig) -> GermEvaluator:
    return GermEvaluator(g, backend_for(config.precision))


def _ray_grid(radius: float) -> np.ndarray:
    """Geometric radii from radius * 2^-60 up to radius."""
    return radius * 2.0 ** -np.arange(60.0, -0.125, -0.25)


class _LevelSet:
    """Arithmetic on |g| = epsilon in the evaluator's backend."""

    def __init__(self, evaluator: GermEvaluator, epsilon: float, config: RecognitionConfig):
        self.evaluator = evaluator
        self.backend: NumberBackend = evaluator.backend
        self.epsilon = self.backend.number(epsilon)
        self.epsilon_float = float(epsilon)
        self.config = config

    def gradient(self, x: Any, y: Any) -> Tuple[Any, Any, Any]:
        """Residual |g|^2 - eps^2 and its gradient 2 Dg^T g."""
        (f1, f2), ((a, b), (c, d)) = self.evaluator.value_and_jacobian(x, y)
        residual = f1 * f1 + f2 * f2 - self.epsilon * self.epsilon
        return residual, 2 * (f1 * a + f2 * c), 2 * (f1 * b + f2 * d)

    def correct(self, x: Any, y: Any) -> Optional[Point]:
        """Newton steps along the gradient until the relative residual is small."""
        tolerance = self.config.corrector_tolerance * self.epsilon_float
        for _ in range(self.config.corrector_max_iterations + 1):
            norm = self.evaluator.norm(x, y)
            if abs(self.backend.to_float(norm - self.epsilon)) <= tolerance:
                return x, y
            residual, gx, gy = self.gradient(x, y)
            squared = gx * gx + gy * gy
            if self.backend.to_float(squared) == 0.0:
                return None
            x = x - residual * gx / squared
            y = y - residual * gy / squared
        return None

    def tangent(self, x: Any, y: Any) -> Optional[Point]:
        """Unit tangent keeping the sublevel set on the left."""
        _, gx, gy = self.gradient(x, y)
        length = self.backend.sqrt(gx * gx + gy * gy)
        if self.backend.to_float(length) == 0.0:
            return None
        return -gy / length, gx / length

    def excess(self, r: float, direction: Tuple[float, float]) -> float:
        x, y = self.evaluator.point(r * direction[0], r * direction[1])
        return self.backend.to_float(self.evaluator.norm(x, y)) - self.epsilon_float


def _rays(count: int) -> List[Tuple[float, Tuple[float, float]]]:
    return [(TWO_PI * k / count, (math.cos(TWO_PI * k / count), math.sin(TWO_PI * k / count))) for k in range(count)]


def _find_start(level: _LevelSet) -> Tuple[Point, float]:
    grid = _ray_grid(level.config.domain_radius)
    for theta, direction in _rays(level.config.start_rays):
        previous = float(grid[0])
        if level.excess(previous, direction) >= 0:
            continue
        for r in grid[1:]:
            r = float(r)
            if level.excess(r, direction) > 0:
                root = brentq(lambda s: level.excess(s, direction), previous, r, xtol=1e-15 * r, rtol=1e-15)
                start = level.correct(*level.evaluator.point(root * direction[0], root * direction[1]))
                if start is not None:
                    return start, theta
                break
            previous = r
    raise LevelCurveError(
        "No level crossing on the search rays - epsilon too large or germ not finitely determined",
        details={"epsilon": level.epsilon_float},
    )


def _as_float(level: _LevelSet, point: Point) -> Tuple[float, float]:
    return level.backend.to_float(point[0]), level.backend.to_float(point[1])


def _segment_distance(p: Tuple[float, float], a: Tuple[float, float], b: Tuple[float, float]) -> float:
    ax, ay = b[0] - a[0], b[1] - a[1]
    length = ax * ax + ay * ay
    s = 0.0 if length == 0 else min(1.0, max(0.0, ((p[0] - a[0]) * ax + (p[1] - a[1]) * ay) / length))
    return math.hypot(a[0] + s * ax - p[0], a[1] + s * ay - p[1])


def _trace_points(level: _LevelSet) -> Tuple[List[Point], float]:
    config = level.config
    backend = level.backend
    start, ray = _find_start(level)
    start_float = _as_float(level, start)
    scale = math.hypot(*start_float)
    step = config.initial_step_ratio * scale
    floor = config.min_step_ratio * scale

    points = [start]
    current, current_float = start, start_float
    tangent = level.tangent(*start)
    if tangent is None:
        raise LevelCurveError("Degenerate gradient at the starting point", details={"epsilon": level.epsilon_float})
    angle = level.evaluator.angle(*start)

    for count in range(1, config.max_trace_steps + 1):
        # the ceiling follows the distance of the current vertex from the origin
        ceiling = config.max_step_ratio * max(scale, math.hypot(*current_float))
        step = min(step, ceiling)
        while True:
            predicted = (current[0] + backend.number(step) * tangent[0], current[1] + backend.number(step) * tangent[1])
            candidate = level.correct(*predicted)
            if candidate is not None:
                next_tangent = level.tangent(*candidate)
                if next_tangent is not None:
                    t0, t1 = _as_float(level, tangent), _as_float(level, next_tangent)
                    turn = math.atan2(t0[0] * t1[1] - t0[1] * t1[0], t0[0] * t1[0] + t0[1] * t1[1])
                    next_angle = level.evaluator.angle(*candidate)
                    sweep = wrap_angle(next_angle - angle)
                    candidate_float = _as_float(level, candidate)
                    predicted_float = _as_float(level, predicted)
                    displacement = math.hypot(candidate_float[0] - predicted_float[0],
                                              candidate_float[1] - predicted_float[1])
                    if abs(turn) <= config.turning_cap and abs(sweep) <= config.value_cap and displacement <= step / 2:
                        break
            step /= 2
            if step < floor:
                raise LevelCurveError(
                    "Step size fell below the floor - epsilon too large or germ not finitely determined",
                    details={"epsilon": level.epsilon_float, "vertices": len(points)},
                )

        if math.hypot(*candidate_float) > config.domain_radius:
            raise LevelCurveError(
                "Level curve left the domain - epsilon too large or germ not finitely determined",
                details={"epsilon": level.epsilon_float},
            )
        if count >= config.min_closure_steps and _segment_distance(start_float, current_float, candidate_float) <= step / 2:
            logger.debug(f"Level curve at eps={level.epsilon_float:g} closed after {count} steps")
            return points, ray

        points.append(candidate)
        current, current_float, tangent, angle = candidate, candidate_float, next_tangent, next_angle
        if abs(turn) < config.turning_cap / 2 and abs(sweep) < config.value_cap / 2 and displacement < step / 4:
            step = min(step * 1.5, ceiling)

    raise LevelCurveError(
        f"Level curve did not close within {config.max_trace_steps} steps",
        details={"epsilon": level.epsilon_float},
    )


def _origin_winding(coords: np.ndarray) -> int:
    angles = np.arctan2(coords[:, 1], coords[:, 0])
    steps = np.diff(np.append(angles, angles[0]))
    steps = (steps + np.pi) % TWO_PI - np.pi
    return int(round(float(steps.sum()) / TWO_PI))


def _has_self_intersection(coords: np.ndarray) -> bool:
    """Bucketed test for crossings between non-adjacent edges."""
    size = len(coords)
    ends = np.roll(coords, -1, axis=0)
    lengths = np.hypot(*(ends - coords).T)
    cell = max(float(lengths.max()) * 2.0, 1e-300)
    buckets: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for i in range(size):
        low = np.floor(np.minimum(coords[i], ends[i]) / cell).astype(int)
        high = np.floor(np.maximum(coords[i], ends[i]) / cell).astype(int)
        for cx in range(low[0], high[0] + 1):
            for cy in range(low[1], high[1] + 1):
                buckets[(cx, cy)].append(i)

    def orientation(a, b, c) -> float:
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    checked = set()
    for members in buckets.values():
        for x, i in enumerate(members):
            for j in members[x + 1:]:
                if abs(i - j) <= 1 or abs(i - j) == size - 1 or (i, j) in checked:
                    continue
                checked.add((i, j))
                a, b, c, d = coords[i], ends[i], coords[j], ends[j]
                d1, d2 = orientation(a, b, c), orientation(a, b, d)
                d3, d4 = orientation(c, d, a), orientation(c, d, b)
                if d1 * d2 < 0 and d3 * d4 < 0:
                    return True
    return False


def _ray_crossings(coords: np.ndarray, theta: float, radius: float) -> int:
    """Edges of the closed polyline crossing the segment from 0 to radius at angle theta."""
    c, s = math.cos(theta), math.sin(theta)
    along = coords[:, 0] * c + coords[:, 1] * s
    across = -coords[:, 0] * s + coords[:, 1] * c
    along_next, across_next = np.roll(along, -1), np.roll(across, -1)
    straddle = (across > 0) != (across_next > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        fraction = across / (across - across_next)
    hit = along + fraction * (along_next - along)
    return int(np.count_nonzero(straddle & (hit > 0) & (hit <= radius)))


def _level_crossings(level: _LevelSet, direction: Tuple[float, float], grid: np.ndarray) -> int:
    signs = np.sign([level.excess(float(r), direction) for r in grid])
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _check_single_component(level: _LevelSet, coords: np.ndarray) -> None:
    """Compare level crossings along each ray with the traced loop, out to a multiple of the loop radius."""
    config = level.config
    radius = min(config.domain_radius, config.component_radius_factor * float(np.hypot(*coords.T).max()))
    grid = _ray_grid(radius)
    for theta, direction in _rays(config.start_rays):
        expected = _level_crossings(level, direction, grid)
        found = _ray_crossings(coords, theta, radius)
        if expected > found:
            raise LevelCurveError(
                "Level set has more than one component - epsilon too large or germ not finitely determined",
                details={"epsilon": level.epsilon_float, "ray": theta, "crossings": expected, "traced": found},
            )


def trace_level_curve(g: PolyGerm, eps: float, config: Optional[RecognitionConfig] = None,
                      evaluator: Optional[GermEvaluator] = None) -> LevelCurve:
    """
    Trace the loop |g(p)| = eps around the origin by predictor-corrector continuation.

    Returns:
        LevelCurve oriented counter-clockwise around the origin

    Raises:
        LevelCurveError: If no start point exists, the loop does not close, leaves
            the domain, self-intersects, misses a component or does not wind once
    """
    config = config or RecognitionConfig.from_settings()
    evaluator = evaluator or _evaluator(g, config)
    level = _LevelSet(evaluator, eps, config)
    points, ray = _trace_points(level)
    if len(points) < 3:
        raise LevelCurveError("Level curve has fewer than three vertices", details={"epsilon": eps})

    coords = np.array([_as_float(level, p) for p in points], dtype=np.float64)
    winding = _origin_winding(coords)
    if abs(winding) != 1:
        raise LevelCurveError(
            f"Level curve winds {winding} times around the origin",
            details={"epsilon": eps, "winding": winding},
        )
    if winding < 0:
        points = points[:1] + points[:0:-1]
        coords = np.concatenate([coords[:1], coords[:0:-1]])
    if _has_self_intersection(coords):
        raise LevelCurveError("Level curve intersects itself", details={"epsilon": eps})
    _check_single_component(level, coords)

    closed = np.vstack([coords, coords[:1]])
    arclength = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(closed, axis=0).T))])
    logger.debug(f"Traced level curve at eps={eps:g}: {len(points)} vertices, length {arclength[-1]:.3e}")
    return LevelCurve(
        epsilon=eps,
        points=evaluator.backend.array(points),
        arclength=arclength,
        closed=True,
        start_ray=ray,
    )


class _CurveParametrization:
    """Arclength parametrization of a traced curve, re-projected onto the level set."""

    def __init__(self, curve: LevelCurve, level: _LevelSet):
        self.curve = curve
        self.level = level
        self.size = len(curve.points)

    def point_at(self, tau: float) -> Point:
        arclength = self.curve.arclength
        tau = tau % self.curve.length
        i = int(np.clip(np.searchsorted(arclength, tau, side="right") - 1, 0, self.size - 1))
        span = arclength[i + 1] - arclength[i]
        fraction = 0.0 if span == 0 else (tau - arclength[i]) / span
        a, b = self.curve.points[i], self.curve.points[(i + 1) % self.size]
        weight = self.level.backend.number(fraction)
        chord = (a[0] + weight * (b[0] - a[0]), a[1] + weight * (b[1] - a[1]))
        return self.level.correct(*chord) or chord

    def angle_at(self, tau: float) -> float:
        return self.level.evaluator.angle(*self.point_at(tau))


def extract_marks(curve: LevelCurve, g: PolyGerm, config: Optional[RecognitionConfig] = None,
                  evaluator: Optional[GermEvaluator] = None) -> MarkedCircle:
    """
    Read the stable circle map g restricted to a traced level curve.

    Raises:
        DoublePointError: If two singular values coincide within tolerance
        NonMorseError: If an extremum of the angle profile is flat
        ExtractionError: For inconsistent marks
    """
    config = config or RecognitionConfig.from_settings()
    evaluator = evaluator or _evaluator(g, config)
    level = _LevelSet(evaluator, curve.epsilon, config)
    parametrization = _CurveParametrization(curve, level)

    raw = np.array([evaluator.angle(p[0], p[1]) for p in curve.points], dtype=np.float64)
    profile = build_profile(curve.arclength[:-1], raw, curve.length, parametrization.angle_at)
    marks = extract_circle_map(profile, config.tolerances, config.seed)
    return MarkedCircle(
        curve=curve,
        angle_profile=profile.lift,
        singular_marks=marks.singular_marks,
        regular_marks=marks.regular_marks,
        winding=marks.winding,
        ast=marks.ast,
        starred=marks.starred,
        reference_angle=marks.reference_angle,
    )


def _fold_at(evaluator: GermEvaluator, x: Any, y: Any, tolerance: float) -> bool:
    backend = evaluator.backend
    _, ((a, b), (c, d)) = evaluator.value_and_jacobian(x, y)
    jx, jy = evaluator.jacobian_gradient(x, y)
    # Dg applied to the kernel direction of the singular set
    vx, vy = a * jy - b * jx, c * jy - d * jx
    image = backend.to_float(backend.sqrt(vx * vx + vy * vy))
    gradient = backend.to_float(backend.sqrt(jx * jx + jy * jy))
    if gradient == 0.0:
        return False
    derivative = backend.to_float(backend.sqrt(a * a + b * b + c * c + d * d))
    return image > tolerance * derivative * gradient


def fold_check(g: PolyGerm, p: Tuple[float, float], tolerance: Optional[float] = None,
               precision: Optional[int] = None) -> bool:
    """
    Fold criterion at a point of the singular set: Dg maps the direction
    perpendicular to grad det Dg to a nonzero vector.
    """
    tolerance = settings.FOLD_TOLERANCE if tolerance is None else tolerance
    evaluator = GermEvaluator(g, backend_for(precision or settings.PRECISION_BITS))
    return _fold_at(evaluator, *evaluator.point(*p), tolerance)


def _class_report(marked: MarkedCircle, eps: float, seed: int) -> ClassReport:
    if not marked.singular_marks:
        preimages = len(marked.ast)
        return ClassReport(
            ast=canonical_ast(marked.ast), hash=None, n=0, m=0, abs_deg=preimages,
            cusp_parity=None, epsilon_used=eps, stabilized=False, seed=seed,
        )
    h = hash_from_ast(marked.ast)
    if not is_feasible(h).feasible:
        raise ExtractionError(f"Extracted tuple {marked.ast.word} is not feasible", details={"epsilon": eps})
    degree = abs_degree(h)
    if abs(marked.winding) != degree:
        raise ExtractionError(
            f"Winding {marked.winding} disagrees with degree {degree} of {marked.ast.word}",
            details={"epsilon": eps},
        )
    return ClassReport(
        ast=canonical_ast(marked.ast), hash=h, n=h.n, m=h.m, abs_deg=int(degree),
        cusp_parity=cusp_parity(h), epsilon_used=eps, stabilized=False, seed=seed,
    )


def _check_folds(marked: MarkedCircle, parametrization: _CurveParametrization, tolerance: float) -> None:
    evaluator = parametrization.level.evaluator
    for mark in marked.singular_marks:
        x, y = parametrization.point_at(mark.t)
        if not _fold_at(evaluator, x, y, tolerance):
            raise NonFoldError(details={
                "point": [evaluator.backend.to_float(x), evaluator.backend.to_float(y)],
                "epsilon": marked.curve.epsilon,
            })


_RECOVERABLE = (LevelCurveError, DoublePointError, NonMorseError, ExtractionError)


def _stabilize(g: PolyGerm, config: RecognitionConfig) -> Tuple[ClassReport, Optional[MarkedCircle]]:
    evaluator = _evaluator(g, config)
    eps = config.eps0
    previous: Optional[ClassReport] = None
    previous_marked: Optional[MarkedCircle] = None
    streak = 0
    last_error: Optional[Exception] = None

    for step in range(config.max_steps):
        try:
            curve = trace_level_curve(g, eps, config, evaluator)
            marked = extract_marks(curve, g, config, evaluator)
            level = _LevelSet(evaluator, eps, config)
            _check_folds(marked, _CurveParametrization(curve, level), config.fold_tolerance)
            report = _class_report(marked, eps, config.seed)
        except _RECOVERABLE as e:
            logger.info(f"Germ {g} at eps={eps:g}: {e.message}")
            last_error = e
            previous, previous_marked, streak = None, None, 0
            eps *= config.epsilon_factor
            continue

        streak = streak + 1 if previous is not None and previous.ast == report.ast else 1
        previous, previous_marked = report, marked
        logger.debug(f"Germ {g} at eps={eps:g}: {report.ast.word} (streak {streak})")
        if streak >= config.stabilization_runs:
            return report.model_copy(update={"stabilized": True}), marked
        eps *= config.epsilon_factor

    details: Dict[str, Any] = {"last_epsilon": eps / config.epsilon_factor, "steps": config.max_steps}
    if last_error is not None:
        details["last_error"] = str(last_error)
    if config.strict or previous is None:
        raise DidNotStabilizeError(details=details)
    logger.warning(f"Germ {g} did not stabilize; returning the last tuple {previous.ast.word}")
    return previous, previous_marked


def germ_ast(g: PolyGerm, config: Optional[RecognitionConfig] = None) -> ClassReport:
    """
    Classify a germ by its stabilized associated tuple.

    Args:
        g: Parsed germ
        config: Recognition settings (defaults from settings)

    Returns:
        ClassReport with the canonical tuple; the regular type reports n = m = 0,
        no hash or cusp parity, and the preimage count as abs_deg

    Raises:
        NonFoldError: If a singular point near the curve is not a fold
        DidNotStabilizeError: If the schedule is exhausted (strict mode)
    """
    config = config or RecognitionConfig.from_settings()
    report, _ = _stabilize(g, config)
    logger.info(f"Germ {g}: {report.ast.word} at eps={report.epsilon_used:g}, stabilized={report.stabilized}")
    return report


def starred_germ_tuple(g: PolyGerm, config: Optional[RecognitionConfig] = None) -> StarredTuple:
    """
    Indexed tuple of the stabilized circle map.

    Raises:
        RegularTypeError: If the germ has no singular points near the origin
    """
    config = config or RecognitionConfig.from_settings()
    _, marked = _stabilize(g, config)
    if marked is None or marked.starred is None:
        raise RegularTypeError("germ is of regular type; no indexed tuple")
    return marked.starred


def germ_equiv(g1: PolyGerm, g2: PolyGerm, config: Optional[RecognitionConfig] = None) -> GermEquivalence:
    """Compare two germs by their canonical tuples."""
    config = config or RecognitionConfig.from_settings()
    first = germ_ast(g1, config)
    second = germ_ast(g2, config)
    within = first.hash is not None and second.hash is not None
    if not within:
        logger.info("At least one germ is of regular type; the comparison is outside the singular hypothesis")
    return GermEquivalence(equivalent=first.ast == second.ast, within_hypothesis=within, first=first, second=second)
