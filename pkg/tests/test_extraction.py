import math

import numpy as np
import pytest

from app.exceptions import DoublePointError, ExtractionError, NonMorseError
from app.extraction import ExtractionTolerances, build_profile, extract_circle_map, wrap_angle

TWO_PI = 2.0 * math.pi


def profile_of(f, samples=1000):
    t = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    raw = np.mod([f(x) for x in t], TWO_PI)
    return build_profile(t, raw, TWO_PI, lambda tau: f(tau) % TWO_PI)


@pytest.mark.parametrize("value, expected", [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi, math.pi), (7.0, 7.0 - TWO_PI)])
def test_wrap_angle(value, expected):
    assert wrap_angle(value) == pytest.approx(expected)


class TestProfile:
    @pytest.mark.parametrize("degree", [-2, -1, 0, 1, 3])
    def test_winding(self, degree):
        assert profile_of(lambda x: degree * x + 0.3 * math.sin(x)).winding == degree

    def test_needs_samples(self):
        with pytest.raises(ExtractionError):
            build_profile(np.array([0.0, 1.0]), np.array([0.0, 1.0]), TWO_PI, lambda tau: tau)


class TestExtraction:
    def test_fold_circle(self):
        marks = extract_circle_map(profile_of(lambda x: 0.5 * math.sin(x)))
        assert marks.ast.word == "ss"
        assert marks.winding == 0
        assert [mark.maximum for mark in marks.singular_marks] == [True, False]
        assert marks.singular_marks[0].t == pytest.approx(math.pi / 2, abs=1e-6)
        assert marks.singular_marks[0].value == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.filterwarnings("error::DeprecationWarning")
    def test_marks_carry_plain_booleans(self):
        marks = extract_circle_map(profile_of(lambda x: x + 1.5 * math.sin(x)))
        assert all(type(mark.maximum) is bool for mark in marks.singular_marks)

    def test_regular_marks_hit_singular_values(self):
        # x + 1.5 sin x turns back twice per period
        marks = extract_circle_map(profile_of(lambda x: x + 1.5 * math.sin(x)))
        assert marks.winding == 1
        assert marks.ast.singular_count == 2
        assert len(marks.regular_marks) == marks.ast.regular_count
        for mark in marks.regular_marks:
            assert 1 <= mark.which_sigma <= marks.ast.singular_count
            assert any(mark.value == pytest.approx(s.value) for s in marks.singular_marks)
        assert marks.starred is not None
        assert marks.starred.forget() == marks.ast

    @pytest.mark.parametrize("degree", [1, 2, -3])
    def test_regular_type(self, degree):
        marks = extract_circle_map(profile_of(lambda x: degree * x), seed=7)
        assert marks.ast.word == "p" * abs(degree)
        assert marks.singular_marks == []
        assert marks.reference_angle is not None

    def test_reference_angle_is_seeded(self):
        profile = profile_of(lambda x: 2 * x)
        assert extract_circle_map(profile, seed=3).reference_angle == extract_circle_map(profile, seed=3).reference_angle

    def test_double_point(self):
        with pytest.raises(DoublePointError):
            extract_circle_map(profile_of(lambda x: 0.5 * math.sin(2 * x)))

    def test_flat_extremum(self):
        tolerances = ExtractionTolerances(extremum=1e-10, singular_value=1e-6, morse=1e-6, reference_attempts=8)
        with pytest.raises(NonMorseError):
            extract_circle_map(profile_of(lambda x: 0.5 * (1.0 - math.cos(x)) ** 2), tolerances)

    def test_constant_profile(self):
        with pytest.raises(ExtractionError):
            extract_circle_map(profile_of(lambda x: 1.0))
