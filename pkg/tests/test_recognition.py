import math
from itertools import combinations

import numpy as np
import pytest

from app.exceptions import GermParseError, LevelCurveError, NotAGermError, RegularTypeError, ValidationError
from app.models import AstTuple
from app.polynomials import X, Y, backend_for, evaluate_germ, format_polynomial, jacobian_det, parse_germ, parse_polynomial
from app.recognition import RecognitionConfig, fold_check, germ_ast, germ_equiv, starred_germ_tuple, trace_level_curve
from app.tuples import equivalent

REDUCED_FORMS = ["y", "y^2", "x*y + y^3", "x*y^2 + y^5", "x*y^2 + y^6 + y^7"]


class TestParsing:
    def test_polynomial(self):
        poly = parse_polynomial("x*y + y^3")
        assert poly.coeff_monomial(X * Y) == 1
        assert poly.total_degree() == 3

    def test_rational_coefficients(self):
        assert str(parse_polynomial("x/2 + 3*y").coeff_monomial(X)) == "1/2"

    def test_bad_character_position(self):
        with pytest.raises(GermParseError) as error:
            parse_polynomial("x + z")
        assert error.value.position == 4
        assert error.value.details["position"] == 4

    @pytest.mark.parametrize("text", ["", "   ", "x +", "x/y", "(x"])
    def test_rejects_malformed(self, text):
        with pytest.raises(GermParseError):
            parse_polynomial(text)

    def test_constant_term(self):
        with pytest.raises(NotAGermError):
            parse_germ("x + 1", "y")

    def test_parse_errors_are_usage_errors(self):
        with pytest.raises(ValidationError) as error:
            parse_germ("x", "y^")
        assert error.value.exit_code == 2


class TestJacobian:
    @pytest.mark.parametrize("f1, f2, expected", [
        ("x", "x*y + y^3", "x + 3*y^2"),
        ("x", "y", "1"),
        ("x", "y^2", "2*y"),
    ])
    def test_determinant(self, f1, f2, expected):
        assert format_polynomial(jacobian_det(parse_germ(f1, f2))) == expected

    def test_evaluate_germ(self):
        (f1, f2), ((a, b), (c, d)) = evaluate_germ(parse_germ("x", "x*y + y^3"), (2.0, 1.0))
        assert (f1, f2) == (2.0, 3.0)
        assert (a, b, c, d) == (1.0, 0.0, 1.0, 5.0)

    def test_evaluate_with_extended_precision(self):
        (f1, f2), _ = evaluate_germ(parse_germ("x", "x*y + y^3"), (0.5, 0.5), bits=113)
        assert float(f2) == pytest.approx(0.375)


class TestBackends:
    def test_double(self):
        assert backend_for(53).bits == 53

    @pytest.mark.parametrize("bits", [64, 113, 200])
    def test_wider(self, bits):
        assert backend_for(bits).bits >= bits

    def test_rejects_narrow(self):
        with pytest.raises(ValidationError):
            backend_for(24)


class TestFoldCheck:
    @pytest.mark.parametrize("f2, point, expected", [
        ("y^2", (0.0, 0.0), True),
        ("y^3", (0.0, 0.0), False),
        ("x*y + y^3", (0.0, 0.0), False),
        ("x*y + y^3", (-3.0, 1.0), True),
    ])
    def test_examples(self, f2, point, expected):
        assert fold_check(parse_germ("x", f2), point) is expected


class TestTrace:
    def test_identity_circle(self):
        curve = trace_level_curve(parse_germ("x", "y"), 0.1)
        assert curve.closed
        radii = np.hypot(curve.points[:, 0].astype(float), curve.points[:, 1].astype(float))
        assert np.allclose(radii, 0.1, rtol=1e-8)
        assert curve.length == pytest.approx(2 * math.pi * 0.1, rel=2e-2)
        assert len(curve.arclength) == len(curve.points) + 1

    def test_counter_clockwise(self):
        curve = trace_level_curve(parse_germ("x", "y"), 0.1)
        xs = curve.points[:, 0].astype(float)
        ys = curve.points[:, 1].astype(float)
        area = 0.5 * np.sum(xs * np.roll(ys, -1) - np.roll(xs, -1) * ys)
        assert area > 0

    @pytest.mark.parametrize("f2", ["y^2", "x*y + y^3"])
    def test_vertices_lie_on_the_level_set(self, f2):
        g = parse_germ("x", f2)
        eps = 0.01
        curve = trace_level_curve(g, eps)
        for x, y in curve.points:
            (f1, f2_value), _ = evaluate_germ(g, (x, y), bits=64)
            assert abs(float(np.hypot(f1, f2_value)) - eps) <= 1e-10 * eps

    def test_tall_loop_closes_quickly(self):
        # the loop is about eps wide along x and eps^(1/6) tall along y
        g = parse_germ("x", "x*y^2 + y^6 + y^7")
        curve = trace_level_curve(g, 2.0 ** -12, RecognitionConfig.from_settings(max_trace_steps=5000))
        ys = curve.points[:, 1].astype(float)
        assert ys.max() > 0.2
        assert ys.min() < -0.2

    def test_far_zero_is_ignored_for_small_loops(self):
        # g also vanishes at (0, -1), inside the unit domain
        g = parse_germ("x", "x*y^2 + y^6 + y^7")
        assert trace_level_curve(g, 2.0 ** -9).closed

    def test_second_component_is_reported(self):
        g = parse_germ("x", "x*y^2 + y^6 + y^7")
        with pytest.raises(LevelCurveError, match="more than one component"):
            trace_level_curve(g, 2.0 ** -5)


class TestConfig:
    def test_overrides_skip_none(self):
        config = RecognitionConfig.from_settings(eps0=0.01, precision=None)
        assert config.eps0 == 0.01
        assert config.precision >= 53


@pytest.mark.slow
class TestGermClasses:
    @pytest.mark.parametrize("f2, word", [
        ("y", "p"),
        ("y^2", "ss"),
        ("x*y + y^3", "pssp"),
        ("y^3 + x*y", "pssp"),
        ("y^3 + x^3*y", "pssp"),
        ("x*y^2 + y^5", "pssppssp"),
        ("x*y^2 + y^6 + y^7", "spsspspp"),
        ("x*y + y^4", "ss"),
    ])
    def test_recognize(self, f2, word):
        report = germ_ast(parse_germ("x", f2))
        assert equivalent(report.ast, AstTuple.from_word(word))
        assert report.stabilized

    def test_regular_type_report(self):
        report = germ_ast(parse_germ("x", "y"))
        assert report.hash is None
        assert (report.n, report.m, report.abs_deg) == (0, 0, 1)
        assert report.cusp_parity is None

    def test_cusp_invariants(self):
        report = germ_ast(parse_germ("x", "x*y + y^3"))
        assert report.hash.runs == (0, 2)
        assert (report.n, report.m, report.abs_deg, report.cusp_parity) == (2, 2, 1, 1)

    def test_starred_tuple_of_cusp(self):
        starred = starred_germ_tuple(parse_germ("x", "x*y + y^3"))
        assert equivalent(starred.forget(), AstTuple.from_word("pssp"))

    def test_starred_tuple_of_regular_germ(self):
        with pytest.raises(RegularTypeError):
            starred_germ_tuple(parse_germ("x", "y"))

    def test_equivalent_germs(self):
        result = germ_equiv(parse_germ("x", "x*y + y^3"), parse_germ("x", "y^3 + x^3*y"))
        assert result.equivalent
        assert result.within_hypothesis

    def test_fold_and_quartic(self):
        assert germ_equiv(parse_germ("x", "y^2"), parse_germ("x", "x*y + y^4")).equivalent

    @pytest.mark.parametrize("first, second", list(combinations(REDUCED_FORMS, 2)))
    def test_reduced_forms_are_distinct(self, first, second):
        assert not germ_equiv(parse_germ("x", first), parse_germ("x", second)).equivalent

    def test_outside_hypothesis(self):
        result = germ_equiv(parse_germ("x", "y"), parse_germ("x", "y^2"))
        assert not result.within_hypothesis
