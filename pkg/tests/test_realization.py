import math

import numpy as np
import pytest

from app.enumeration import enumerate_classes
from app.exceptions import InfeasibleTupleError, ValidationError
from app.feasibility import abs_degree
from app.models import HashTuple
from app.realization import (
    build_spec,
    cap_l,
    eval_fA,
    minimum_samples,
    realize,
    sample_realization,
    smooth_step,
    verify_realization,
)
from app.tuples import ast_from_hash, equivalent

TWO_PI = 2.0 * math.pi


def spec_of(*runs):
    return build_spec(HashTuple(runs=runs))


class TestCorner:
    @pytest.mark.parametrize("x, expected", [(-2.0, -2.0), (-1.0, -1.0), (3.0, -3.0), (1.0, -1.0)])
    def test_linear_branches(self, x, expected):
        assert cap_l(x) == expected

    def test_peak(self):
        assert cap_l(0.0) == 0.0
        h = 1e-4
        assert abs((cap_l(h) - cap_l(-h)) / (2 * h)) < 1e-8
        assert cap_l(h) < 0.0 and cap_l(-h) < 0.0

    @pytest.mark.parametrize("x", [0.1, 0.35, 0.8, 0.99])
    def test_symmetric(self, x):
        assert cap_l(x) == pytest.approx(cap_l(-x), abs=1e-10)

    def test_smooth_step(self):
        assert smooth_step(-1.5) == 0.0
        assert smooth_step(1.5) == 1.0
        assert smooth_step(0.0) == pytest.approx(0.5, abs=1e-10)
        assert smooth_step(-0.3) < smooth_step(0.3)

    def test_single_extremum(self):
        xs = np.linspace(-1.5, 1.5, 301)
        values = np.array([cap_l(x) for x in xs])
        steps = np.sign(np.diff(values))
        assert np.count_nonzero(np.diff(steps)) == 1


class TestSpec:
    def test_partial_sums(self):
        spec = spec_of(0, 2)
        assert spec.X == (1, 4)
        assert spec.Y == (1, -2)

    def test_invariants(self):
        spec = spec_of(1, 2, 1, 0)
        assert list(spec.X) == sorted(set(spec.X))
        assert spec.X[-1] == 4 + 4
        assert spec.Y[-1] % 4 == 0

    def test_rejects_infeasible(self):
        with pytest.raises(InfeasibleTupleError):
            spec_of(4, 0, 0, 0)


class TestEvaluation:
    @pytest.mark.parametrize("runs", [(0, 0), (0, 2), (1, 2, 1, 0), (2, 0, 2, 0)])
    def test_wraps_continuously(self, runs):
        spec = spec_of(*runs)
        gap = eval_fA(spec, TWO_PI - 1e-12) - eval_fA(spec, 0.0)
        assert min(gap % TWO_PI, TWO_PI - gap % TWO_PI) < 1e-9

    def test_first_corner_is_an_extremum(self):
        spec = spec_of(0, 2)
        x = TWO_PI * (spec.X[0] - 0.5) / spec.X[-1]
        delta = 1e-3
        assert eval_fA(spec, x) > eval_fA(spec, x - delta)
        assert eval_fA(spec, x) > eval_fA(spec, x + delta)

    @pytest.mark.parametrize("runs", [(0, 2), (1, 2, 1, 0)])
    def test_pieces_join_smoothly(self, runs):
        spec = spec_of(*runs)
        samples = 10 ** 4
        t = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        differences = np.diff([eval_fA(spec, x) for x in t])
        # each corner occupies u in [X_k - 1/2, X_k + 1/2]
        boundaries = {TWO_PI * q / spec.X[-1] for X_k in spec.X for q in (X_k - 1, X_k)}
        jumps = []
        for b in boundaries:
            i = int(round(b / (TWO_PI / samples)))
            if 1 <= i < len(differences):
                jumps.append(abs(differences[i] - differences[i - 1]))
        assert jumps
        assert max(jumps) <= 1e-6

    def test_reduces_arguments(self):
        spec = spec_of(0, 2)
        assert eval_fA(spec, 1.0 + TWO_PI) == pytest.approx(eval_fA(spec, 1.0), abs=1e-12)


class TestSampling:
    def test_grid(self):
        spec = spec_of(0, 2)
        sampled = sample_realization(spec, 512)
        assert len(sampled.t) == 512
        assert np.all(np.diff(sampled.t) > 0)
        assert np.all((sampled.values >= 0) & (sampled.values < TWO_PI))

    @pytest.mark.parametrize("runs", [(0, 0), (0, 2), (2, 0, 2, 0), (1, 2, 1, 0)])
    def test_winding_is_the_degree(self, runs):
        h = HashTuple(runs=runs)
        sampled = sample_realization(build_spec(h))
        assert abs(sampled.winding) == abs_degree(h)

    def test_rejects_undersampling(self):
        spec = spec_of(0, 2)
        assert minimum_samples(spec) == 256
        with pytest.raises(ValidationError):
            sample_realization(spec, 100)


class TestRealize:
    def test_two_singular_points(self):
        report = realize(HashTuple(runs=(0, 0)))
        assert report.verified
        assert report.extracted.word == "ss"
        assert report.winding == 0

    @pytest.mark.parametrize("runs", [(0, 2), (2, 0), (1, 2, 1, 0), (2, 0, 2, 0), (5, 2, 1, 0)])
    def test_recovers_the_class(self, runs):
        h = HashTuple(runs=runs)
        report = realize(h)
        assert report.verified
        assert equivalent(report.extracted, ast_from_hash(h))
        assert len(report.singular_values) == h.n
        assert report.abs_deg == abs_degree(h)

    def test_verify_realization(self):
        spec = spec_of(0, 2)
        assert equivalent(verify_realization(spec), ast_from_hash(spec.hash))

    def test_infeasible(self):
        with pytest.raises(InfeasibleTupleError):
            realize(HashTuple(runs=(1, 1)))


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 4, 6])
def test_round_trip_sweep(n):
    for m in range(0, 11):
        for h in enumerate_classes(n, m).classes:
            report = realize(h)
            assert report.verified, h.text
            assert equivalent(report.extracted, ast_from_hash(h))
            assert abs(report.winding) == abs_degree(h)
