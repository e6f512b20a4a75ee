from fractions import Fraction

import pytest
from hypothesis import given, settings

from app.enumeration import count_classes, iter_feasible
from app.exceptions import InfeasibleTupleError, ValidationError
from app.feasibility import abs_degree, count_type2, cusp_parity, exists_type, is_feasible, signed_degree, type_of
from app.models import HashTuple
from app.tuples import alternating_partial_sums
from tests.strategies import hash_tuples


def h(*runs: int) -> HashTuple:
    return HashTuple(runs=runs)


def dihedral_images(runs):
    runs = tuple(runs)
    for candidate in (runs, runs[::-1]):
        for i in range(len(candidate)):
            yield candidate[i:] + candidate[:i]


@pytest.mark.parametrize("runs, expected", [((1, 2, 1, 0), (4, 4)), ((0, 0), (2, 0)), ((0, 2, 0, 2), (4, 4))])
def test_type_of(runs, expected):
    assert type_of(h(*runs)) == expected


class TestIsFeasible:
    def test_feasible_tuple(self):
        report = is_feasible(h(1, 2, 1, 0))
        assert report.feasible
        assert report.partial_sums == [2, -1, 1, 0]

    def test_repeated_remainders(self):
        report = is_feasible(h(4, 0, 0, 0))
        assert not report.feasible
        assert not report.cond_crs_ok
        assert [value % 4 for value in report.partial_sums] == [1, 0, 1, 0]

    def test_two_entries(self):
        report = is_feasible(h(1, 1))
        assert not report.feasible
        assert not report.cond_crs_ok

    def test_odd_length_is_reported(self):
        report = is_feasible((1, 0, 1))
        assert not report.feasible
        assert not report.n_even

    def test_declared_m(self):
        assert is_feasible(h(1, 2, 1, 0), m=4).cond_sum_ok
        report = is_feasible(h(1, 2, 1, 0), m=6)
        assert not report.cond_sum_ok
        assert not report.feasible

    @settings(max_examples=1000)
    @given(hash_tuples())
    def test_flags_agree(self, t):
        report = is_feasible(t)
        assert report.feasible == (report.n_even and report.cond_sum_ok and report.cond_altsum_ok and report.cond_crs_ok)
        assert report.partial_sums == alternating_partial_sums(t.runs)

    @settings(max_examples=1000)
    @given(hash_tuples())
    def test_dihedral_invariance(self, t):
        expected = is_feasible(t).feasible
        for image in dihedral_images(t.runs):
            assert is_feasible(image).feasible == expected


class TestExistsType:
    @pytest.mark.parametrize("n, m, exists, reason", [
        (4, 7, False, "odd-m"),
        (8, 10, False, "mod4-obstruction"),
        (4, 4, None, "unknown-shortcut"),
        (6, 10, None, "unknown-shortcut"),
    ])
    def test_shortcuts(self, n, m, exists, reason):
        verdict = exists_type(n, m)
        assert verdict.exists is exists
        assert verdict.reason == reason

    @pytest.mark.parametrize("n, m", [(3, 4), (0, 4), (4, -2)])
    def test_rejects_bad_types(self, n, m):
        with pytest.raises(ValidationError):
            exists_type(n, m)

    @pytest.mark.parametrize("n", [2, 4, 6, 8])
    def test_obstructed_types_have_no_feasible_tuples(self, n):
        for m in range(17):
            if exists_type(n, m).exists is False:
                assert next(iter_feasible(n, m), None) is None


class TestDegree:
    @pytest.mark.parametrize("runs, expected", [((2, 0, 2, 0), 1), ((1, 2, 1, 0), 0), ((0, 0), 0)])
    def test_abs_degree(self, runs, expected):
        assert abs_degree(h(*runs)) == expected

    def test_infeasible_degree_is_rational(self):
        assert abs_degree(h(1, 0, 0, 0)) == Fraction(1, 4)

    def test_signed_degree(self):
        assert signed_degree(h(0, 2)) == -1
        assert signed_degree(h(2, 0)) == 1

    @settings(max_examples=1000)
    @given(hash_tuples())
    def test_feasible_degrees_are_integers(self, t):
        if is_feasible(t).feasible:
            assert abs_degree(t).denominator == 1


class TestCuspParity:
    @pytest.mark.parametrize("runs, expected", [((0, 2), 1), ((2, 0, 2, 0), 0), ((1, 2, 1, 0), 1)])
    def test_examples(self, runs, expected):
        assert cusp_parity(h(*runs)) == expected

    def test_requires_feasibility(self):
        with pytest.raises(InfeasibleTupleError):
            cusp_parity(h(4, 0, 0, 0))

    @settings(max_examples=1000)
    @given(hash_tuples())
    def test_shifted_runs_give_the_same_parity(self, t):
        if not is_feasible(t).feasible:
            return
        n = len(t.runs)
        shifted = sum((x + 1) if i % 2 == 0 else -(x + 1) for i, x in enumerate(t.runs))
        assert cusp_parity(t) == (1 + n // 2 + abs(shifted) // n) % 2


class TestCountType2:
    @pytest.mark.parametrize("m, expected", [(4, 2), (0, 1), (6, 2), (8, 3)])
    def test_examples(self, m, expected):
        assert count_type2(m) == expected

    @pytest.mark.parametrize("m", [3, -2])
    def test_rejects_odd_or_negative(self, m):
        with pytest.raises(ValidationError):
            count_type2(m)

    @pytest.mark.parametrize("m", range(0, 41, 2))
    def test_matches_enumeration(self, m):
        assert count_type2(m) == count_classes(2, m)
