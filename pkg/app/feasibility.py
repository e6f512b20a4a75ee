import logging
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from app.exceptions import InfeasibleTupleError, ValidationError
from app.models import ExistenceVerdict, FeasibilityReport, HashTuple
from app.tuples import alternating_partial_sums

logger = logging.getLogger(__name__)

RunsLike = Union[HashTuple, Sequence[int]]


def _runs(h: RunsLike) -> Tuple[int, ...]:
    runs = h.runs if isinstance(h, HashTuple) else tuple(int(x) for x in h)
    if not runs:
        raise ValidationError("A hash tuple needs at least one entry")
    if any(x < 0 for x in runs):
        raise ValidationError(f"Run lengths must be non-negative, got {list(runs)}")
    return runs


def _alternating_sum(runs: Sequence[int]) -> int:
    return sum(x if i % 2 == 0 else -x for i, x in enumerate(runs))


def type_of(h: RunsLike) -> Tuple[int, int]:
    """Return (n, m): number of singular points and of regular preimages."""
    runs = _runs(h)
    return len(runs), sum(runs)


def is_feasible(h: RunsLike, m: Optional[int] = None) -> FeasibilityReport:
    """
    Evaluate the three feasibility conditions.

    Args:
        h: Hash tuple or raw run vector (odd lengths are reported, not rejected)
        m: Declared number of regular points; condition (1) compares against it

    Returns:
        FeasibilityReport with one flag per condition
    """
    runs = _runs(h)
    n = len(runs)
    total = sum(runs)
    partial = alternating_partial_sums(runs)

    n_even = n % 2 == 0
    cond_sum_ok = m is None or total == m
    cond_altsum_ok = _alternating_sum(runs) % n == 0

    # complete remainder system as a presence bitmap
    seen = 0
    for value in partial:
        seen |= 1 << (value % n)
    cond_crs_ok = seen == (1 << n) - 1

    feasible = n_even and cond_sum_ok and cond_altsum_ok and cond_crs_ok
    logger.debug(f"Feasibility of {list(runs)}: sum={cond_sum_ok} altsum={cond_altsum_ok} crs={cond_crs_ok}")
    return FeasibilityReport(
        feasible=feasible,
        n_even=n_even,
        type_n=n,
        type_m=total,
        cond_sum_ok=cond_sum_ok,
        cond_altsum_ok=cond_altsum_ok,
        cond_crs_ok=cond_crs_ok,
        partial_sums=partial,
    )


def require_feasible(h: RunsLike) -> FeasibilityReport:
    """
    Raises:
        InfeasibleTupleError: If any condition fails
    """
    report = is_feasible(h)
    if not report.feasible:
        failed = [
            name for name, ok in (
                ("n even", report.n_even),
                ("alternating sum divisible by n", report.cond_altsum_ok),
                ("complete remainder system", report.cond_crs_ok),
            ) if not ok
        ]
        raise InfeasibleTupleError(
            f"Tuple {list(_runs(h))} is not feasible: {', '.join(failed)} failed",
            details={"partial_sums": report.partial_sums},
        )
    return report


def exists_type(n: int, m: int) -> ExistenceVerdict:
    """
    Shortcut existence test for feasible tuples of type (n, m).

    Raises:
        ValidationError: For odd or non-positive n, or negative m
    """
    if n < 2 or n % 2:
        raise ValidationError(f"n must be even and at least 2, got {n}")
    if m < 0:
        raise ValidationError(f"m must be non-negative, got {m}")
    if m % 2:
        return ExistenceVerdict(n=n, m=m, exists=False, reason="odd-m")
    if n % 4 == 0 and m % 4 == 2:
        return ExistenceVerdict(n=n, m=m, exists=False, reason="mod4-obstruction")
    return ExistenceVerdict(n=n, m=m, exists=None, reason="unknown-shortcut")


def signed_degree(h: RunsLike) -> Fraction:
    """Alternating sum over n; the sign depends on the representative's orientation."""
    runs = _runs(h)
    return Fraction(_alternating_sum(runs), len(runs))


def abs_degree(h: RunsLike) -> Fraction:
    """|sum (-1)^(i+1) x_i| / n, an integer for feasible tuples."""
    return abs(signed_degree(h))


def cusp_parity(h: RunsLike) -> int:
    """
    Parity of the number of cusps of any stable perturbation.

    Raises:
        InfeasibleTupleError: If the tuple is not feasible
    """
    require_feasible(h)
    runs = _runs(h)
    n = len(runs)
    degree = abs(_alternating_sum(runs)) // n
    return (1 + n // 2 + degree) % 2


def count_type2(m: int) -> int:
    """
    Number of classes of type (2, m).

    Raises:
        ValidationError: For odd or negative m
    """
    if m < 0 or m % 2:
        raise ValidationError(f"m must be even and non-negative, got {m}")
    return m // 4 + 1
