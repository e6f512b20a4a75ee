"""Enumeration of feasible hash tuples of a given type, up to legal permutation."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Iterator, List, Optional, Set, Tuple

from app.config import settings
from app.exceptions import CapacityError, ValidationError
from app.feasibility import exists_type
from app.models import ClassCount, ClassListing, HashTuple
from app.tuples import canonical_runs

logger = logging.getLogger(__name__)


def _check_type(n: int, m: int) -> None:
    if n < 2 or n % 2:
        raise ValidationError(f"n must be even and at least 2, got {n}")
    if m < 0:
        raise ValidationError(f"m must be non-negative, got {m}")


def _check_capacity(n: int, m: int, force: bool) -> None:
    compositions = math.comb(m + n - 1, n - 1)
    if compositions > settings.ENUMERATION_NODE_LIMIT and not force:
        raise CapacityError(
            f"Type ({n},{m}) spans {compositions} compositions, above the limit of "
            f"{settings.ENUMERATION_NODE_LIMIT}; pass force to override",
            details={"n": n, "m": m, "compositions": compositions},
        )


def _search(n: int, m: int, prefix: List[int], used: int, total: int, partial: int) -> Iterator[Tuple[int, ...]]:
    """
    Depth-first search over prefixes. ``used`` is the bitmap of residues of
    L_1..L_k mod n; residue 0 stays free for L_n.
    """
    position = len(prefix) + 1
    if position == n:
        last = m - total
        if (partial - (last + 1)) % n == 0:
            yield tuple(prefix) + (last,)
        return
    sign = 1 if position % 2 else -1
    for x in range(m - total + 1):
        value = partial + sign * (x + 1)
        residue = value % n
        bit = 1 << residue
        if residue == 0 or used & bit:
            continue
        prefix.append(x)
        yield from _search(n, m, prefix, used | bit, total + x, value)
        prefix.pop()


def _search_branch(n: int, m: int, x1: int) -> Set[Tuple[int, ...]]:
    """Canonical classes whose raw tuples start with x1 (worker entry point)."""
    residue = (x1 + 1) % n
    if residue == 0:
        return set()
    return {canonical_runs(runs) for runs in _search(n, m, [x1], 1 << residue, x1, x1 + 1)}


def iter_feasible(n: int, m: int, force: bool = False) -> Iterator[HashTuple]:
    """
    Stream every feasible run vector of type (n, m), before deduplication.

    Raises:
        ValidationError: For odd n or negative m
        CapacityError: If the search space exceeds the configured bound
    """
    _check_type(n, m)
    _check_capacity(n, m, force)
    for runs in _search(n, m, [], 0, 0, 0):
        yield HashTuple(runs=runs)


def _collect(n: int, m: int, workers: int) -> Set[Tuple[int, ...]]:
    if n == 2 or workers <= 1:
        return {canonical_runs(runs) for runs in _search(n, m, [], 0, 0, 0)}
    classes: Set[Tuple[int, ...]] = set()
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_search_branch, n, m, x1) for x1 in range(m + 1)]
        for future in futures:
            classes |= future.result()
    return classes


def enumerate_classes(n: int, m: int, force: bool = False, workers: Optional[int] = None) -> ClassListing:
    """
    One canonical representative per class of feasible tuples of type (n, m),
    sorted lexicographically.

    Args:
        n: Number of singular points (even, at least 2)
        m: Number of regular points
        force: Ignore the configured capacity bound
        workers: Process count; the search is split by the value of x_1

    Raises:
        ValidationError: For odd n or negative m
        CapacityError: If the search space exceeds the configured bound
    """
    _check_type(n, m)
    verdict = exists_type(n, m)
    if verdict.exists is False:
        logger.debug(f"Type ({n},{m}) obstructed: {verdict.reason}")
        return ClassListing(n=n, m=m, count=0, classes=[])
    _check_capacity(n, m, force)

    workers = settings.ENUMERATION_WORKERS if workers is None else workers
    classes = sorted(_collect(n, m, workers))
    logger.info(f"Enumerated type ({n},{m}): {len(classes)} classes")
    return ClassListing(n=n, m=m, count=len(classes), classes=[HashTuple(runs=runs) for runs in classes])


def count_classes(n: int, m: int, force: bool = False, workers: Optional[int] = None) -> int:
    return enumerate_classes(n, m, force=force, workers=workers).count


def type_table(n_max: int, m_max: int, force: bool = False, workers: Optional[int] = None) -> List[ClassCount]:
    """Class counts for every even n <= n_max and every m <= m_max."""
    if n_max < 2:
        raise ValidationError(f"n_max must be at least 2, got {n_max}")
    if m_max < 0:
        raise ValidationError(f"m_max must be non-negative, got {m_max}")
    table = []
    for n in range(2, n_max + 1, 2):
        for m in range(m_max + 1):
            count = count_classes(n, m, force=force, workers=workers)
            table.append(ClassCount(n=n, m=m, count=count))
    return table
