"""
Associated tuples, legal permutations and the hash tuple codec.

Positions are 0-based. A legal permutation sends position j to
shift + j (switch) or shift + (k - 1 - j) (switch after reversation),
and ``apply`` places the symbol at position j onto its image.
"""
import logging
import re
from typing import Dict, Iterable, List, Sequence, Tuple

from pydantic import ValidationError as PydanticValidationError

from app.exceptions import DimensionError, InfeasibleTupleError, RegularTypeError, ValidationError
from app.models import AstTuple, HashTuple, LegalPerm, StarredSymbol, StarredTuple, Symbol

logger = logging.getLogger(__name__)

_RUNS_PATTERN = re.compile(r"\d+(,\d+)*")


def parse_ast(text: str) -> AstTuple:
    """
    Parse a word over {s, p}.

    Raises:
        ValidationError: For characters outside the alphabet or an odd number of s
    """
    try:
        return AstTuple.from_word(text.strip())
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid tuple {text!r}: {_first_message(e)}")


def parse_hash(text: str) -> HashTuple:
    """Parse comma separated run lengths such as ``1,2,1,0``."""
    try:
        return HashTuple.from_text(text.strip().replace(" ", ""))
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid hash tuple {text!r}: {_first_message(e)}")


def parse_runs(text: str) -> Tuple[int, ...]:
    """Comma separated run lengths of any length (odd lengths are reported by feasibility checks)."""
    cleaned = text.strip().replace(" ", "")
    if not _RUNS_PATTERN.fullmatch(cleaned):
        raise ValidationError(f"Invalid run vector {text!r}: expected uint(,uint)*")
    return tuple(int(part) for part in cleaned.split(","))


def parse_starred(text: str) -> StarredTuple:
    try:
        return StarredTuple.model_validate(text.strip())
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid starred tuple {text!r}: {_first_message(e)}")


def _first_message(error: PydanticValidationError) -> str:
    errors = error.errors()
    return errors[0]["msg"] if errors else str(error)


def regular_tuple(preimages: int) -> AstTuple:
    """The tuple p^N of a regular-type circle map hitting each value N times."""
    if preimages < 1:
        raise ValidationError(f"A regular-type tuple needs at least one preimage, got {preimages}")
    return AstTuple(symbols=(Symbol.P,) * preimages)


def compose(first: LegalPerm, second: LegalPerm) -> LegalPerm:
    """
    Return ``first`` after ``second``, so that applying the result equals
    applying ``second`` and then ``first``.

    Raises:
        DimensionError: If the permutations act on different lengths
    """
    if first.modulus != second.modulus:
        raise DimensionError(
            f"Cannot compose permutations of Z/{first.modulus} and Z/{second.modulus}"
        )
    k = first.modulus
    sign = first.sign * second.sign
    offset = (first.offset + first.sign * second.offset) % k
    reversed_ = sign < 0
    return LegalPerm(modulus=k, shift=offset + 1 if reversed_ else offset, reversed=reversed_)


def apply(perm: LegalPerm, t: AstTuple) -> AstTuple:
    """
    Permute the entries of a tuple.

    Raises:
        DimensionError: If the tuple length differs from the permutation's modulus
    """
    if len(t) != perm.modulus:
        raise DimensionError(f"Permutation of Z/{perm.modulus} applied to a tuple of length {len(t)}")
    result: List[Symbol] = [Symbol.S] * len(t)
    for j, symbol in enumerate(t.symbols):
        result[perm.position(j)] = symbol
    return AstTuple(symbols=tuple(result))


def orbit(t: AstTuple) -> List[AstTuple]:
    """All distinct images of t under L_k, sorted by canonical order."""
    images = {apply(perm, t) for perm in LegalPerm.all(len(t))}
    return sorted(images, key=lambda image: image.ranks)


def canonical_ast(t: AstTuple) -> AstTuple:
    """Lexicographically least element of the orbit of t, with s before p."""
    return orbit(t)[0]


def equivalent(first: AstTuple, second: AstTuple) -> bool:
    if len(first) != len(second) or first.singular_count != second.singular_count:
        return False
    return canonical_ast(first) == canonical_ast(second)


def canonical_runs(runs: Sequence[int]) -> Tuple[int, ...]:
    """Least rotation of the runs or of their reversal."""
    runs = tuple(runs)
    backwards = runs[::-1]
    candidates = [runs[i:] + runs[:i] for i in range(len(runs))]
    candidates += [backwards[i:] + backwards[:i] for i in range(len(runs))]
    return min(candidates)


def canonical_hash(runs: Sequence[int]) -> HashTuple:
    """
    Canonical hash tuple of a run vector.

    Raises:
        pydantic.ValidationError: For odd lengths or negative runs
    """
    return HashTuple(runs=canonical_runs(runs))


def runs_of(t: AstTuple) -> Tuple[int, ...]:
    """
    Run lengths read from the word: x_k counts the p's on the arc entering the
    k-th s, the first arc wrapping around from the last s.

    Raises:
        RegularTypeError: If the tuple has no s
    """
    singular_positions = [i for i, symbol in enumerate(t.symbols) if symbol is Symbol.S]
    if not singular_positions:
        raise RegularTypeError()
    k = len(t)
    first, last = singular_positions[0], singular_positions[-1]
    runs = [first + (k - 1 - last)]
    for previous, current in zip(singular_positions, singular_positions[1:]):
        runs.append(current - previous - 1)
    return tuple(runs)


def hash_from_ast(t: AstTuple) -> HashTuple:
    """
    Canonical hash tuple of the class of t.

    Raises:
        RegularTypeError: If the tuple has no s
    """
    return canonical_hash(runs_of(t))


def ast_from_hash(h: HashTuple) -> AstTuple:
    """The word p^{x_1} s p^{x_2} s ... p^{x_n} s."""
    symbols: List[Symbol] = []
    for x in h.runs:
        symbols.extend([Symbol.P] * x)
        symbols.append(Symbol.S)
    return AstTuple(symbols=tuple(symbols))


def alternating_partial_sums(runs: Iterable[int]) -> List[int]:
    """L_k = sum_{i<=k} (-1)^(i+1) (x_i + 1) for k = 1..n."""
    sums: List[int] = []
    total = 0
    for i, x in enumerate(runs, start=1):
        total += (x + 1) if i % 2 else -(x + 1)
        sums.append(total)
    return sums


def star_indices(t: AstTuple) -> StarredTuple:
    """
    Index the symbols of t: the k-th s becomes s_k and every p becomes p_i where
    sigma_i is the singular value it is a preimage of.

    Raises:
        RegularTypeError: If the tuple has no s
        InfeasibleTupleError: If the partial sums miss a residue mod n
    """
    runs = runs_of(t)
    n = len(runs)
    partial = alternating_partial_sums(runs)
    index_of_residue: Dict[int, int] = {}
    for i, value in enumerate(partial, start=1):
        index_of_residue.setdefault(value % n, i)
    if len(index_of_residue) != n:
        raise InfeasibleTupleError(
            f"Tuple {t.word} has no consistent indexing: partial sums {partial} are not a complete remainder system mod {n}"
        )

    k = len(t)
    singular_positions = [i for i, symbol in enumerate(t.symbols) if symbol is Symbol.S]
    entries: List[StarredSymbol] = [None] * k  # type: ignore[list-item]
    for arc, s_position in enumerate(singular_positions, start=1):
        entries[s_position] = StarredSymbol(symbol=Symbol.S, index=arc)
        start = 0 if arc == 1 else partial[arc - 2]
        sign = 1 if arc % 2 else -1
        x = runs[arc - 1]
        # arc k holds the x_k positions just before s_k
        for j in range(1, x + 1):
            word_position = (s_position - x - 1 + j) % k
            residue = (start + sign * j) % n
            entries[word_position] = StarredSymbol(symbol=Symbol.P, index=index_of_residue[residue])
    return StarredTuple(entries=tuple(entries))
