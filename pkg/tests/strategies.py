"""Hypothesis strategies for tuples, permutations and run vectors."""
from hypothesis import strategies as st

from app.models import AstTuple, HashTuple, LegalPerm


@st.composite
def words(draw, min_size=1, max_size=12):
    """Words over {s, p} with an even number of s."""
    word = draw(st.text(alphabet="sp", min_size=min_size, max_size=max_size))
    if word.count("s") % 2:
        word += "s"
    return word


def ast_tuples(min_size=1, max_size=12):
    return words(min_size, max_size).map(AstTuple.from_word)


def singular_tuples(max_size=12):
    """Tuples with at least two s."""
    return words(0, max_size - 2).map(lambda w: AstTuple.from_word(w + "ss"))


@st.composite
def tuples_with_perms(draw, max_size=12):
    t = draw(ast_tuples(max_size=max_size))
    k = len(t)
    perm = st.builds(LegalPerm, modulus=st.just(k), shift=st.integers(0, k - 1), reversed=st.booleans())
    return t, draw(perm), draw(perm)


def hash_tuples(max_n=8, max_x=6):
    return (
        st.integers(1, max_n // 2)
        .flatmap(lambda half: st.lists(st.integers(0, max_x), min_size=2 * half, max_size=2 * half))
        .map(lambda runs: HashTuple(runs=tuple(runs)))
    )
