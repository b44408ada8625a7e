import pytest
from hypothesis import given
from hypothesis import strategies as st

from hcdkit.alignment import (
    AlignmentEntry,
    TokenAlignment,
    concepts_for_token,
    format_alignment,
    parse_alignment,
    tokens_for_concept,
)
from hcdkit.amr import parse_penman
from hcdkit.errors import IndexOutOfRange, MalformedItem, SpanOutOfRange, UnknownVariable

GRAPH = parse_penman("(c / consume-01 :ARG1 (a / alcohol) :manner (m / moderate-03))")


def _alignment(entries, n):
    return TokenAlignment(tuple(AlignmentEntry(*e) for e in entries), n, frozenset("cam"))


def test_parse_basic():
    a = parse_alignment("0-1|c 1-2|a", GRAPH, 4)
    assert a.entries == (AlignmentEntry(0, 1, "c"), AlignmentEntry(1, 2, "a"))
    assert a.token_count == 4


def test_parse_empty():
    a = parse_alignment("", GRAPH, 4)
    assert a.entries == ()
    assert all(concepts_for_token(a, i) == [] for i in range(4))


@pytest.mark.parametrize(
    "spec, error, item",
    [
        ("3-5|c", SpanOutOfRange, "3-5|c"),
        ("2-2|c", SpanOutOfRange, "2-2|c"),
        ("0-1|x", UnknownVariable, "0-1|x"),
        ("0-1|c 1:2|a", MalformedItem, "1:2|a"),
        ("0-1", MalformedItem, "0-1"),
    ],
)
def test_parse_errors_name_the_item(spec, error, item):
    with pytest.raises(error) as info:
        parse_alignment(spec, GRAPH, 4)
    assert info.value.item == item


def test_concepts_for_token():
    assert concepts_for_token(_alignment([(0, 1, "c")], 4), 0) == ["c"]
    assert concepts_for_token(_alignment([(0, 2, "c"), (1, 2, "a")], 4), 1) == ["c", "a"]
    assert concepts_for_token(_alignment([(0, 1, "c")], 4), 3) == []
    with pytest.raises(IndexOutOfRange):
        concepts_for_token(_alignment([], 4), 4)


def test_tokens_for_concept():
    assert tokens_for_concept(_alignment([(0, 2, "c")], 4), "c") == [0, 1]
    assert tokens_for_concept(_alignment([(0, 2, "c")], 4), "a") == []
    assert tokens_for_concept(_alignment([(0, 1, "c"), (3, 4, "c")], 4), "c") == [0, 3]
    with pytest.raises(UnknownVariable):
        tokens_for_concept(_alignment([], 4), "zz")


_spans = st.integers(1, 8).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(1, 3), st.sampled_from("cam")).map(
                lambda t: (t[0], min(n, t[0] + t[1]), t[2])
            ),
            max_size=6,
        ),
    )
)


@given(_spans)
def test_directions_agree(case):
    n, entries = case
    a = _alignment(entries, n)
    for var in "cam":
        for idx in range(n):
            assert (idx in tokens_for_concept(a, var)) == (var in concepts_for_token(a, idx))


@given(_spans)
def test_format_parse_identity(case):
    n, entries = case
    a = _alignment(entries, n)
    assert parse_alignment(format_alignment(a), GRAPH, n).entries == a.entries
