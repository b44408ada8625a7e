import random
import re
import threading

import penman
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from penman.models import noop

from generators import random_penman
from hcdkit.amr import (
    AmrAttribute,
    AmrEdge,
    AmrGraph,
    AmrNode,
    graph_from_triples,
    invert_relation,
    parse_penman,
    serialize_penman,
    validate,
)
from hcdkit.errors import (
    DanglingVariableReference,
    DisconnectedGraph,
    DuplicateEdge,
    DuplicateVariableDefinition,
    EmptyInput,
    MalformedPenman,
    UnbalancedParens,
)


def test_parse_two_nodes():
    g = parse_penman("(d / drink-01 :ARG0 (i / i))")
    assert g.nodes == (AmrNode("d", "drink-01"), AmrNode("i", "i"))
    assert g.edges == (AmrEdge("d", ":ARG0", "i"),)
    assert g.attributes == ()
    assert g.root == "d"


def test_parse_attribute_constant():
    g = parse_penman("(c / consume-01 :mode imperative :ARG1 (a / alcohol))")
    assert len(g.nodes) == 2
    assert g.edges == (AmrEdge("c", ":ARG1", "a"),)
    assert g.attributes == (AmrAttribute("c", ":mode", "imperative"),)
    assert g.root == "c"


def test_reentrancy_matches_reference_reader():
    text = "(a / and :op1 (b / b-cpt) :op2 b)"
    g = parse_penman(text)
    assert g.variables == ["a", "b"]
    assert g.edges == (AmrEdge("a", ":op1", "b"), AmrEdge("a", ":op2", "b"))
    assert g.root == "a"

    ref = penman.decode(text, model=noop.model)
    assert {(s, r, t) for s, r, t in ref.edges()} == {e.as_tuple() for e in g.edges}
    assert {(s, t) for s, _, t in ref.instances()} == {(n.variable, n.concept) for n in g.nodes}


def test_inverse_roles_kept_as_written():
    g = parse_penman("(m / milk :ARG1-of (p / process-01))")
    assert g.edges == (AmrEdge("m", ":ARG1-of", "p"),)


def test_quoted_strings_and_numbers():
    g = parse_penman('(c / city :name (n / name :op1 "New York" :op2 "a \\"b\\"") :quant 3.5 :polarity -)')
    values = {a.relation: a.value for a in g.attributes}
    assert values == {":op1": "New York", ":op2": 'a "b"', ":quant": "3.5", ":polarity": "-"}


def test_reference_before_definition_orders_by_first_mention():
    g = parse_penman("(a / x :ARG0 b :ARG1 (c / z :ARG2 (b / y)))")
    assert g.variables == ["a", "b", "c"]
    assert AmrEdge("a", ":ARG0", "b") in g.edges


def test_metadata_lines_skipped():
    g = parse_penman("# ::snt Consume alcohol\n# ::id 1\n(c / consume-01)")
    assert g.variables == ["c"]


@pytest.mark.parametrize(
    "text, error, offset",
    [
        ("", EmptyInput, 0),
        ("   \n ", EmptyInput, 0),
        ("(a / b :ARG0 (c / d)", UnbalancedParens, 0),
        ("(a / b))", UnbalancedParens, 7),
        (")", UnbalancedParens, 0),
        ("(a / b :ARG0 (a / c))", DuplicateVariableDefinition, 14),
        ("(a / b :ARG0 x)", DanglingVariableReference, 13),
        ("(a b)", MalformedPenman, 3),
        ("(a / b :ARG0)", MalformedPenman, 7),
        ("(a / b :op1 c :op1 c :x (c / d))", DuplicateEdge, 14),
        ("(a / b) (c / d)", MalformedPenman, 8),
    ],
)
def test_parse_errors_report_offset(text, error, offset):
    with pytest.raises(error) as info:
        parse_penman(text)
    assert info.value.offset == offset


def test_offsets_are_bytes():
    with pytest.raises(DanglingVariableReference) as info:
        parse_penman("(a / café :ARG0 x)")
    # "é" is two bytes in UTF-8
    assert info.value.offset == len("(a / café :ARG0 ".encode())


def test_serialize_examples():
    g = graph_from_triples("d", [("d", "drink-01"), ("i", "i")], [("d", ":ARG0", "i")])
    assert serialize_penman(g) == "(d / drink-01 :ARG0 (i / i))"
    g = parse_penman("(c / consume-01 :ARG1 (a / alcohol) :mode imperative)")
    assert ":mode imperative" in serialize_penman(g)


def test_serialize_reentrancy_defines_once():
    text = serialize_penman(parse_penman("(a / and :op1 (b / b-cpt) :op2 b)"))
    assert text == "(a / and :op1 (b / b-cpt) :op2 b)"
    assert text.count("(b /") == 1


def test_serialize_quotes_ambiguous_constants():
    g = graph_from_triples("a", [("a", "x")], attributes=[("a", ":name", "b"), ("a", ":op1", "two words")])
    text = serialize_penman(g)
    assert '"b"' in text and '"two words"' in text
    assert parse_penman(text).same_as(g)


def test_serialize_indent():
    g = parse_penman("(c / consume-01 :ARG1 (a / alcohol))")
    assert serialize_penman(g, indent=4) == "(c / consume-01\n    :ARG1 (a / alcohol))"


def test_serialize_disconnected():
    g = graph_from_triples("a", [("a", "x"), ("b", "y")])
    with pytest.raises(DisconnectedGraph) as info:
        serialize_penman(g)
    assert info.value.variable == "b"


def test_serialize_inverts_edges_pointing_at_root():
    g = graph_from_triples("a", [("a", "x"), ("b", "y")], [("b", ":ARG0", "a")])
    text = serialize_penman(g)
    assert text == "(a / x :ARG0-of (b / y))"
    back = parse_penman(text)
    assert back.edges == (AmrEdge("a", ":ARG0-of", "b"),)


def test_validate_clean_graph():
    assert validate(parse_penman("(d / drink-01 :ARG0 (i / i))")) == []


def test_validate_dangling():
    g = AmrGraph((AmrNode("a", "x"),), (AmrEdge("a", ":ARG0", "x"),), (), "a")
    assert validate(g) == ["DanglingVariableReference: x"]


def test_validate_disconnected():
    g = graph_from_triples("a", [("a", "x"), ("b", "y")])
    assert validate(g) == ["Disconnected: b"]


def test_validate_other_violations():
    g = AmrGraph(
        (AmrNode("a", "x"), AmrNode("a", ""), AmrNode("b", "y")),
        (AmrEdge("a", ":r", "b"), AmrEdge("a", ":r", "b")),
        (AmrAttribute("q", ":mode", "imperative"),),
        "r",
    )
    problems = validate(g)
    assert "DuplicateVariableDefinition: a" in problems
    assert "EmptyConcept: a" in problems
    assert "MissingRoot: r" in problems
    assert "DuplicateEdge: a :r b" in problems
    assert "DanglingVariableReference: q" in problems


def test_invert_relation():
    assert invert_relation(":ARG0") == ":ARG0-of"
    assert invert_relation(":ARG0-of") == ":ARG0"
    assert invert_relation(invert_relation(":mod")) == ":mod"


def _count_oracle(text: str) -> tuple[int, int]:
    """Nodes = '/' introductions; edges = roles followed by '(' or a defined variable."""
    stripped = re.sub(r'"(?:[^"\\]|\\.)*"', '""', text)
    defined = set(re.findall(r"\(\s*([^\s/()]+)\s*/", stripped))
    n_nodes = stripped.count("/")
    n_edges = 0
    for filler in re.findall(r":[^\s()\"]+\s+(\(|[^\s()]+)", stripped):
        if filler == "(" or filler in defined:
            n_edges += 1
    return n_nodes, n_edges


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_parse_matches_generator_and_counts(seed):
    text, (root, nodes, edges, attributes) = random_penman(random.Random(seed))
    g = parse_penman(text)
    assert g.root == root
    assert frozenset((n.variable, n.concept) for n in g.nodes) == nodes
    assert frozenset(e.as_tuple() for e in g.edges) == edges
    assert frozenset(a.as_tuple() for a in g.attributes) == attributes
    assert (len(g.nodes), len(g.edges)) == _count_oracle(text)
    assert validate(g) == []


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip(seed):
    text, _ = random_penman(random.Random(seed))
    g = parse_penman(text)
    out = serialize_penman(g)
    again = parse_penman(out)
    assert again.same_as(g)
    assert serialize_penman(again) == out


def test_parse_is_pure_across_threads():
    rng = random.Random(5)
    texts = [random_penman(rng)[0] for _ in range(50)]
    expected = [parse_penman(t) for t in texts]
    results = {}

    def work(k):
        results[k] = [parse_penman(t) for t in texts]

    threads = [threading.Thread(target=work, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r == expected for r in results.values())
