"""AMR graphs and their PENMAN surface form.

A graph is an immutable value: nodes carry a variable and a concept, edges
link two variables with a ``:role`` label, and attributes attach constants
(``imperative``, ``-``, quoted strings, numbers) to a node.  Inverse roles
such as ``:ARG0-of`` are kept exactly as written.

    >>> g = parse_penman("(c / consume-01 :mode imperative :ARG1 (a / alcohol))")
    >>> [n.variable for n in g.nodes], g.root
    (['c', 'a'], 'c')
    >>> serialize_penman(g)
    '(c / consume-01 :mode imperative :ARG1 (a / alcohol))'
"""

from __future__ import annotations

import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from hcdkit.errors import (
    DanglingVariableReference,
    DisconnectedGraph,
    DuplicateEdge,
    DuplicateVariableDefinition,
    EmptyInput,
    MalformedPenman,
    UnbalancedParens,
)


@dataclass(frozen=True)
class AmrNode:
    variable: str
    concept: str


@dataclass(frozen=True)
class AmrEdge:
    source: str
    relation: str
    target: str

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.source, self.relation, self.target)


@dataclass(frozen=True)
class AmrAttribute:
    owner: str
    relation: str
    value: str

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.owner, self.relation, self.value)


@dataclass(frozen=True)
class AmrGraph:
    nodes: tuple[AmrNode, ...]
    edges: tuple[AmrEdge, ...]
    attributes: tuple[AmrAttribute, ...]
    root: str
    _concepts: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "_concepts", {n.variable: n.concept for n in self.nodes})

    @property
    def variables(self) -> list[str]:
        return [n.variable for n in self.nodes]

    def has_variable(self, var: str) -> bool:
        return var in self._concepts

    def concept(self, var: str) -> str:
        return self._concepts[var]

    def attributes_of(self, var: str) -> list[AmrAttribute]:
        return [a for a in self.attributes if a.owner == var]

    def key(self):
        """Order-insensitive identity: two graphs with equal keys are the same graph."""
        return (
            self.root,
            frozenset((n.variable, n.concept) for n in self.nodes),
            frozenset(e.as_tuple() for e in self.edges),
            frozenset(a.as_tuple() for a in self.attributes),
        )

    def same_as(self, other: "AmrGraph") -> bool:
        return self.key() == other.key()


def invert_relation(relation: str) -> str:
    """``:ARG0`` <-> ``:ARG0-of``; a double inverse collapses."""
    if relation.endswith("-of") and len(relation) > 3:
        return relation[:-3]
    return relation + "-of"


# ---------------------------------------------------------------------------
# reading
# ---------------------------------------------------------------------------

# Bare symbols shaped like conventional AMR variables (a, b2, x10) are treated
# as references; if no such variable is defined the reference dangles.
_VARIABLE_SHAPE = re.compile(r"[a-z][0-9]*")
_DELIMS = set('()/":') | {" ", "\t", "\n", "\r", "\f", "\v"}


class _Tok(NamedTuple):
    kind: str  # ( ) / role string symbol
    text: str
    pos: int  # character offset


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(text)
    at_line_start = True
    while i < n:
        ch = text[i]
        if ch == "\n":
            at_line_start = True
            i += 1
            continue
        if ch.isspace():
            i += 1
            continue
        if ch == "#" and at_line_start:
            # AMR corpus metadata lines ("# ::snt ...")
            while i < n and text[i] != "\n":
                i += 1
            continue
        at_line_start = False
        if ch in "()/":
            toks.append(_Tok(ch, ch, i))
            i += 1
        elif ch == '"':
            start = i
            i += 1
            buf = []
            while i < n and text[i] != '"':
                if text[i] == "\\" and i + 1 < n:
                    i += 1
                buf.append(text[i])
                i += 1
            if i >= n:
                raise MalformedPenman("unterminated string", _byte_offset(text, start))
            i += 1
            toks.append(_Tok("string", "".join(buf), start))
        elif ch == ":":
            start = i
            i += 1
            while i < n and text[i] not in _DELIMS:
                i += 1
            if i == start + 1:
                raise MalformedPenman("empty role", _byte_offset(text, start))
            toks.append(_Tok("role", text[start:i], start))
        else:
            start = i
            while i < n and text[i] not in _DELIMS:
                i += 1
            toks.append(_Tok("symbol", text[start:i], start))
    return toks


def _byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode("utf-8"))


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.defs: dict[str, tuple[str, int]] = {}  # var -> (concept, pos)
        self.def_order: list[str] = []
        self.edges: list[tuple[int, str, str, str]] = []  # (pos, src, role, tgt)
        self.attrs: list[tuple[int, str, str, str]] = []
        self.pending: list[tuple[int, str, str, str, int]] = []  # (pos, src, role, sym, sympos)

    def off(self, pos: int) -> int:
        return _byte_offset(self.text, pos)

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def node(self) -> str:
        open_tok = self.take()
        var_tok = self.peek()
        if var_tok is None:
            raise UnbalancedParens("unclosed '('", self.off(open_tok.pos))
        if var_tok.kind != "symbol":
            raise MalformedPenman("expected a variable after '('", self.off(var_tok.pos))
        self.take()
        var = var_tok.text
        if var in self.defs:
            raise DuplicateVariableDefinition(f"variable {var!r} defined twice", self.off(var_tok.pos))
        slash = self.peek()
        if slash is None:
            raise UnbalancedParens("unclosed '('", self.off(open_tok.pos))
        if slash.kind != "/":
            raise MalformedPenman(f"expected '/' after variable {var!r}", self.off(slash.pos))
        self.take()
        concept_tok = self.peek()
        if concept_tok is None:
            raise UnbalancedParens("unclosed '('", self.off(open_tok.pos))
        if concept_tok.kind not in ("symbol", "string") or not concept_tok.text:
            raise MalformedPenman(f"expected a concept for {var!r}", self.off(concept_tok.pos))
        self.take()
        self.defs[var] = (concept_tok.text, var_tok.pos)
        self.def_order.append(var)

        while True:
            tok = self.peek()
            if tok is None:
                raise UnbalancedParens("unclosed '('", self.off(open_tok.pos))
            if tok.kind == ")":
                self.take()
                return var
            if tok.kind != "role":
                raise MalformedPenman(f"expected a role or ')', got {tok.text!r}", self.off(tok.pos))
            role = self.take()
            val = self.peek()
            if val is None:
                raise UnbalancedParens("unclosed '('", self.off(open_tok.pos))
            if val.kind == "(":
                child = self.node()
                self.edges.append((role.pos, var, role.text, child))
            elif val.kind == "string":
                self.take()
                self.attrs.append((role.pos, var, role.text, val.text))
            elif val.kind == "symbol":
                self.take()
                self.pending.append((role.pos, var, role.text, val.text, val.pos))
            else:
                raise MalformedPenman(f"role {role.text} has no value", self.off(role.pos))

    def read(self) -> AmrGraph:
        first = self.peek()
        if first is None:
            raise EmptyInput("no PENMAN expression found", 0)
        if first.kind == ")":
            raise UnbalancedParens("unexpected ')'", self.off(first.pos))
        if first.kind != "(":
            raise MalformedPenman("expected '('", self.off(first.pos))
        root = self.node()
        extra = self.peek()
        if extra is not None:
            if extra.kind == ")":
                raise UnbalancedParens("unexpected ')'", self.off(extra.pos))
            raise MalformedPenman("text after the end of the graph", self.off(extra.pos))

        mentions = {var: pos for var, (_, pos) in self.defs.items()}
        for rpos, src, role, sym, spos in self.pending:
            if sym in self.defs:
                self.edges.append((rpos, src, role, sym))
                mentions[sym] = min(mentions[sym], spos)
            elif _VARIABLE_SHAPE.fullmatch(sym):
                raise DanglingVariableReference(f"undefined variable {sym!r}", self.off(spos))
            else:
                self.attrs.append((rpos, src, role, sym))

        self.edges.sort()
        self.attrs.sort()
        seen = set()
        for pos, src, role, tgt in self.edges:
            if (src, role, tgt) in seen:
                raise DuplicateEdge(f"edge {src} {role} {tgt} repeated", self.off(pos))
            seen.add((src, role, tgt))

        order = sorted(self.def_order, key=lambda v: mentions[v])
        return AmrGraph(
            nodes=tuple(AmrNode(v, self.defs[v][0]) for v in order),
            edges=tuple(AmrEdge(s, r, t) for _, s, r, t in self.edges),
            attributes=tuple(AmrAttribute(s, r, v) for _, s, r, v in self.attrs),
            root=root,
        )


def parse_penman(text: str) -> AmrGraph:
    """Read one PENMAN expression.

    Lines starting with ``#`` are skipped.  A bare symbol filler is a
    reference when it names a variable defined anywhere in the expression,
    otherwise an attribute constant.  Errors carry the UTF-8 byte offset
    of the fault in ``.offset``.
    """
    return _Reader(text).read()


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------

_SAFE_SYMBOL = re.compile(r"[A-Za-z0-9_.+\-]+")
_SAFE_CONCEPT = re.compile(r"[^\s()/\":]+")


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _format_constant(value: str, variables) -> str:
    if _SAFE_SYMBOL.fullmatch(value) and value not in variables and not _VARIABLE_SHAPE.fullmatch(value):
        return value
    return _quote(value)


def _format_concept(concept: str) -> str:
    return concept if _SAFE_CONCEPT.fullmatch(concept) else _quote(concept)


def _undirected_reach(graph: AmrGraph) -> set[str]:
    adj = defaultdict(set)
    for e in graph.edges:
        adj[e.source].add(e.target)
        adj[e.target].add(e.source)
    seen = {graph.root}
    queue = deque([graph.root])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def serialize_penman(graph: AmrGraph, indent: int | None = None) -> str:
    """Write ``graph`` as one PENMAN expression.

    Nodes are defined at their first visit in a depth-first walk from the
    root over edges in graph order; later visits emit the bare variable.
    A node reachable only against edge direction is reached through the
    inverted role, which re-reads as that inverted triple.

    With ``indent`` set, each role goes on its own line.
    """
    reach = _undirected_reach(graph)
    for node in graph.nodes:
        if node.variable not in reach:
            raise DisconnectedGraph(node.variable)

    variables = {n.variable for n in graph.nodes}
    out_edges = defaultdict(list)
    in_edges = defaultdict(list)
    for idx, e in enumerate(graph.edges):
        out_edges[e.source].append(idx)
        in_edges[e.target].append(idx)
    attrs = defaultdict(list)
    for a in graph.attributes:
        attrs[a.owner].append(a)

    # nodes reachable along edge direction need no inversion
    forward = {graph.root}
    stack = [graph.root]
    while stack:
        v = stack.pop()
        for idx in out_edges[v]:
            t = graph.edges[idx].target
            if t not in forward:
                forward.add(t)
                stack.append(t)

    emitted: set[str] = set()
    consumed: set[int] = set()

    def sep(depth: int) -> str:
        return " " if indent is None else "\n" + " " * (indent * depth)

    def emit(var: str, depth: int) -> str:
        emitted.add(var)
        parts = [f"({var} / {_format_concept(graph.concept(var))}"]
        for a in attrs[var]:
            parts.append(f"{sep(depth + 1)}{a.relation} {_format_constant(a.value, variables)}")
        for idx in out_edges[var]:
            if idx in consumed:
                continue
            consumed.add(idx)
            e = graph.edges[idx]
            filler = e.target if e.target in emitted else emit(e.target, depth + 1)
            parts.append(f"{sep(depth + 1)}{e.relation} {filler}")
        for idx in in_edges[var]:
            e = graph.edges[idx]
            if idx in consumed or e.source in emitted or e.source in forward:
                continue
            consumed.add(idx)
            parts.append(f"{sep(depth + 1)}{invert_relation(e.relation)} {emit(e.source, depth + 1)}")
        return "".join(parts) + ")"

    return emit(graph.root, 0)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def validate(graph: AmrGraph) -> list[str]:
    """List every broken graph invariant; an empty list means the graph is valid."""
    problems: list[str] = []
    defined: set[str] = set()
    for node in graph.nodes:
        if not node.variable:
            problems.append("EmptyVariable")
        elif node.variable in defined:
            problems.append(f"DuplicateVariableDefinition: {node.variable}")
        defined.add(node.variable)
        if not node.concept:
            problems.append(f"EmptyConcept: {node.variable}")

    if graph.root not in defined:
        problems.append(f"MissingRoot: {graph.root}")

    seen = set()
    for e in graph.edges:
        for end in (e.source, e.target):
            if end not in defined:
                problems.append(f"DanglingVariableReference: {end}")
        if not e.relation:
            problems.append(f"EmptyRelation: {e.source} -> {e.target}")
        if e.as_tuple() in seen:
            problems.append(f"DuplicateEdge: {e.source} {e.relation} {e.target}")
        seen.add(e.as_tuple())

    for a in graph.attributes:
        if a.owner not in defined:
            problems.append(f"DanglingVariableReference: {a.owner}")

    if graph.root in defined:
        reach = _undirected_reach(graph)
        for node in graph.nodes:
            if node.variable and node.variable not in reach:
                problems.append(f"Disconnected: {node.variable}")
    return problems


def graph_from_triples(
    root: str,
    nodes: Iterable[tuple[str, str]],
    edges: Iterable[tuple[str, str, str]] = (),
    attributes: Iterable[tuple[str, str, str]] = (),
) -> AmrGraph:
    """Convenience constructor from plain tuples."""
    return AmrGraph(
        nodes=tuple(AmrNode(v, c) for v, c in nodes),
        edges=tuple(AmrEdge(*t) for t in edges),
        attributes=tuple(AmrAttribute(*t) for t in attributes),
        root=root,
    )
