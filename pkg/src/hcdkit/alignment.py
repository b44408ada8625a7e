"""Token-to-concept alignments.

An alignment spec is a whitespace-separated list of ``start-end|var`` items.
``start`` and ``end`` are word indices into :func:`hcdkit.text.tokenize`
output, end-exclusive, so ``"0-1|c 1-3|a"`` aligns word 0 to ``c`` and
words 1 and 2 to ``a``.  Spans may overlap and a variable may appear in
several items.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from hcdkit.amr import AmrGraph
from hcdkit.errors import IndexOutOfRange, MalformedItem, SpanOutOfRange, UnknownVariable

_ITEM_RE = re.compile(r"(\d+)-(\d+)\|(\S+)")


@dataclass(frozen=True)
class AlignmentEntry:
    start: int
    end: int
    node: str

    def covers(self, idx: int) -> bool:
        return self.start <= idx < self.end


@dataclass(frozen=True)
class TokenAlignment:
    entries: tuple[AlignmentEntry, ...]
    token_count: int
    # variables of the companion graph; None when built without one
    known_variables: frozenset[str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def aligned_indices(self) -> list[int]:
        return sorted({i for e in self.entries for i in range(e.start, e.end)})


def parse_alignment(spec: str, graph: AmrGraph, token_count: int) -> TokenAlignment:
    known = frozenset(graph.variables)
    entries = []
    for item in spec.split():
        m = _ITEM_RE.fullmatch(item)
        if m is None:
            raise MalformedItem("expected start-end|var", item)
        start, end, var = int(m.group(1)), int(m.group(2)), m.group(3)
        if not 0 <= start < end <= token_count:
            raise SpanOutOfRange(f"span outside 0..{token_count}", item)
        if var not in known:
            raise UnknownVariable("variable not in graph", item)
        entries.append(AlignmentEntry(start, end, var))
    return TokenAlignment(tuple(entries), token_count, known)


def format_alignment(a: TokenAlignment) -> str:
    return " ".join(f"{e.start}-{e.end}|{e.node}" for e in a.entries)


def concepts_for_token(a: TokenAlignment, idx: int) -> list[str]:
    if not 0 <= idx < a.token_count:
        raise IndexOutOfRange(f"token index {idx} outside 0..{a.token_count - 1}")
    return [e.node for e in a.entries if e.covers(idx)]


def tokens_for_concept(a: TokenAlignment, node: str) -> list[int]:
    if a.known_variables is not None and node not in a.known_variables:
        raise UnknownVariable("variable not in graph", node)
    return sorted({i for e in a.entries if e.node == node for i in range(e.start, e.end)})
