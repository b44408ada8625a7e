"""Token-by-token relation matrices over the packed pair input.

The packed sequence is ``[CLS] advice-1 words [SEP] advice-2 words [SEP]``
after subword expansion.  Cell ``(i, j)`` holds a vocabulary id:

* the AMR relation between the concepts aligned to the two words, with the
  ``-of`` form for the reverse direction and ``:conflict`` both ways;
* on the diagonal, the first attribute value of the word's concept
  (``imperative`` for ``:mode imperative``) or ``self``;
* ``bos`` from every word position to its sentence start (``[CLS]`` for
  advice 1, the first ``[SEP]`` for advice 2);
* ``None`` everywhere else.

Word-level labels fill the whole subtoken block of the word pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from hcdkit.alignment import TokenAlignment
from hcdkit.amr import AmrGraph, invert_relation
from hcdkit.errors import AlignmentOutOfRange, LayoutMismatch, UnknownVariable
from hcdkit.tdgl import CONFLICT, LinkedGraph

NONE, SELF, BOS, UNK = "None", "self", "bos", "<unk>"
RESERVED = (NONE, SELF, BOS, UNK, CONFLICT)


# ---------------------------------------------------------------------------
# vocabulary
# ---------------------------------------------------------------------------


class RelationVocab:
    """Ordered label set; ids are line numbers of the vocabulary file."""

    def __init__(self, labels: Iterable[str] = ()):
        ordered = list(RESERVED)
        seen = set(ordered)
        for label in labels:
            if label not in seen:
                seen.add(label)
                ordered.append(label)
        self.labels: tuple[str, ...] = tuple(ordered)
        self.index = {label: i for i, label in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, RelationVocab) and self.labels == other.labels

    def lookup(self, label: str) -> int:
        return self.index.get(label, self.index[UNK])

    def label(self, idx: int) -> str:
        return self.labels[idx]

    def to_text(self) -> str:
        return "".join(label + "\n" for label in self.labels)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str) -> "RelationVocab":
        labels = text.split("\n")
        if labels and labels[-1] == "":
            labels.pop()
        if tuple(labels[: len(RESERVED)]) != RESERVED:
            raise ValueError(f"vocabulary must start with {RESERVED}")
        if len(set(labels)) != len(labels):
            raise ValueError("vocabulary has duplicate labels")
        return cls(labels)

    @classmethod
    def load(cls, path: str | Path) -> "RelationVocab":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def build_vocab(training_graphs: Iterable[AmrGraph]) -> RelationVocab:
    labels: list[str] = []
    for g in training_graphs:
        for e in g.edges:
            labels.append(e.relation)
            labels.append(invert_relation(e.relation))
        for a in g.attributes:
            labels.append(a.value)
    return RelationVocab(labels)


# ---------------------------------------------------------------------------
# packed layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubtokenMap:
    """Subtoken ranges ``[start, end)`` of every packed word, advice 1 first."""

    groups: tuple[tuple[int, int], ...]
    specials: tuple[int, int, int]  # [CLS], first [SEP], final [SEP]
    n_words1: int

    @property
    def n_words2(self) -> int:
        return len(self.groups) - self.n_words1

    @property
    def length(self) -> int:
        return self.specials[2] + 1

    @classmethod
    def from_counts(cls, counts1: Sequence[int], counts2: Sequence[int]) -> "SubtokenMap":
        """Layout for words split into the given numbers of subtokens."""
        if any(c < 1 for c in list(counts1) + list(counts2)):
            raise LayoutMismatch("every word needs at least one subtoken")
        groups = []
        pos = 1
        for c in counts1:
            groups.append((pos, pos + c))
            pos += c
        sep1 = pos
        pos += 1
        for c in counts2:
            groups.append((pos, pos + c))
            pos += c
        return cls(tuple(groups), (0, sep1, pos), len(counts1))

    def check(self) -> None:
        """Raise :class:`LayoutMismatch` unless the layout tiles ``0..length-1`` in order."""
        cls_pos, sep1, sep2 = self.specials
        if not 0 <= self.n_words1 <= len(self.groups):
            raise LayoutMismatch(f"n_words1={self.n_words1} but {len(self.groups)} groups")
        expected = [(cls_pos, cls_pos + 1)]
        expected += list(self.groups[: self.n_words1])
        expected.append((sep1, sep1 + 1))
        expected += list(self.groups[self.n_words1 :])
        expected.append((sep2, sep2 + 1))
        cursor = 0
        for start, end in expected:
            if start != cursor or end <= start:
                raise LayoutMismatch(f"range [{start}, {end}) does not continue the layout at {cursor}")
            cursor = end
        if cursor != self.length:
            raise LayoutMismatch(f"layout covers {cursor} positions, expected {self.length}")

    def bos_of(self, word: int) -> int:
        return self.specials[0] if word < self.n_words1 else self.specials[1]


def naive_subtoken_counts(words: Sequence[str], threshold: int = 8) -> list[int]:
    """Stand-in subword tokenizer: words longer than ``threshold`` split in two."""
    return [2 if len(w) > threshold else 1 for w in words]


# ---------------------------------------------------------------------------
# matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RelationMatrix:
    cells: np.ndarray  # (L, L) vocabulary ids

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int32)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError(f"relation matrix must be square, got shape {cells.shape}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def size(self) -> int:
        return self.cells.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, RelationMatrix) and np.array_equal(self.cells, other.cells)

    def labels(self, vocab: RelationVocab) -> list[list[str]]:
        return [[vocab.label(int(x)) for x in row] for row in self.cells]


def _check_alignment(a: TokenAlignment, n_words: int, side: int) -> None:
    if a.token_count != n_words:
        raise AlignmentOutOfRange(f"advice {side}: alignment covers {a.token_count} words, layout has {n_words}")
    for e in a.entries:
        if e.end > n_words:
            raise AlignmentOutOfRange(f"advice {side}: span {e.start}-{e.end} beyond {n_words} words")


def _fill(
    sm: SubtokenMap,
    word_concepts: list[list[str]],
    edges: Sequence[tuple[str, str, str]],
    conflict: tuple[str, str] | None,
    first_attr: dict[str, str],
    vocab: RelationVocab,
) -> RelationMatrix:
    # (u, w) -> (edge order, label); the earliest edge in graph order wins
    pair_label: dict[tuple[str, str], tuple[int, str]] = {}

    def offer(key, order, label):
        if key[0] != key[1] and (key not in pair_label or order < pair_label[key][0]):
            pair_label[key] = (order, label)

    for order, (src, rel, tgt) in enumerate(edges):
        offer((src, tgt), order, rel)
        offer((tgt, src), order, invert_relation(rel))
    if conflict is not None:
        order = len(edges)
        offer(conflict, order, CONFLICT)
        offer((conflict[1], conflict[0]), order, CONFLICT)

    cells = np.full((sm.length, sm.length), vocab.lookup(NONE), dtype=np.int32)
    self_id, bos_id = vocab.lookup(SELF), vocab.lookup(BOS)

    for p in sm.specials:
        cells[p, p] = self_id

    for u, (us, ue) in enumerate(sm.groups):
        cu = word_concepts[u]
        diag = first_attr.get(cu[0], SELF) if cu else SELF
        cells[us:ue, us:ue] = vocab.lookup(diag)
        cells[us:ue, sm.bos_of(u)] = bos_id

    aligned = [u for u, cs in enumerate(word_concepts) if cs]
    for u in aligned:
        us, ue = sm.groups[u]
        for w in aligned:
            if u == w:
                continue
            best = None
            for cu in word_concepts[u]:
                for cw in word_concepts[w]:
                    hit = pair_label.get((cu, cw))
                    if hit is not None and (best is None or hit[0] < best[0]):
                        best = hit
            if best is not None:
                ws, we = sm.groups[w]
                cells[us:ue, ws:we] = vocab.lookup(best[1])
    return RelationMatrix(cells)


def _first_attributes(attributes) -> dict[str, str]:
    first: dict[str, str] = {}
    for a in attributes:
        first.setdefault(a.owner, a.value)
    return first


def build_matrix(
    lg: LinkedGraph,
    a1: TokenAlignment,
    a2: TokenAlignment,
    sm: SubtokenMap,
    v: RelationVocab,
) -> RelationMatrix:
    """Relation matrix for a linked pair; ``a2`` uses graph-2's original variables."""
    sm.check()
    _check_alignment(a1, sm.n_words1, 1)
    _check_alignment(a2, sm.n_words2, 2)
    graph2_vars = set(lg.rename_map.values())
    graph1_vars = {n.variable for n in lg.nodes} - graph2_vars

    word_concepts: list[list[str]] = [[] for _ in sm.groups]
    for e in a1.entries:
        if e.node not in graph1_vars:
            raise UnknownVariable("advice 1 alignment names a variable outside graph 1", e.node)
        for i in range(e.start, e.end):
            word_concepts[i].append(e.node)
    for e in a2.entries:
        if e.node not in lg.rename_map:
            raise UnknownVariable("advice 2 alignment names a variable outside graph 2", e.node)
        for i in range(e.start, e.end):
            word_concepts[sm.n_words1 + i].append(lg.rename_map[e.node])

    edges = [e.as_tuple() for e in lg.source_edges]
    conflict = (lg.conflict_edge.source, lg.conflict_edge.target)
    return _fill(sm, word_concepts, edges, conflict, _first_attributes(lg.attributes), v)


def build_graph_matrix(
    graph: AmrGraph,
    alignment: TokenAlignment,
    sm: SubtokenMap,
    v: RelationVocab,
) -> RelationMatrix:
    """Relation matrix for one advice (advice 2 empty), no conflict edge."""
    sm.check()
    if sm.n_words2 != 0:
        raise LayoutMismatch("single-graph layout must have no advice-2 words")
    _check_alignment(alignment, sm.n_words1, 1)
    word_concepts: list[list[str]] = [[] for _ in sm.groups]
    for e in alignment.entries:
        if not graph.has_variable(e.node):
            raise UnknownVariable("alignment names a variable outside the graph", e.node)
        for i in range(e.start, e.end):
            word_concepts[i].append(e.node)
    edges = [e.as_tuple() for e in graph.edges]
    return _fill(sm, word_concepts, edges, None, _first_attributes(graph.attributes), v)


# ---------------------------------------------------------------------------
# sparse stream
# ---------------------------------------------------------------------------


def serialize_matrix(m: RelationMatrix, v: RelationVocab) -> str:
    """``L<TAB>|vocab|`` header, then ``i<TAB>j<TAB>id`` for every non-None cell, row-major."""
    none_id = v.lookup(NONE)
    lines = [f"{m.size}\t{len(v)}"]
    rows, cols = np.nonzero(m.cells != none_id)
    for i, j in zip(rows.tolist(), cols.tolist()):
        lines.append(f"{i}\t{j}\t{int(m.cells[i, j])}")
    return "\n".join(lines) + "\n"


def read_matrix(text: str, v: RelationVocab | None = None) -> RelationMatrix:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty matrix stream")
    try:
        size, vocab_size = (int(x) for x in lines[0].split("\t"))
    except ValueError:
        raise ValueError(f"bad matrix header {lines[0]!r}") from None
    if v is not None and vocab_size != len(v):
        raise ValueError(f"matrix written with a {vocab_size}-label vocabulary, got {len(v)}")
    none_id = v.lookup(NONE) if v is not None else RESERVED.index(NONE)
    cells = np.full((size, size), none_id, dtype=np.int32)
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected i<TAB>j<TAB>id")
        i, j, label = (int(x) for x in parts)
        if not (0 <= i < size and 0 <= j < size and 0 <= label < vocab_size):
            raise ValueError(f"line {lineno}: value out of range")
        cells[i, j] = label
    return RelationMatrix(cells)
