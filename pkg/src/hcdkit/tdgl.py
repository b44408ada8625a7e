"""Topic-driven graph linking.

Each advice in a pair comes with its own AMR graph.  On each side, linking
finds the aligned token most similar to the annotated conflict topic and
uses the concept aligned to it.  A single ``:conflict`` edge then joins the
two topic concepts.  Graph-2 variables are renamed (``a`` -> ``a_2``) so
the union has no collisions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from hcdkit.alignment import TokenAlignment, concepts_for_token
from hcdkit.amr import AmrAttribute, AmrEdge, AmrGraph, AmrNode, serialize_penman
from hcdkit.errors import NoTokens, TopicUnalignable

CONFLICT = ":conflict"
RENAME_SUFFIX = "_2"
SIMILARITY_KINDS = ("exact", "trigram", "embedding")
_PAD = " "


# ---------------------------------------------------------------------------
# similarity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimilarityProvider:
    kind: str = "trigram"
    embedding_table: Mapping[str, np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in SIMILARITY_KINDS:
            raise ValueError(f"unknown similarity kind {self.kind!r}; choose from {SIMILARITY_KINDS}")
        if self.kind == "embedding" and self.embedding_table is None:
            raise ValueError("embedding similarity needs an embedding table")

    @classmethod
    def from_embedding_file(cls, path: str | Path) -> "SimilarityProvider":
        return cls("embedding", load_embeddings(path))


def load_embeddings(path: str | Path) -> dict[str, np.ndarray]:
    """Read ``word v1 ... vd`` lines; vectors are scaled to unit length.

    Zero vectors are dropped, so their words fall back to trigram scoring.
    """
    table: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected a word followed by numbers")
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ValueError(f"{path}:{lineno}: dimension {len(vec)} != {dim}")
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec = vec / norm
                vec.setflags(write=False)
                table[parts[0]] = vec
    return table


def _trigrams(word: str) -> set[str]:
    padded = _PAD + word.casefold() + _PAD
    return {padded[i : i + 3] for i in range(len(padded) - 2)}


def _trigram_jaccard(a: str, b: str) -> float:
    ta, tb = _trigrams(a), _trigrams(b)
    return len(ta & tb) / len(ta | tb)


def _lookup(table: Mapping[str, np.ndarray], word: str):
    vec = table.get(word)
    if vec is None:
        vec = table.get(word.casefold())
    return vec


def similarity(a: str, b: str, p: SimilarityProvider) -> float:
    if p.kind == "exact":
        return 1.0 if a.casefold() == b.casefold() else 0.0
    if p.kind == "embedding":
        va, vb = _lookup(p.embedding_table, a), _lookup(p.embedding_table, b)
        if va is not None and vb is not None:
            # clamp guards against rounding just above 1
            return min(1.0, max(0.0, float(np.dot(va, vb))))
    return _trigram_jaccard(a, b)


# ---------------------------------------------------------------------------
# topic selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TopicSelection:
    token_index: int
    node: str
    score: float


def select_topic_token(
    tokens: Sequence[str],
    topic: str,
    a: TokenAlignment,
    p: SimilarityProvider,
    min_score: float = 0.0,
    side: int | None = None,
) -> TopicSelection:
    """Pick the aligned token closest to ``topic``.

    A token scores the best similarity against any word of the topic.
    Only tokens with an aligned concept and a score of at least
    ``min_score`` qualify; ties go to the lowest index, and the concept is
    the first one aligned to that token.
    """
    if not tokens:
        raise NoTokens("advice has no tokens")
    topic_words = topic.split()
    if not topic_words:
        raise ValueError("topic is empty")
    if len(tokens) != a.token_count:
        raise ValueError(f"{len(tokens)} tokens but alignment covers {a.token_count}")

    best: TopicSelection | None = None
    for idx, tok in enumerate(tokens):
        concepts = concepts_for_token(a, idx)
        if not concepts:
            continue
        score = max(similarity(tok, w, p) for w in topic_words)
        if score < min_score:
            continue
        if best is None or score > best.score:
            best = TopicSelection(idx, concepts[0], score)
    if best is None:
        reason = "no aligned token" if min_score <= 0 else f"no aligned token scores >= {min_score}"
        raise TopicUnalignable(reason, side)
    return best


# ---------------------------------------------------------------------------
# linking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinkedGraph:
    nodes: tuple[AmrNode, ...]
    edges: tuple[AmrEdge, ...]  # graph 1, renamed graph 2, then the conflict edge
    attributes: tuple[AmrAttribute, ...]
    roots: tuple[str, str]
    conflict_edge: AmrEdge
    rename_map: dict[str, str]
    topic_tokens: tuple[int, int] = (-1, -1)

    @property
    def source_edges(self) -> tuple[AmrEdge, ...]:
        return self.edges[:-1]

    def to_dict(self) -> dict:
        return {
            "nodes": [{"variable": n.variable, "concept": n.concept} for n in self.nodes],
            "edges": [{"source": e.source, "relation": e.relation, "target": e.target} for e in self.edges],
            "attributes": [{"owner": a.owner, "relation": a.relation, "value": a.value} for a in self.attributes],
            "roots": list(self.roots),
            "conflict_edge": {
                "source": self.conflict_edge.source,
                "relation": self.conflict_edge.relation,
                "target": self.conflict_edge.target,
            },
            "rename_map": dict(self.rename_map),
            "topic_tokens": list(self.topic_tokens),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "LinkedGraph":
        return cls(
            nodes=tuple(AmrNode(n["variable"], n["concept"]) for n in d["nodes"]),
            edges=tuple(AmrEdge(e["source"], e["relation"], e["target"]) for e in d["edges"]),
            attributes=tuple(AmrAttribute(a["owner"], a["relation"], a["value"]) for a in d["attributes"]),
            roots=tuple(d["roots"]),
            conflict_edge=AmrEdge(**d["conflict_edge"]),
            rename_map=dict(d["rename_map"]),
            topic_tokens=tuple(d.get("topic_tokens", (-1, -1))),
        )

    @classmethod
    def from_json(cls, text: str) -> "LinkedGraph":
        return cls.from_dict(json.loads(text))

    def split(self) -> tuple[AmrGraph, AmrGraph]:
        """Recover the two source graphs, undoing the graph-2 renaming."""
        back = {new: old for old, new in self.rename_map.items()}
        g1 = AmrGraph(
            nodes=tuple(n for n in self.nodes if n.variable not in back),
            edges=tuple(e for e in self.source_edges if e.source not in back),
            attributes=tuple(a for a in self.attributes if a.owner not in back),
            root=self.roots[0],
        )
        g2 = AmrGraph(
            nodes=tuple(AmrNode(back[n.variable], n.concept) for n in self.nodes if n.variable in back),
            edges=tuple(
                AmrEdge(back[e.source], e.relation, back[e.target]) for e in self.source_edges if e.source in back
            ),
            attributes=tuple(AmrAttribute(back[a.owner], a.relation, a.value) for a in self.attributes if a.owner in back),
            root=back[self.roots[1]],
        )
        return g1, g2

    def to_penman(self, link_concept: str = "linked-pair") -> str:
        """Lossy PENMAN view under a synthetic root.

        Adds one node and two ``:snt`` edges, so node and edge counts no
        longer match the linked graph; use the JSON form for storage.
        """
        taken = {n.variable for n in self.nodes}
        link_var = "link"
        k = 1
        while link_var in taken:
            link_var = f"link{k}"
            k += 1
        g = AmrGraph(
            nodes=(AmrNode(link_var, link_concept),) + self.nodes,
            edges=(AmrEdge(link_var, ":snt1", self.roots[0]), AmrEdge(link_var, ":snt2", self.roots[1])) + self.edges,
            attributes=self.attributes,
            root=link_var,
        )
        return serialize_penman(g)


def _rename_variables(g1: AmrGraph, g2: AmrGraph) -> dict[str, str]:
    taken = set(g1.variables)
    mapping: dict[str, str] = {}
    for var in g2.variables:
        new = var + RENAME_SUFFIX
        k = 1
        while new in taken:
            new = f"{var}{RENAME_SUFFIX}_{k}"
            k += 1
        taken.add(new)
        mapping[var] = new
    return mapping


def link_graphs(
    g1: AmrGraph,
    a1: TokenAlignment,
    tokens1: Sequence[str],
    g2: AmrGraph,
    a2: TokenAlignment,
    tokens2: Sequence[str],
    topic: str,
    p: SimilarityProvider | None = None,
    min_score: float = 0.0,
) -> LinkedGraph:
    p = p or SimilarityProvider()
    sel1 = select_topic_token(tokens1, topic, a1, p, min_score, side=1)
    sel2 = select_topic_token(tokens2, topic, a2, p, min_score, side=2)
    rename = _rename_variables(g1, g2)

    nodes = g1.nodes + tuple(AmrNode(rename[n.variable], n.concept) for n in g2.nodes)
    conflict = AmrEdge(sel1.node, CONFLICT, rename[sel2.node])
    edges = (
        g1.edges
        + tuple(AmrEdge(rename[e.source], e.relation, rename[e.target]) for e in g2.edges)
        + (conflict,)
    )
    attributes = g1.attributes + tuple(AmrAttribute(rename[a.owner], a.relation, a.value) for a in g2.attributes)
    return LinkedGraph(
        nodes=nodes,
        edges=edges,
        attributes=attributes,
        roots=(g1.root, rename[g2.root]),
        conflict_edge=conflict,
        rename_map=rename,
        topic_tokens=(sel1.token_index, sel2.token_index),
    )
