"""Semantic-graph preprocessing and evaluation toolkit for health conflict detection.

The package turns pairs of health-advice statements, each with an AMR graph
and a token alignment, into a single topic-linked graph and a token-level
relation matrix, and ships a small lexical baseline with the evaluation
protocol used to score conflict-type classifiers.
"""

from hcdkit.alignment import (
    AlignmentEntry,
    TokenAlignment,
    concepts_for_token,
    format_alignment,
    parse_alignment,
    tokens_for_concept,
)
from hcdkit.amr import (
    AmrAttribute,
    AmrEdge,
    AmrGraph,
    AmrNode,
    invert_relation,
    parse_penman,
    serialize_penman,
    validate,
)
from hcdkit.relations import (
    RelationMatrix,
    RelationVocab,
    SubtokenMap,
    build_matrix,
    build_vocab,
    read_matrix,
    serialize_matrix,
)
from hcdkit.tdgl import (
    LinkedGraph,
    SimilarityProvider,
    TopicSelection,
    link_graphs,
    select_topic_token,
    similarity,
)
from hcdkit.text import tokenize

__version__ = "0.1.0"

__all__ = [
    "AlignmentEntry",
    "AmrAttribute",
    "AmrEdge",
    "AmrGraph",
    "AmrNode",
    "LinkedGraph",
    "RelationMatrix",
    "RelationVocab",
    "SimilarityProvider",
    "SubtokenMap",
    "TokenAlignment",
    "TopicSelection",
    "build_matrix",
    "build_vocab",
    "concepts_for_token",
    "format_alignment",
    "invert_relation",
    "link_graphs",
    "parse_alignment",
    "parse_penman",
    "read_matrix",
    "select_topic_token",
    "serialize_matrix",
    "serialize_penman",
    "similarity",
    "tokenize",
    "tokens_for_concept",
    "validate",
]
