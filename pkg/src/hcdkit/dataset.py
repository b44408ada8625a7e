"""Advice-pair records: JSONL schema, corpus statistics, toy generator.

One JSON object per line::

    {"id": "p1", "advice1": "...", "advice2": "...", "topic": "alcohol",
     "labels": {"direct": true, "subtypical": false,
                "conditional": false, "temporal": false},
     "source": "real", "split": "train",
     "amr1": "(c / ...)", "amr2": "(d / ...)",
     "align1": "0-1|c 1-2|a", "align2": "2-3|d 3-4|a"}

``amr*`` and ``align*`` are optional; alignments index words produced by
:func:`hcdkit.text.tokenize`.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

from hcdkit.alignment import AlignmentEntry, TokenAlignment, format_alignment
from hcdkit.amr import AmrAttribute, AmrEdge, AmrGraph, AmrNode, serialize_penman
from hcdkit.errors import MalformedLine, MissingField
from hcdkit.text import tokenize

LABELS = ("direct", "subtypical", "conditional", "temporal")
SOURCES = ("real", "synthetic")
SPLITS = ("train", "test")
_REQUIRED = ("id", "advice1", "advice2", "topic", "labels", "source", "split")
_OPTIONAL = ("amr1", "amr2", "align1", "align2")


@dataclass
class DatasetRecord:
    id: str
    advice1: str
    advice2: str
    topic: str
    labels: dict[str, bool]
    source: str
    split: str
    amr1: str | None = None
    amr2: str | None = None
    align1: str | None = None
    align2: str | None = None
    line: int | None = field(default=None, compare=False, repr=False)

    def has_structure(self) -> bool:
        return None not in (self.amr1, self.amr2, self.align1, self.align2)

    def label_vector(self) -> list[bool]:
        return [bool(self.labels[name]) for name in LABELS]

    def to_dict(self) -> dict:
        d = {name: getattr(self, name) for name in _REQUIRED}
        d["labels"] = {name: bool(self.labels[name]) for name in LABELS}
        for name in _OPTIONAL:
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict, line: int = 0) -> "DatasetRecord":
        if not isinstance(d, dict):
            raise MalformedLine(line, "record is not a JSON object")
        for name in _REQUIRED:
            if name not in d:
                raise MissingField(line, name)
        for name in ("id", "advice1", "advice2", "topic"):
            if not isinstance(d[name], str) or not d[name].strip():
                raise MalformedLine(line, f"{name!r} must be a non-empty string")
        if d["source"] not in SOURCES:
            raise MalformedLine(line, f"source must be one of {SOURCES}")
        if d["split"] not in SPLITS:
            raise MalformedLine(line, f"split must be one of {SPLITS}")
        labels = d["labels"]
        if not isinstance(labels, dict):
            raise MalformedLine(line, "'labels' must be an object")
        for name in LABELS:
            if name not in labels:
                raise MissingField(line, f"labels.{name}")
            if not isinstance(labels[name], bool):
                raise MalformedLine(line, f"labels.{name} must be true or false")
        optional = {}
        for name in _OPTIONAL:
            value = d.get(name)
            if value is not None and not isinstance(value, str):
                raise MalformedLine(line, f"{name!r} must be a string")
            optional[name] = value
        return cls(
            id=d["id"],
            advice1=d["advice1"],
            advice2=d["advice2"],
            topic=d["topic"],
            labels={name: labels[name] for name in LABELS},
            source=d["source"],
            split=d["split"],
            line=line,
            **optional,
        )


def load_records(path: str | Path) -> list[DatasetRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MalformedLine(lineno, f"invalid JSON ({exc.msg})") from None
            records.append(DatasetRecord.from_dict(obj, lineno))
    return records


def dump_records(records: Iterable[DatasetRecord], path: str | Path) -> None:
    Path(path).write_text(records_to_jsonl(records), encoding="utf-8")


def records_to_jsonl(records: Iterable[DatasetRecord]) -> str:
    return "".join(r.to_json() + "\n" for r in records)


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

_SENTENCE_END = re.compile(r"[.!?]+")


def count_words(text: str) -> int:
    return sum(1 for tok in tokenize(text) if any(ch.isalnum() for ch in tok))


def count_sentences(text: str) -> int:
    return sum(1 for seg in _SENTENCE_END.split(text) if any(ch.isalnum() for ch in seg))


@dataclass
class DatasetStats:
    total: int
    counts: dict[str, dict[str, int]]  # split -> source -> records
    label_counts: dict[str, int]
    mean_words: float
    single_sentence: int
    multi_sentence: int

    @property
    def single_to_multi_ratio(self) -> float | None:
        return self.single_sentence / self.multi_sentence if self.multi_sentence else None

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "counts": self.counts,
            "label_counts": self.label_counts,
            "mean_words": self.mean_words,
            "single_sentence": self.single_sentence,
            "multi_sentence": self.multi_sentence,
            "single_to_multi_ratio": self.single_to_multi_ratio,
        }

    def to_text(self) -> str:
        lines = [f"{'split':<8}{'real':>8}{'synthetic':>11}"]
        for split in SPLITS:
            row = self.counts[split]
            lines.append(f"{split:<8}{row['real']:>8}{row['synthetic']:>11}")
        lines.append("")
        for name in LABELS:
            lines.append(f"{name:<14}{self.label_counts[name]:>6}")
        ratio = self.single_to_multi_ratio
        lines.append("")
        lines.append(f"records           {self.total}")
        lines.append(f"mean words/advice {self.mean_words:.2f}")
        lines.append(f"single:multi      {'n/a' if ratio is None else f'{ratio:.2f}'}")
        return "\n".join(lines)


def dataset_stats(records: Sequence[DatasetRecord]) -> DatasetStats:
    counts = {split: {source: 0 for source in SOURCES} for split in SPLITS}
    label_counts = {name: 0 for name in LABELS}
    words = single = multi = 0
    for r in records:
        counts[r.split][r.source] += 1
        for name in LABELS:
            label_counts[name] += bool(r.labels[name])
        for text in (r.advice1, r.advice2):
            words += count_words(text)
            if count_sentences(text) > 1:
                multi += 1
            else:
                single += 1
    n_advice = 2 * len(records)
    return DatasetStats(
        total=len(records),
        counts=counts,
        label_counts=label_counts,
        mean_words=words / n_advice if n_advice else 0.0,
        single_sentence=single,
        multi_sentence=multi,
    )


# ---------------------------------------------------------------------------
# toy generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToyConfig:
    direct: int = 0
    subtypical: int = 0
    conditional: int = 0
    temporal: int = 0
    negatives: int = 0
    split: str = "train"
    source: str = "synthetic"
    id_prefix: str = "toy"

    def __post_init__(self):
        for name in (*LABELS, "negatives"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} count must be >= 0")
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")

    @classmethod
    def from_dict(cls, d: dict) -> "ToyConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown toy config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ToyConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# (topic word, concept, verb, verb concept)
_TOPICS = [
    ("alcohol", "alcohol", "drink", "drink-01"),
    ("coffee", "coffee", "drink", "drink-01"),
    ("milk", "milk", "drink", "drink-01"),
    ("juice", "juice", "drink", "drink-01"),
    ("soda", "soda", "drink", "drink-01"),
    ("tea", "tea", "drink", "drink-01"),
    ("wine", "wine", "drink", "drink-01"),
    ("cheese", "cheese", "eat", "eat-01"),
    ("eggs", "egg", "eat", "eat-01"),
    ("rice", "rice", "eat", "eat-01"),
    ("bread", "bread", "eat", "eat-01"),
    ("nuts", "nut", "eat", "eat-01"),
    ("yogurt", "yogurt", "eat", "eat-01"),
    ("butter", "butter", "eat", "eat-01"),
    ("chocolate", "chocolate", "eat", "eat-01"),
    ("fish", "fish", "eat", "eat-01"),
    ("beans", "bean", "eat", "eat-01"),
    ("meat", "meat", "eat", "eat-01"),
    ("salt", "salt", "use", "use-01"),
    ("sugar", "sugar", "use", "use-01"),
]

# (word, concept, role from the verb)
_FREQUENCY = [
    ("daily", "daily", ":frequency"),
    ("regularly", "regular-02", ":ARG1-of"),
    ("often", "often", ":frequency"),
    ("freely", "free-04", ":manner"),
    ("happily", "happy-01", ":manner"),
]

# (word, concept, role from the topic); "full-fat" is a typical subtype modifier
_SUBTYPES = [
    ("full-fat", "full-fat", ":mod"),
    ("processed", "process-01", ":ARG1-of"),
    ("fried", "fry-01", ":ARG1-of"),
    ("sugary", "sugary", ":mod"),
    ("salted", "salt-01", ":ARG1-of"),
    ("smoked", "smoke-01", ":ARG1-of"),
    ("canned", "can-01", ":ARG1-of"),
    ("flavored", "flavor-01", ":ARG1-of"),
    ("refined", "refine-01", ":ARG1-of"),
    ("raw", "raw", ":mod"),
]

# A clause fragment: words, nodes (local id, concept, word offset or None),
# internal edges, its local root, and the role attaching it to the verb.
_Fragment = tuple[tuple[str, ...], tuple[tuple[str, str, int | None], ...], tuple[tuple[str, str, str], ...], str, str]

_TIME_CLAUSES: list[_Fragment] = [
    (("before", "bed"), (("x", "before", 0), ("y", "bed", 1)), (("x", ":op1", "y"),), "x", ":time"),
    (("after", "dinner"), (("x", "after", 0), ("y", "dinner", 1)), (("x", ":op1", "y"),), "x", ":time"),
    (("in", "the", "evening"), (("x", "evening", 2),), (), "x", ":time"),
    (("late", "at", "night"), (("x", "night", 2), ("y", "late", 0)), (("x", ":mod", "y"),), "x", ":time"),
    (("before", "exercise"), (("x", "before", 0), ("y", "exercise-02", 1)), (("x", ":op1", "y"),), "x", ":time"),
    (("after", "noon"), (("x", "after", 0), ("y", "noon", 1)), (("x", ":op1", "y"),), "x", ":time"),
    (("before", "surgery"), (("x", "before", 0), ("y", "surgery", 1)), (("x", ":op1", "y"),), "x", ":time"),
]

_CONDITIONS: list[_Fragment] = [
    (
        ("if", "you", "have", "diabetes"),
        (("h", "have-03", 2), ("y", "you", 1), ("d", "diabetes", 3)),
        (("h", ":ARG0", "y"), ("h", ":ARG1", "d")),
        "h",
        ":condition",
    ),
    (
        ("if", "you", "are", "pregnant"),
        (("p", "pregnant", 3), ("y", "you", 1)),
        (("p", ":domain", "y"),),
        "p",
        ":condition",
    ),
    (
        ("if", "you", "suffer", "from", "heart", "disease"),
        (("s", "suffer-01", 2), ("y", "you", 1), ("d", "disease", 5), ("h", "heart", 4)),
        (("s", ":ARG0", "y"), ("s", ":ARG1", "d"), ("d", ":mod", "h")),
        "s",
        ":condition",
    ),
    (
        ("if", "you", "have", "high", "blood", "pressure"),
        (("h", "have-03", 2), ("y", "you", 1), ("p", "pressure", 5), ("b", "blood", 4), ("g", "high-02", 3)),
        (("h", ":ARG0", "y"), ("h", ":ARG1", "p"), ("p", ":mod", "b"), ("p", ":ARG1-of", "g")),
        "h",
        ":condition",
    ),
    (
        ("if", "you", "take", "blood", "thinners"),
        (("t", "take-01", 2), ("y", "you", 1), ("m", "thinner", 4), ("b", "blood", 3)),
        (("t", ":ARG0", "y"), ("t", ":ARG1", "m"), ("m", ":mod", "b")),
        "t",
        ":condition",
    ),
    (
        ("if", "you", "have", "kidney", "problems"),
        (("h", "have-03", 2), ("y", "you", 1), ("p", "problem", 4), ("k", "kidney", 3)),
        (("h", ":ARG0", "y"), ("h", ":ARG1", "p"), ("p", ":mod", "k")),
        "h",
        ":condition",
    ),
]


class _AdviceBuilder:
    """Accumulates words, AMR nodes and alignments for one advice sentence."""

    def __init__(self):
        self.words: list[str] = []
        self.nodes: list[AmrNode] = []
        self.edges: list[AmrEdge] = []
        self.attrs: list[AmrAttribute] = []
        self.align: list[AlignmentEntry] = []
        self._used: set[str] = set()

    def word(self, text: str) -> int:
        self.words.append(text)
        return len(self.words) - 1

    def node(self, concept: str, *word_idx: int) -> str:
        stem = concept[0].lower() if concept[0].isalpha() else "x"
        var, k = stem, 2
        while var in self._used:
            var = f"{stem}{k}"
            k += 1
        self._used.add(var)
        self.nodes.append(AmrNode(var, concept))
        for i in word_idx:
            self.align.append(AlignmentEntry(i, i + 1, var))
        return var

    def edge(self, src: str, role: str, tgt: str) -> None:
        self.edges.append(AmrEdge(src, role, tgt))

    def attr(self, owner: str, role: str, value: str) -> None:
        self.attrs.append(AmrAttribute(owner, role, value))

    def fragment(self, frag: _Fragment, head: str) -> None:
        words, nodes, edges, root, role = frag
        base = len(self.words)
        for w in words:
            self.word(w)
        local = {}
        for lid, concept, offset in nodes:
            local[lid] = self.node(concept, *(() if offset is None else (base + offset,)))
        for src, rel, tgt in edges:
            self.edge(local[src], rel, local[tgt])
        self.edge(head, role, local[root])

    def finish(self, root: str) -> tuple[str, str, str]:
        self.word(".")
        text = " ".join(self.words[:-1]) + "."
        graph = AmrGraph(tuple(self.nodes), tuple(self.edges), tuple(self.attrs), root)
        alignment = TokenAlignment(tuple(self.align), len(self.words))
        return text, serialize_penman(graph), format_alignment(alignment)


def _positive_advice(rng: random.Random, topic) -> tuple[str, str, str]:
    word, concept, verb, verb_concept = topic
    freq_word, freq_concept, freq_role = rng.choice(_FREQUENCY)
    b = _AdviceBuilder()
    v = b.node(verb_concept, b.word(verb.capitalize()))
    b.attr(v, ":mode", "imperative")
    b.edge(v, ":ARG1", b.node(concept, b.word(word)))
    b.edge(v, freq_role, b.node(freq_concept, b.word(freq_word)))
    return b.finish(v)


def _negative_advice(
    rng: random.Random,
    topic,
    subtype=None,
    tail: _Fragment | None = None,
) -> tuple[str, str, str]:
    word, concept, verb, verb_concept = topic
    form = rng.choice(("do-not", "avoid", "never", "limit"))
    b = _AdviceBuilder()
    if form == "do-not":
        b.word("Do")
        neg = b.word("not")
        v = b.node(verb_concept, neg, b.word(verb))
        b.attr(v, ":polarity", "-")
    elif form == "never":
        never = b.word("Never")
        v = b.node(verb_concept, b.word(verb))
        b.attr(v, ":polarity", "-")
        b.edge(v, ":time", b.node("ever", never))
    else:
        v = b.node("avoid-01" if form == "avoid" else "limit-01", b.word(form.capitalize()))
    b.attrs.insert(0, AmrAttribute(v, ":mode", "imperative"))
    if subtype is not None:
        sub_word, sub_concept, sub_role = subtype
        sub_idx = b.word(sub_word)
        t = b.node(concept, b.word(word))
        b.edge(t, sub_role, b.node(sub_concept, sub_idx))
    else:
        t = b.node(concept, b.word(word))
    b.edge(v, ":ARG1", t)
    if tail is not None:
        b.fragment(tail, v)
    return b.finish(v)


def _toy_pair(rng: random.Random, kind: str):
    topic = rng.choice(_TOPICS)
    if kind == "negative":
        if rng.random() < 0.5:
            first, second = _positive_advice(rng, topic), _positive_advice(rng, topic)
        else:
            first, second = _negative_advice(rng, topic), _negative_advice(rng, topic)
        return topic[0], first, second
    first = _positive_advice(rng, topic)
    if kind == "direct":
        second = _negative_advice(rng, topic)
    elif kind == "subtypical":
        second = _negative_advice(rng, topic, subtype=rng.choice(_SUBTYPES))
    elif kind == "conditional":
        second = _negative_advice(rng, topic, tail=rng.choice(_CONDITIONS))
    else:
        second = _negative_advice(rng, topic, tail=rng.choice(_TIME_CLAUSES))
    return topic[0], first, second


def generate_toy(config: ToyConfig, seed: int) -> list[DatasetRecord]:
    """Template-built conflict pairs, one conflict type per positive pair.

    Conflicts always flip polarity in advice 2: a bare flip is a direct
    conflict, a flip on a subtype ("full-fat milk") is sub-typical, and a
    flip gated by an if-clause or a time clause is conditional or temporal.
    Negatives restate the topic with the same polarity on both sides.
    Every record carries its AMR graphs and alignments.
    """
    rng = random.Random(seed)
    kinds = []
    for name in LABELS:
        kinds += [name] * getattr(config, name)
    kinds += ["negative"] * config.negatives
    rng.shuffle(kinds)

    records = []
    for i, kind in enumerate(kinds):
        topic, (text1, amr1, align1), (text2, amr2, align2) = _toy_pair(rng, kind)
        records.append(
            DatasetRecord(
                id=f"{config.id_prefix}-{config.split}-{i:05d}",
                advice1=text1,
                advice2=text2,
                topic=topic,
                labels={name: name == kind for name in LABELS},
                source=config.source,
                split=config.split,
                amr1=amr1,
                amr2=amr2,
                align1=align1,
                align2=align2,
            )
        )
    return records
