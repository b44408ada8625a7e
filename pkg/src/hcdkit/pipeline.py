"""Batch processing: records -> linked graphs and relation matrices on disk.

Output tree under ``output_dir``::

    vocab.txt               relation vocabulary, one label per line
    graphs/<id>.json        linked graph
    matrices/<id>.tsv       sparse relation matrix
    tokens/<id>.txt         packed subtoken sequence, one per line
    report.json             counts and per-record outcomes, in input order

Every file is a pure function of the inputs, so the tree is identical for
any number of workers.
"""

from __future__ import annotations

import json
import logging
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

from hcdkit.alignment import TokenAlignment, parse_alignment
from hcdkit.amr import AmrGraph, parse_penman
from hcdkit.dataset import DatasetRecord
from hcdkit.errors import ConfigError, HcdError, MissingStructure, RecordError
from hcdkit.relations import (
    RelationVocab,
    SubtokenMap,
    build_matrix,
    build_vocab,
    naive_subtoken_counts,
    read_matrix,
    serialize_matrix,
)
from hcdkit.tdgl import SIMILARITY_KINDS, LinkedGraph, SimilarityProvider, link_graphs
from hcdkit.text import tokenize

log = logging.getLogger(__name__)

Subtokenizer = Callable[[Sequence[str]], list[int]]


@dataclass
class PipelineConfig:
    output_dir: Path
    similarity: str = "trigram"
    embedding_path: Path | None = None
    vocab_path: Path | None = None
    build_vocab_from_train: bool = False
    workers: int = 1
    fail_fast: bool = False
    min_score: float = 0.0
    cls_token: str = "[CLS]"
    sep_token: str = "[SEP]"
    subtoken_threshold: int = 8

    def check(self) -> None:
        if (self.vocab_path is None) == (not self.build_vocab_from_train):
            raise ConfigError("configure exactly one vocabulary source: a vocab file or build-from-train")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.similarity not in SIMILARITY_KINDS:
            raise ConfigError(f"similarity must be one of {SIMILARITY_KINDS}")
        if self.similarity == "embedding" and self.embedding_path is None:
            raise ConfigError("embedding similarity needs an embedding file")
        if self.vocab_path is not None and not Path(self.vocab_path).is_file():
            raise ConfigError(f"vocabulary file not found: {self.vocab_path}")


@dataclass
class RecordOutcome:
    id: str
    status: str  # processed | skipped | errored
    error: str | None = None
    message: str | None = None

    def to_dict(self) -> dict:
        d = {"id": self.id, "status": self.status}
        if self.error:
            d["error"] = self.error
            d["message"] = self.message
        return d


@dataclass
class PipelineReport:
    processed: int = 0
    skipped: int = 0
    errored: int = 0
    error_kinds: dict[str, int] = field(default_factory=dict)
    outcomes: list[RecordOutcome] = field(default_factory=list)
    elapsed: float = field(default=0.0, compare=False)

    @property
    def total(self) -> int:
        return self.processed + self.skipped + self.errored

    def to_dict(self) -> dict:
        # elapsed time is left out so report.json stays reproducible
        return {
            "input_count": self.total,
            "processed": self.processed,
            "skipped": self.skipped,
            "errored": self.errored,
            "error_kinds": dict(sorted(self.error_kinds.items())),
            "records": [o.to_dict() for o in self.outcomes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


def record_filename(record_id: str) -> str:
    return _UNSAFE.sub("_", record_id)


@dataclass(frozen=True)
class _Context:
    out: Path
    vocab: RelationVocab
    provider: SimilarityProvider
    min_score: float
    cls_token: str
    sep_token: str
    subtokenizer: Subtokenizer


@dataclass
class PairInputs:
    """Parsed structure of one record, ready for linking."""

    g1: AmrGraph
    g2: AmrGraph
    a1: TokenAlignment
    a2: TokenAlignment
    tokens1: list[str]
    tokens2: list[str]


def parse_record(record: DatasetRecord) -> PairInputs:
    if not record.has_structure():
        raise MissingStructure(f"record {record.id!r} needs amr1, amr2, align1 and align2")
    tokens1, tokens2 = tokenize(record.advice1), tokenize(record.advice2)
    g1, g2 = parse_penman(record.amr1), parse_penman(record.amr2)
    a1 = parse_alignment(record.align1, g1, len(tokens1))
    a2 = parse_alignment(record.align2, g2, len(tokens2))
    return PairInputs(g1, g2, a1, a2, tokens1, tokens2)


def packed_tokens(tokens1, tokens2, counts1, counts2, cls_token="[CLS]", sep_token="[SEP]") -> list[str]:
    out = [cls_token]
    for words, counts in ((tokens1, counts1), (tokens2, counts2)):
        for w, c in zip(words, counts):
            if c == 1:
                out.append(w)
            else:
                # even split for display; matrix cells only depend on the counts
                step = -(-len(w) // c)
                out.extend(("##" if k else "") + w[k * step : (k + 1) * step] for k in range(c))
        out.append(sep_token)
    return out


def _process(ctx: _Context, record: DatasetRecord) -> RecordOutcome:
    try:
        p = parse_record(record)
        lg = link_graphs(p.g1, p.a1, p.tokens1, p.g2, p.a2, p.tokens2, record.topic, ctx.provider, ctx.min_score)
        counts1, counts2 = ctx.subtokenizer(p.tokens1), ctx.subtokenizer(p.tokens2)
        sm = SubtokenMap.from_counts(counts1, counts2)
        matrix = build_matrix(lg, p.a1, p.a2, sm, ctx.vocab)
    except HcdError as exc:
        return RecordOutcome(record.id, "skipped", type(exc).__name__, str(exc))
    except Exception as exc:  # noqa: BLE001 - tallied as an unexpected failure
        return RecordOutcome(record.id, "errored", type(exc).__name__, str(exc))

    name = record_filename(record.id)
    (ctx.out / "graphs" / f"{name}.json").write_text(lg.to_json(), encoding="utf-8")
    (ctx.out / "matrices" / f"{name}.tsv").write_text(serialize_matrix(matrix, ctx.vocab), encoding="utf-8")
    packed = packed_tokens(p.tokens1, p.tokens2, counts1, counts2, ctx.cls_token, ctx.sep_token)
    (ctx.out / "tokens" / f"{name}.txt").write_text("".join(t + "\n" for t in packed), encoding="utf-8")
    return RecordOutcome(record.id, "processed")


def vocab_from_train(records: Sequence[DatasetRecord]) -> RelationVocab:
    """Vocabulary over the train-split graphs that parse; others are ignored here."""
    graphs = []
    for r in records:
        if r.split != "train":
            continue
        for text in (r.amr1, r.amr2):
            if text is None:
                continue
            try:
                graphs.append(parse_penman(text))
            except HcdError:
                continue
    return build_vocab(graphs)


def run_pipeline(
    records: Sequence[DatasetRecord],
    config: PipelineConfig,
    subtokenizer: Subtokenizer | None = None,
) -> PipelineReport:
    """Link and matrix-encode every record, writing the output tree.

    In skip mode, records failing with a domain error (bad PENMAN, bad
    alignment, unlinkable topic, missing structure) are counted as skipped
    and any other exception as errored.  With ``fail_fast`` the first
    failure in input order raises :class:`RecordError`.
    """
    started = time.perf_counter()
    config.check()
    names = [record_filename(r.id) for r in records]
    if len(set(names)) != len(names):
        raise ConfigError("record ids must be unique (after filename sanitizing)")

    vocab = RelationVocab.load(config.vocab_path) if config.vocab_path else vocab_from_train(records)
    if config.similarity == "embedding":
        provider = SimilarityProvider.from_embedding_file(config.embedding_path)
    else:
        provider = SimilarityProvider(config.similarity)

    out = Path(config.output_dir)
    for sub in ("graphs", "matrices", "tokens"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    vocab.save(out / "vocab.txt")

    ctx = _Context(
        out=out,
        vocab=vocab,
        provider=provider,
        min_score=config.min_score,
        cls_token=config.cls_token,
        sep_token=config.sep_token,
        subtokenizer=subtokenizer or partial(naive_subtoken_counts, threshold=config.subtoken_threshold),
    )
    work = partial(_process, ctx)

    report = PipelineReport()
    if config.workers == 1:
        results = map(work, records)
        _collect(results, records, config, report)
    else:
        chunk = max(1, len(records) // (config.workers * 4))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            _collect(pool.map(work, records, chunksize=chunk), records, config, report)

    report.elapsed = time.perf_counter() - started
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    log.info(
        "processed=%d skipped=%d errored=%d in %.2fs",
        report.processed,
        report.skipped,
        report.errored,
        report.elapsed,
    )
    return report


def _collect(results, records, config: PipelineConfig, report: PipelineReport) -> None:
    for record, outcome in zip(records, results):
        report.outcomes.append(outcome)
        if outcome.status == "processed":
            report.processed += 1
            continue
        if config.fail_fast:
            raise RecordError(record.id, outcome.error, outcome.message)
        log.warning("%s %s: %s: %s", outcome.status, record.id, outcome.error, outcome.message)
        report.error_kinds[outcome.error] = report.error_kinds.get(outcome.error, 0) + 1
        if outcome.status == "skipped":
            report.skipped += 1
        else:
            report.errored += 1


def verify_outputs(
    output_dir: str | Path,
    records: Sequence[DatasetRecord],
    subtokenizer: Subtokenizer | None = None,
    subtoken_threshold: int = 8,
) -> list[str]:
    """Re-derive each emitted matrix from its emitted linked graph.

    Returns the ids whose matrix file differs from the re-derivation.
    """
    out = Path(output_dir)
    vocab = RelationVocab.load(out / "vocab.txt")
    subtokenizer = subtokenizer or partial(naive_subtoken_counts, threshold=subtoken_threshold)
    mismatched = []
    for r in records:
        name = record_filename(r.id)
        graph_file = out / "graphs" / f"{name}.json"
        if not graph_file.exists():
            continue
        lg = LinkedGraph.from_json(graph_file.read_text(encoding="utf-8"))
        g1, g2 = lg.split()
        tokens1, tokens2 = tokenize(r.advice1), tokenize(r.advice2)
        a1 = parse_alignment(r.align1, g1, len(tokens1))
        a2 = parse_alignment(r.align2, g2, len(tokens2))
        sm = SubtokenMap.from_counts(subtokenizer(tokens1), subtokenizer(tokens2))
        rebuilt = build_matrix(lg, a1, a2, sm, vocab)
        stored = read_matrix((out / "matrices" / f"{name}.tsv").read_text(encoding="utf-8"), vocab)
        if rebuilt != stored:
            mismatched.append(r.id)
    return mismatched
