"""Command-line entry point: ``hcdkit <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from hcdkit.alignment import concepts_for_token, parse_alignment
from hcdkit.amr import parse_penman, serialize_penman, validate
from hcdkit.baseline import evaluate, run_baseline
from hcdkit.dataset import LABELS, ToyConfig, dataset_stats, generate_toy, load_records, records_to_jsonl
from hcdkit.errors import HcdError
from hcdkit.pipeline import PipelineConfig, parse_record, run_pipeline, vocab_from_train
from hcdkit.relations import RelationVocab, SubtokenMap, build_matrix, naive_subtoken_counts, serialize_matrix
from hcdkit.tdgl import SIMILARITY_KINDS, SimilarityProvider, link_graphs
from hcdkit.text import tokenize


def _read_text(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _provider(args) -> SimilarityProvider:
    if args.similarity == "embedding":
        if not args.embeddings:
            raise SystemExit("--similarity embedding needs --embeddings FILE")
        return SimilarityProvider.from_embedding_file(args.embeddings)
    return SimilarityProvider(args.similarity)


def _find_record(path: str, record_id: str | None):
    records = load_records(path)
    if not records:
        raise SystemExit(f"{path}: no records")
    if record_id is None:
        return records[0]
    for r in records:
        if r.id == record_id:
            return r
    raise SystemExit(f"{path}: no record with id {record_id!r}")


# --- subcommands -------------------------------------------------------------


def cmd_parse(args) -> int:
    graph = parse_penman(_read_text(args.file))
    problems = validate(graph)
    for p in problems:
        print(p, file=sys.stderr)
    if args.json:
        print(json.dumps({
            "root": graph.root,
            "nodes": [[n.variable, n.concept] for n in graph.nodes],
            "edges": [list(e.as_tuple()) for e in graph.edges],
            "attributes": [list(a.as_tuple()) for a in graph.attributes],
        }, indent=2))
    else:
        print(serialize_penman(graph, indent=args.indent))
    return 1 if problems else 0


def cmd_align_check(args) -> int:
    graph = parse_penman(_read_text(args.amr))
    tokens = tokenize(args.text)
    alignment = parse_alignment(args.alignment, graph, len(tokens))
    for i, tok in enumerate(tokens):
        concepts = concepts_for_token(alignment, i)
        shown = ", ".join(f"{v}/{graph.concept(v)}" for v in concepts) or "-"
        print(f"{i:>3}  {tok:<20} {shown}")
    return 0


def cmd_link(args) -> int:
    r = _find_record(args.records, args.id)
    p = parse_record(r)
    lg = link_graphs(p.g1, p.a1, p.tokens1, p.g2, p.a2, p.tokens2, r.topic, _provider(args), args.min_score)
    _write(lg.to_penman() + "\n" if args.penman else lg.to_json(), args.output)
    return 0


def cmd_matrix(args) -> int:
    records = load_records(args.records)
    r = _find_record(args.records, args.id)
    vocab = RelationVocab.load(args.vocab) if args.vocab else vocab_from_train(records)
    p = parse_record(r)
    lg = link_graphs(p.g1, p.a1, p.tokens1, p.g2, p.a2, p.tokens2, r.topic, _provider(args), args.min_score)
    sm = SubtokenMap.from_counts(
        naive_subtoken_counts(p.tokens1, args.subtoken_threshold),
        naive_subtoken_counts(p.tokens2, args.subtoken_threshold),
    )
    _write(serialize_matrix(build_matrix(lg, p.a1, p.a2, sm, vocab), vocab), args.output)
    return 0


def cmd_vocab(args) -> int:
    _write(vocab_from_train(load_records(args.records)).to_text(), args.output)
    return 0


def cmd_gen_toy(args) -> int:
    if args.config:
        config = ToyConfig.from_json_file(args.config)
    else:
        config = ToyConfig(
            direct=args.direct,
            subtypical=args.subtypical,
            conditional=args.conditional,
            temporal=args.temporal,
            negatives=args.negatives,
            split=args.split,
            id_prefix=args.id_prefix,
        )
    _write(records_to_jsonl(generate_toy(config, args.seed)), args.output)
    return 0


def cmd_stats(args) -> int:
    stats = dataset_stats(load_records(args.records))
    print(json.dumps(stats.to_dict(), indent=2) if args.json else stats.to_text())
    return 0


def cmd_train_baseline(args) -> int:
    train = [r for r in load_records(args.train) if r.split == "train"]
    test = [r for r in load_records(args.test) if r.split == "test"]
    if not train or not test:
        raise SystemExit("need train-split records in --train and test-split records in --test")
    report = run_baseline(train, test, seeds=range(args.seed, args.seed + args.runs), epochs=args.epochs)
    if args.output:
        Path(args.output).write_text(report.to_json(), encoding="utf-8")
    print(report.to_text())
    return 0


def cmd_eval(args) -> int:
    gold = {r.id: r for r in load_records(args.gold)}
    preds, golds = [], []
    for lineno, line in enumerate(_read_text(args.predictions).splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj["id"] not in gold:
            raise SystemExit(f"line {lineno}: unknown id {obj['id']!r}")
        preds.append([bool(obj["labels"][name]) for name in LABELS])
        golds.append(gold[obj["id"]].label_vector())
    metrics = evaluate(preds, golds)
    if args.json:
        print(json.dumps(metrics.to_dict(), indent=2))
    else:
        print(f"{'label':<14}{'P':>8}{'R':>8}{'F1':>8}{'support':>9}")
        for name, m in metrics.per_label.items():
            print(f"{name:<14}{m.precision:>8.3f}{m.recall:>8.3f}{m.f1:>8.3f}{m.support:>9}")
        print(f"{'weighted F1':<14}{metrics.weighted_f1:>24.3f}")
    return 0


def cmd_run(args) -> int:
    config = PipelineConfig(
        output_dir=Path(args.output),
        similarity=args.similarity,
        embedding_path=args.embeddings,
        vocab_path=args.vocab,
        build_vocab_from_train=args.build_vocab,
        workers=args.workers,
        fail_fast=args.fail_fast,
        min_score=args.min_score,
        cls_token=args.cls_token,
        sep_token=args.sep_token,
        subtoken_threshold=args.subtoken_threshold,
    )
    report = run_pipeline(load_records(args.records), config)
    print(
        f"processed={report.processed} skipped={report.skipped} errored={report.errored} "
        f"elapsed={report.elapsed:.2f}s"
    )
    return 0 if report.errored == 0 else 1


# --- argument parsing --------------------------------------------------------


def _add_similarity(p: argparse.ArgumentParser) -> None:
    p.add_argument("--similarity", choices=SIMILARITY_KINDS, default="trigram")
    p.add_argument("--embeddings", help="word-vector file for --similarity embedding")
    p.add_argument("--min-score", type=float, default=0.0, help="minimum topic similarity to link")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcdkit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse, validate and re-serialize a PENMAN graph")
    p.add_argument("file", help="PENMAN file, or - for stdin")
    p.add_argument("--indent", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("align-check", help="show which concepts each word aligns to")
    p.add_argument("--amr", required=True, help="PENMAN file")
    p.add_argument("--text", required=True, help="advice text")
    p.add_argument("--alignment", required=True, help='alignment spec, e.g. "0-1|c 1-2|a"')
    p.set_defaults(func=cmd_align_check)

    p = sub.add_parser("link", help="topic-link the two graphs of one record")
    p.add_argument("records")
    p.add_argument("--id")
    p.add_argument("--penman", action="store_true", help="lossy PENMAN view instead of JSON")
    p.add_argument("-o", "--output")
    _add_similarity(p)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("matrix", help="relation matrix of one record as a sparse stream")
    p.add_argument("records")
    p.add_argument("--id")
    p.add_argument("--vocab", help="vocabulary file (default: built from the train split)")
    p.add_argument("--subtoken-threshold", type=int, default=8)
    p.add_argument("-o", "--output")
    _add_similarity(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("vocab", help="relation vocabulary from the train split")
    p.add_argument("records")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("gen-toy", help="generate template conflict pairs")
    for name in (*LABELS, "negatives"):
        p.add_argument(f"--{name}", type=int, default=0)
    p.add_argument("--split", choices=("train", "test"), default="train")
    p.add_argument("--id-prefix", default="toy")
    p.add_argument("--config", help="JSON file with the same keys as the flags; replaces them")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_toy)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("records")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train-baseline", help="TF-IDF one-vs-all baseline vs random guess")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--runs", type=int, default=3, help="number of seeds (5 for the longer protocol)")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("-o", "--output", help="write the JSON report here")
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("eval", help="score a predictions JSONL file against gold records")
    p.add_argument("--predictions", required=True, help='JSONL of {"id": ..., "labels": {...}}')
    p.add_argument("--gold", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="full pipeline over a record file")
    p.add_argument("records")
    p.add_argument("-o", "--output", required=True, help="output directory")
    vocab = p.add_mutually_exclusive_group()
    vocab.add_argument("--vocab", type=Path)
    vocab.add_argument("--build-vocab", action="store_true", help="build the vocabulary from the train split")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--fail-fast", action="store_true")
    p.add_argument("--cls-token", default="[CLS]")
    p.add_argument("--sep-token", default="[SEP]")
    p.add_argument("--subtoken-threshold", type=int, default=8)
    _add_similarity(p)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except HcdError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
