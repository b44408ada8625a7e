import dataclasses
import json

import pytest

from generators import snapshot_tree
from hcdkit.dataset import LABELS, DatasetRecord, ToyConfig, generate_toy
from hcdkit.errors import ConfigError, RecordError
from hcdkit.pipeline import PipelineConfig, packed_tokens, record_filename, run_pipeline, verify_outputs
from hcdkit.relations import RelationVocab, read_matrix
from hcdkit.tdgl import LinkedGraph


def _toy(n=10, seed=3):
    per = n // 5
    return generate_toy(ToyConfig(direct=per, subtypical=per, conditional=per, temporal=per, negatives=n - 4 * per), seed)


def _config(out, **kw):
    kw.setdefault("build_vocab_from_train", True)
    return PipelineConfig(output_dir=out, **kw)


def _moderation_record():
    return DatasetRecord(
        id="moderation",
        advice1="Consume alcohol in moderation",
        advice2="Do not drink alcoholic beverages.",
        topic="alcohol",
        labels={name: name == "direct" for name in LABELS},
        source="real",
        split="train",
        amr1="(c / consume-01 :mode imperative :ARG1 (a / alcohol) :manner (m / moderate-03))",
        amr2="(d / drink-01 :polarity - :mode imperative :ARG1 (b / beverage :mod (a / alcohol)))",
        align1="0-1|c 1-2|a 3-4|m",
        align2="1-2|d 2-3|d 3-4|a 4-5|b",
    )


def test_outputs_written(tmp_path):
    records = _toy()
    report = run_pipeline(records, _config(tmp_path))
    assert (report.processed, report.skipped, report.errored) == (10, 0, 0)
    for r in records:
        assert (tmp_path / "graphs" / f"{r.id}.json").exists()
        assert (tmp_path / "matrices" / f"{r.id}.tsv").exists()
        assert (tmp_path / "tokens" / f"{r.id}.txt").exists()
    saved = json.loads((tmp_path / "report.json").read_text())
    assert saved["input_count"] == 10 and "elapsed" not in saved
    assert [o["id"] for o in saved["records"]] == [r.id for r in records]


def test_parallel_matches_serial(tmp_path):
    records = _toy()
    r1 = run_pipeline(records, _config(tmp_path / "w1", workers=1))
    r4 = run_pipeline(records, _config(tmp_path / "w4", workers=4))
    assert r1 == r4
    assert snapshot_tree(tmp_path / "w1") == snapshot_tree(tmp_path / "w4")


def test_malformed_penman_skipped(tmp_path):
    records = _toy()
    records[4] = dataclasses.replace(records[4], amr1="(a / b :ARG0 (c / d)")
    report = run_pipeline(records, _config(tmp_path))
    assert (report.processed, report.skipped, report.errored) == (9, 1, 0)
    assert report.error_kinds == {"UnbalancedParens": 1}
    assert report.outcomes[4].status == "skipped"
    assert not (tmp_path / "graphs" / f"{records[4].id}.json").exists()


def test_unlinkable_and_missing_structure_skipped(tmp_path):
    records = _toy(5)
    records[0] = dataclasses.replace(records[0], align2="")
    records[1] = dataclasses.replace(records[1], amr2=None)
    report = run_pipeline(records, _config(tmp_path))
    assert report.skipped == 2 and report.processed == 3
    assert report.error_kinds == {"MissingStructure": 1, "TopicUnalignable": 1}


def test_fail_fast_names_record(tmp_path):
    records = _toy()
    records[2] = dataclasses.replace(records[2], align1="0-99|x")
    with pytest.raises(RecordError) as info:
        run_pipeline(records, _config(tmp_path, fail_fast=True))
    assert info.value.record_id == records[2].id


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        run_pipeline([], PipelineConfig(output_dir=tmp_path))
    with pytest.raises(ConfigError):
        run_pipeline([], _config(tmp_path, vocab_path=tmp_path / "v.txt"))
    with pytest.raises(ConfigError):
        run_pipeline([], _config(tmp_path, workers=0))
    with pytest.raises(ConfigError):
        run_pipeline([], _config(tmp_path, similarity="embedding"))
    with pytest.raises(ConfigError):
        run_pipeline([], _config(tmp_path, vocab_path=tmp_path / "missing.txt", build_vocab_from_train=False))
    dup = _toy(5)
    dup[1] = dataclasses.replace(dup[1], id=dup[0].id)
    with pytest.raises(ConfigError):
        run_pipeline(dup, _config(tmp_path))


def test_vocab_file_source(tmp_path):
    records = _toy()
    run_pipeline(records, _config(tmp_path / "a"))
    vocab = tmp_path / "a" / "vocab.txt"
    run_pipeline(records, PipelineConfig(output_dir=tmp_path / "b", vocab_path=vocab))
    assert snapshot_tree(tmp_path / "a") == snapshot_tree(tmp_path / "b")


def test_moderation_record_has_one_conflict_edge(tmp_path):
    report = run_pipeline([_moderation_record()], _config(tmp_path))
    assert report.processed == 1
    lg = LinkedGraph.from_json((tmp_path / "graphs" / "moderation.json").read_text())
    conflicts = [e for e in lg.edges if e.relation == ":conflict"]
    assert len(conflicts) == 1
    assert (conflicts[0].source, conflicts[0].target) == ("a", "a_2")
    vocab = RelationVocab.load(tmp_path / "vocab.txt")
    m = read_matrix((tmp_path / "matrices" / "moderation.tsv").read_text(), vocab)
    tokens = (tmp_path / "tokens" / "moderation.txt").read_text().splitlines()
    assert tokens[0] == "[CLS]" and tokens.count("[SEP]") == 2
    assert m.size == len(tokens)
    # "alcoholic" is over the default threshold and packs as two pieces
    i, j = tokens.index("alcohol"), tokens.index("alcoh")
    assert tokens[j + 1] == "##olic"
    labels = m.labels(vocab)
    assert labels[i][j] == labels[i][j + 1] == labels[j + 1][i] == ":conflict"


def test_verify_outputs(tmp_path):
    records = _toy(20) + [_moderation_record()]
    run_pipeline(records, _config(tmp_path))
    assert verify_outputs(tmp_path, records) == []
    path = tmp_path / "matrices" / f"{records[0].id}.tsv"
    lines = path.read_text().splitlines()
    i, j, _ = lines[1].split("\t")
    lines[1] = f"{i}\t{j}\t3"
    path.write_text("\n".join(lines) + "\n")
    assert verify_outputs(tmp_path, records) == [records[0].id]


def test_custom_markers_and_threshold(tmp_path):
    run_pipeline([_moderation_record()], _config(tmp_path, cls_token="<s>", sep_token="</s>", subtoken_threshold=4))
    tokens = (tmp_path / "tokens" / "moderation.txt").read_text().splitlines()
    assert tokens[0] == "<s>" and tokens[-1] == "</s>"
    assert tokens[tokens.index("alco") + 1] == "##hol"


def test_packed_tokens_and_filenames():
    assert packed_tokens(["a", "bbbb"], ["c"], [1, 2], [1]) == ["[CLS]", "a", "bb", "##bb", "[SEP]", "c", "[SEP]"]
    assert record_filename("a/b c") == "a_b_c"
