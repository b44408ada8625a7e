"""Lexical baseline and the evaluation protocol.

The baseline vectorizes each advice with TF-IDF fitted on the training
split, concatenates the two advice vectors, and trains one class-weighted
logistic classifier per conflict type.  Scores are positive-class
precision/recall/F1 per label plus support-weighted F1, averaged over
several seeds.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from hcdkit.dataset import LABELS, DatasetRecord
from hcdkit.errors import DegenerateLabel, EmptyCorpus, EmptyList, LengthMismatch

_SPLIT_RE = re.compile(r"[^0-9a-z]+")


def analyze(text: str) -> list[str]:
    return [t for t in _SPLIT_RE.split(text.casefold()) if t]


# ---------------------------------------------------------------------------
# TF-IDF
# ---------------------------------------------------------------------------


@dataclass
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    n_documents: int

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def transform(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for term, count in Counter(analyze(text)).items():
            col = self.vocabulary.get(term)
            if col is not None:
                vec[col] = count * self.idf[col]
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec


def fit_tfidf(train_records: Sequence[DatasetRecord]) -> TfidfModel:
    """Fit on both advice texts of every training record.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1 over the N training advice texts.
    """
    docs = [text for r in train_records for text in (r.advice1, r.advice2)]
    return fit_tfidf_documents(docs)


def fit_tfidf_documents(docs: Sequence[str]) -> TfidfModel:
    if not docs:
        raise EmptyCorpus("cannot fit TF-IDF on an empty corpus")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(analyze(doc)))
    terms = sorted(df)
    n = len(docs)
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in terms])
    return TfidfModel({t: i for i, t in enumerate(terms)}, idf, n)


def vectorize_pair(m: TfidfModel, r: DatasetRecord) -> np.ndarray:
    return np.concatenate([m.transform(r.advice1), m.transform(r.advice2)])


def vectorize_records(m: TfidfModel, records: Sequence[DatasetRecord]) -> np.ndarray:
    if not records:
        return np.zeros((0, 2 * m.dim))
    return np.stack([vectorize_pair(m, r) for r in records])


def label_matrix(records: Sequence[DatasetRecord]) -> np.ndarray:
    return np.array([r.label_vector() for r in records], dtype=bool).reshape(len(records), len(LABELS))


# ---------------------------------------------------------------------------
# one-vs-all logistic regression
# ---------------------------------------------------------------------------


def class_weights(y: np.ndarray) -> tuple[float, float]:
    """(positive, negative) loss weights, inversely proportional to class frequency."""
    n = len(y)
    pos = int(np.count_nonzero(y))
    return n / (2.0 * pos), n / (2.0 * (n - pos))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class OvaClassifier:
    weights: np.ndarray  # (n_labels, n_features)
    bias: np.ndarray  # (n_labels,)
    class_weights: list[tuple[float, float]]
    label_names: tuple[str, ...] = LABELS
    epochs: int = 100
    step_size: float = 0.5
    batch_size: int = 32
    l2: float = 1e-4
    seed: int = 0

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        return np.asarray(features) @ self.weights.T + self.bias

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_function(features))

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.decision_function(features) >= 0.0


def train_ova(
    features: np.ndarray,
    labels: np.ndarray,
    seed: int,
    *,
    label_names: Sequence[str] = LABELS,
    epochs: int = 100,
    step_size: float = 0.5,
    batch_size: int = 32,
    l2: float = 1e-4,
) -> OvaClassifier:
    """Mini-batch gradient descent on class-weighted logistic loss, one model per label."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise LengthMismatch(f"{x.shape[0]} feature rows but {y.shape[0]} label rows")
    if len(label_names) < y.shape[1]:
        raise LengthMismatch(f"{len(label_names)} label names for {y.shape[1]} label columns")
    label_names = tuple(label_names)[: y.shape[1]]
    n, d = x.shape

    cws = []
    for k, name in enumerate(label_names):
        pos = int(np.count_nonzero(y[:, k]))
        if pos == 0 or pos == n:
            raise DegenerateLabel(name, pos, n)
        cws.append(class_weights(y[:, k]))

    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 0.01, size=(y.shape[1], d))
    b = np.zeros(y.shape[1])
    yf = y.astype(np.float64)
    sample_w = np.where(y, [c[0] for c in cws], [c[1] for c in cws])

    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xb = x[idx]
            err = (_sigmoid(xb @ w.T + b) - yf[idx]) * sample_w[idx]  # (batch, labels)
            w -= step_size * (err.T @ xb / len(idx) + l2 * w)
            b -= step_size * err.mean(axis=0)

    return OvaClassifier(w, b, cws, label_names, epochs, step_size, batch_size, l2, seed)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabelMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    tp: int
    fp: int
    fn: int

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1, "support": self.support}


@dataclass(frozen=True)
class Metrics:
    per_label: dict[str, LabelMetrics]
    weighted_f1: float

    def __getitem__(self, label: str) -> LabelMetrics:
        return self.per_label[label]

    def flat(self) -> dict[str, float]:
        out = {}
        for name, m in self.per_label.items():
            out[f"{name}/precision"] = m.precision
            out[f"{name}/recall"] = m.recall
            out[f"{name}/f1"] = m.f1
        out["weighted_f1"] = self.weighted_f1
        return out

    def to_dict(self) -> dict:
        return {"per_label": {k: v.to_dict() for k, v in self.per_label.items()}, "weighted_f1": self.weighted_f1}


def binary_metrics(preds, golds) -> LabelMetrics:
    p = np.asarray(preds, dtype=bool)
    g = np.asarray(golds, dtype=bool)
    if p.shape != g.shape:
        raise LengthMismatch(f"predictions {p.shape} vs gold {g.shape}")
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return LabelMetrics(precision, recall, f1, tp + fn, tp, fp, fn)


def evaluate(preds, golds, label_names: Sequence[str] | None = None) -> Metrics:
    """Positive-class P/R/F1 per label and support-weighted F1.

    1-D inputs are a single label named ``"positive"``.
    """
    p = np.asarray(preds, dtype=bool)
    g = np.asarray(golds, dtype=bool)
    if p.shape != g.shape:
        raise LengthMismatch(f"predictions {p.shape} vs gold {g.shape}")
    if p.ndim == 1:
        p, g = p[:, None], g[:, None]
        names = ("positive",) if label_names is None else tuple(label_names)
    else:
        names = LABELS[: p.shape[1]] if label_names is None else tuple(label_names)
    if len(names) != p.shape[1]:
        raise LengthMismatch(f"{len(names)} label names for {p.shape[1]} columns")
    per_label = {name: binary_metrics(p[:, k], g[:, k]) for k, name in enumerate(names)}
    total = sum(m.support for m in per_label.values())
    weighted = sum(m.support * m.f1 for m in per_label.values()) / total if total else 0.0
    return Metrics(per_label, weighted)


def random_guess(labels, positive_rate, seed: int) -> np.ndarray:
    """Independent draws shaped like ``labels``; ``positive_rate`` may be per column."""
    shape = np.shape(labels)
    rate = np.asarray(positive_rate, dtype=np.float64)
    if np.any(rate < 0) or np.any(rate > 1):
        raise ValueError("positive rate must be within [0, 1]")
    return np.random.default_rng(seed).random(shape) < rate


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunAggregate:
    mean: dict[str, float]
    std: dict[str, float]
    k: int

    def to_dict(self) -> dict:
        return {"k": self.k, "mean": self.mean, "std": self.std}


def aggregate_runs(runs: Sequence[Mapping[str, float] | float | Metrics]) -> RunAggregate:
    """Mean and population standard deviation of every metric across runs.

    Sums use ``math.fsum`` so the result does not depend on run order.
    """
    if not runs:
        raise EmptyList("no runs to aggregate")
    rows = []
    for run in runs:
        if isinstance(run, Metrics):
            rows.append(run.flat())
        elif isinstance(run, Mapping):
            rows.append(dict(run))
        else:
            rows.append({"value": float(run)})
    keys = list(rows[0])
    k = len(rows)
    mean, std = {}, {}
    for key in keys:
        values = [row[key] for row in rows]
        mu = math.fsum(values) / k
        mean[key] = mu
        std[key] = math.sqrt(math.fsum((v - mu) ** 2 for v in values) / k)
    return RunAggregate(mean, std, k)


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------


@dataclass
class BaselineReport:
    seeds: list[int]
    runs: dict[str, list[Metrics]] = field(default_factory=dict)  # system -> per-seed metrics
    n_train: int = 0
    n_test: int = 0

    def aggregates(self) -> dict[str, RunAggregate]:
        return {system: aggregate_runs(ms) for system, ms in self.runs.items()}

    def to_dict(self) -> dict:
        return {
            "seeds": self.seeds,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "systems": {
                system: {"runs": [m.to_dict() for m in ms], "aggregate": aggregate_runs(ms).to_dict()}
                for system, ms in self.runs.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        cols = [*LABELS, "weighted"]
        header = f"{'system':<16}" + "".join(f"{c:>18}" for c in cols)
        lines = [f"F1 mean/std over {len(self.seeds)} seeds; train={self.n_train} test={self.n_test}", header]
        for system, agg in self.aggregates().items():
            cells = []
            for c in cols:
                key = "weighted_f1" if c == "weighted" else f"{c}/f1"
                cells.append(f"{agg.mean[key]:.3f}/{agg.std[key]:.3f}".rjust(18))
            lines.append(f"{system:<16}" + "".join(cells))
        return "\n".join(lines)


def run_baseline(
    train: Sequence[DatasetRecord],
    test: Sequence[DatasetRecord],
    seeds: Iterable[int] = (0, 1, 2),
    **train_kwargs,
) -> BaselineReport:
    """TF-IDF one-vs-all and random guess on ``test``, one run per seed."""
    seeds = list(seeds)
    model = fit_tfidf(train)
    x_train, y_train = vectorize_records(model, train), label_matrix(train)
    x_test, y_test = vectorize_records(model, test), label_matrix(test)
    rate = y_train.mean(axis=0)

    report = BaselineReport(seeds, {"tfidf-ova": [], "random-guess": []}, len(train), len(test))
    for seed in seeds:
        clf = train_ova(x_train, y_train, seed, **train_kwargs)
        report.runs["tfidf-ova"].append(evaluate(clf.predict(x_test), y_test))
        report.runs["random-guess"].append(evaluate(random_guess(y_test, rate, seed), y_test))
    return report
