"""Topic-code evaluation of ranking runs and annotation reporting.

Each query's prediction is the top-level topic of its top-1 candidate;
the truth is the query's own top-level topic. Precision/recall/F1 are
macro-averaged over the classes present in truth or prediction (weighted
averaging is available behind a flag). Micro-F1 equals accuracy for this
single-label setup and is kept as an internal oracle for the macro code.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import Corpus
from .errors import (
    EmptyRun,
    MissingTopic,
    NoAnnotations,
    SampleTooLarge,
)
from .pipeline import RankingRun

LABELS = ("1", "1a", "2", "3")


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Metrics:
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    per_class: dict[str, ClassMetrics]
    averaging: str = "macro"
    n_queries: int = 0


def metrics_from_pairs(truths: list[str], predictions: list[str],
                       averaging: str = "macro") -> Metrics:
    """Multi-class P/R/F1 plus accuracy from aligned label lists."""
    if len(truths) != len(predictions):
        raise ValueError("truth and prediction lists differ in length")
    if not truths:
        raise EmptyRun("no predictions to evaluate")
    if averaging not in ("macro", "weighted"):
        raise ValueError(f"unknown averaging {averaging!r}")

    classes = sorted(set(truths) | set(predictions))
    per_class: dict[str, ClassMetrics] = {}
    correct = sum(t == p for t, p in zip(truths, predictions))
    for cls in classes:
        tp = sum(1 for t, p in zip(truths, predictions) if t == cls and p == cls)
        fp = sum(1 for t, p in zip(truths, predictions) if t != cls and p == cls)
        fn = sum(1 for t, p in zip(truths, predictions) if t == cls and p != cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = ClassMetrics(precision, recall, f1, support=tp + fn)

    if averaging == "macro":
        weights_by_class = {cls: 1.0 for cls in classes}
    else:
        total_support = sum(m.support for m in per_class.values())
        weights_by_class = {
            cls: per_class[cls].support / total_support for cls in classes
        }
    wsum = sum(weights_by_class.values())
    return Metrics(
        macro_precision=sum(per_class[c].precision * weights_by_class[c]
                            for c in classes) / wsum,
        macro_recall=sum(per_class[c].recall * weights_by_class[c]
                         for c in classes) / wsum,
        macro_f1=sum(per_class[c].f1 * weights_by_class[c]
                     for c in classes) / wsum,
        accuracy=correct / len(truths),
        per_class=per_class,
        averaging=averaging,
        n_queries=len(truths),
    )


def _topic_pairs(run: RankingRun, corpus: Corpus) -> tuple[list[str], list[str]]:
    if not run.per_query:
        raise EmptyRun(f"run {run.run_id!r} has no queries")
    truths, predictions = [], []
    for qid in run.queries():
        ranked = run.per_query[qid]
        if not ranked:
            raise EmptyRun(f"query {qid!r} has no candidates")
        top1 = ranked[0][0]
        for ident in (qid, top1):
            q = corpus.get(ident)
            if q is None or not q.topic.top_level:
                raise MissingTopic(ident)
        truths.append(corpus[qid].topic.top_level)
        predictions.append(corpus[top1].topic.top_level)
    return truths, predictions


def topic_match_metrics(run: RankingRun, corpus: Corpus,
                        averaging: str = "macro") -> Metrics:
    """Evaluate a run by top-level topic agreement of each query's top-1."""
    truths, predictions = _topic_pairs(run, corpus)
    return metrics_from_pairs(truths, predictions, averaging)


def micro_f1(run: RankingRun, corpus: Corpus) -> float:
    """Micro-averaged F1; equals accuracy for single-label predictions."""
    truths, predictions = _topic_pairs(run, corpus)
    tp = sum(1 for t, p in zip(truths, predictions) if t == p)
    fp = sum(1 for t, p in zip(truths, predictions) if t != p)
    fn = fp  # every wrong single-label prediction is one fp and one fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


def sample_for_review(run: RankingRun, n: int,
                      seed: int) -> list[tuple[str, str]]:
    """n distinct (query, top-1) pairs, order fixed by a seeded shuffle."""
    pairs = [(qid, run.per_query[qid][0][0])
             for qid in run.queries() if run.per_query[qid]]
    if n > len(pairs):
        raise SampleTooLarge(f"requested {n} of {len(pairs)} pairs")
    rng = random.Random(seed)
    rng.shuffle(pairs)
    return pairs[:n]


def label_distribution(labels: list[str]) -> dict[str, float]:
    """Percentage of each label in {1, 1a, 2, 3}, to two decimal places.

    Hundredths are apportioned by largest remainder so the four figures
    always sum to exactly 100.00; independent rounding can drift by 0.02.
    """
    if not labels:
        raise NoAnnotations("no annotations to summarise")
    total = len(labels)
    counts = {label: sum(1 for x in labels if x == label) for label in LABELS}
    floors = {label: (10000 * counts[label]) // total for label in LABELS}
    remainders = {label: (10000 * counts[label]) % total for label in LABELS}
    leftover = 10000 - sum(floors.values())
    by_remainder = sorted(LABELS, key=lambda l: (-remainders[l], l))
    for label in by_remainder[:leftover]:
        floors[label] += 1
    return {label: floors[label] / 100.0 for label in LABELS}


# --- report rendering -----------------------------------------------------

def format_metrics_table(metrics: Metrics, title: str = "") -> str:
    """Text table in the column order Precision, Recall, F1, Accuracy."""
    lines = []
    if title:
        lines.append(title)
    lines.append(f"averaging: {metrics.averaging}  queries: {metrics.n_queries}")
    lines.append(f"{'Precision':>10} {'Recall':>10} {'F1':>10} {'Accuracy':>10}")
    lines.append(
        f"{metrics.macro_precision:>10.4f} {metrics.macro_recall:>10.4f}"
        f" {metrics.macro_f1:>10.4f} {metrics.accuracy:>10.4f}"
    )
    return "\n".join(lines) + "\n"


def format_label_table(distribution: dict[str, float], title: str = "") -> str:
    """Text table over the labels 1, 1a, 2, 3, in that order."""
    lines = []
    if title:
        lines.append(title)
    lines.append(" ".join(f"{label:>8}" for label in LABELS))
    lines.append(" ".join(f"{distribution.get(label, 0.0):>7.2f}%" for label in LABELS))
    return "\n".join(lines) + "\n"


def metrics_to_record(metrics: Metrics) -> dict:
    """Machine-readable form of a metrics report."""
    return {
        "averaging": metrics.averaging,
        "n_queries": metrics.n_queries,
        "precision": metrics.macro_precision,
        "recall": metrics.macro_recall,
        "f1": metrics.macro_f1,
        "accuracy": metrics.accuracy,
        "per_class": {
            cls: {
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
            }
            for cls, m in metrics.per_class.items()
        },
    }
