"""Extractor evaluation: train/test splits over the labeled dataset and
per-topic precision, recall, balanced accuracy, syntax error rate, and
timing, across a sweep of training-set sizes."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .intent import (HashEmbedder, KeywordExtractor, LabeledSample, LlmExtractor,
                     MarkerSyntaxError, SvmExtractor, TOPICS, UpdateMarker)

Rate = float | None  # None renders as "n/a" (undefined ratio)


@dataclass(frozen=True)
class MetricsRow:
    extractor: str
    train_size: int
    mean_time: float
    precision: tuple[Rate, Rate]          # (cpu, latency-bound)
    recall: tuple[Rate, Rate]
    balanced_accuracy: tuple[Rate, Rate]
    syntax_error_pct: tuple[float, float]


def split_dataset(samples: list[LabeledSample], train_size: int,
                  seed: int) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Deterministic stratified split on the joint label.

    Per class, the training draw is proportional to the class share
    (largest-remainder rounding to hit train_size exactly); the rest is
    the test set.
    """
    n = len(samples)
    if not 0 <= train_size <= n:
        raise ValueError(f"train_size {train_size} out of range [0, {n}]")
    if train_size == n:
        raise ValueError("empty-test-set: train_size consumes every sample")

    classes: dict[tuple[int, int], list[int]] = {}
    for i, s in enumerate(samples):
        classes.setdefault((s.marker.cpu, s.marker.latency_bound), []).append(i)

    keys = sorted(classes)
    quotas = {k: train_size * len(classes[k]) / n for k in keys}
    take = {k: int(quotas[k]) for k in keys}
    remainder = train_size - sum(take.values())
    for k in sorted(keys, key=lambda k: (-(quotas[k] - take[k]), k)):
        if remainder <= 0:
            break
        if take[k] < len(classes[k]):
            take[k] += 1
            remainder -= 1

    rng = np.random.RandomState(seed)
    train_idx: set[int] = set()
    for k in keys:
        idx = np.array(classes[k])
        rng.shuffle(idx)
        train_idx.update(idx[:take[k]].tolist())
    train = [samples[i] for i in range(n) if i in train_idx]
    test = [samples[i] for i in range(n) if i not in train_idx]
    return train, test


def binarize_change(component: int) -> bool:
    """True (positive) iff the marker component requests a change."""
    if component not in (-1, 0, +1):
        raise ValueError(f"illegal marker component {component}")
    return component != 0


def _ratio(num: int, den: int) -> Rate:
    return None if den == 0 else num / den


def compute_metrics(predictions, extractor: str = "",
                    train_size: int = 0) -> MetricsRow:
    """Aggregate (true marker, predicted marker or syntax error, elapsed)
    triples into one metrics row.

    A syntax error counts as a (0, 0) prediction for the rate metrics
    and is tallied into the syntax-error percentage. Balanced accuracy
    averages the per-direction recalls over samples whose true component
    is a change; a 0 prediction there is a miss.
    """
    if not predictions:
        raise ValueError("empty predictions")
    n = len(predictions)
    syntax_errors = sum(1 for _, p, _ in predictions if isinstance(p, MarkerSyntaxError))
    mean_time = sum(e for _, _, e in predictions) / n

    precision = []
    recall = []
    bal_acc = []
    for topic in TOPICS:
        tp = fp = fn = 0
        dir_hits = {-1: 0, +1: 0}
        dir_totals = {-1: 0, +1: 0}
        for truth, pred, _ in predictions:
            p = UpdateMarker(0, 0) if isinstance(pred, MarkerSyntaxError) else pred
            t_val = truth.component(topic)
            p_val = p.component(topic)
            t_pos = binarize_change(t_val)
            p_pos = binarize_change(p_val)
            if p_pos and t_pos:
                tp += 1
            elif p_pos and not t_pos:
                fp += 1
            elif t_pos and not p_pos:
                fn += 1
            if t_val != 0:
                dir_totals[t_val] += 1
                if p_val == t_val:
                    dir_hits[t_val] += 1
        precision.append(_ratio(tp, tp + fp))
        recall.append(_ratio(tp, tp + fn))
        recalls = [dir_hits[d] / dir_totals[d] for d in (-1, +1) if dir_totals[d] > 0]
        bal_acc.append(sum(recalls) / len(recalls) if recalls else None)

    pct = 100.0 * syntax_errors / n
    return MetricsRow(extractor=extractor, train_size=train_size,
                      mean_time=mean_time,
                      precision=(precision[0], precision[1]),
                      recall=(recall[0], recall[1]),
                      balanced_accuracy=(bal_acc[0], bal_acc[1]),
                      syntax_error_pct=(pct, pct))


def _build(kind: str, train: list[LabeledSample], llm_client=None,
           llm_template: str | None = None, seed: int = 0):
    if kind == "keyword":
        return KeywordExtractor()
    if kind == "svm":
        if not train:
            raise ValueError("svm extractor needs at least one training sample per class")
        return SvmExtractor(train, embedder=HashEmbedder(), seed=seed)
    if kind == "llm":
        if llm_client is None or llm_template is None:
            raise ValueError("llm extractor needs a client and a template")
        return LlmExtractor(llm_client, llm_template, examples=train)
    raise ValueError(f"unknown extractor kind {kind!r}")


def run_sweep(samples: list[LabeledSample], kind: str, train_sizes: list[int],
              seed: int = 0, llm_client=None,
              llm_template: str | None = None) -> list[MetricsRow]:
    """One metrics row per training size, largest first."""
    rows = []
    for size in sorted(train_sizes, reverse=True):
        train, test = split_dataset(samples, size, seed)
        extractor = _build(kind, train, llm_client=llm_client,
                           llm_template=llm_template, seed=seed)
        predictions = []
        for s in test:
            marker, diag = extractor.extract(s.prompt)
            pred = marker
            if diag.syntax_error:
                from .intent import SYNTAX_ERROR
                pred = SYNTAX_ERROR
            predictions.append((s.marker, pred, diag.elapsed))
        rows.append(compute_metrics(predictions, extractor=kind, train_size=size))
    return rows


def _fmt(v: Rate) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def rows_to_tsv(rows: list[MetricsRow]) -> str:
    header = ["extractor", "train_size", "mean_time_s",
              "precision_cpu", "precision_lb", "recall_cpu", "recall_lb",
              "balanced_accuracy_cpu", "balanced_accuracy_lb",
              "syntax_error_pct_cpu", "syntax_error_pct_lb"]
    lines = ["\t".join(header)]
    for r in rows:
        lines.append("\t".join([
            r.extractor, str(r.train_size), f"{r.mean_time:.6f}",
            _fmt(r.precision[0]), _fmt(r.precision[1]),
            _fmt(r.recall[0]), _fmt(r.recall[1]),
            _fmt(r.balanced_accuracy[0]), _fmt(r.balanced_accuracy[1]),
            f"{r.syntax_error_pct[0]:.2f}", f"{r.syntax_error_pct[1]:.2f}",
        ]))
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[MetricsRow]) -> str:
    return json.dumps([{
        "extractor": r.extractor,
        "train_size": r.train_size,
        "mean_time_s": r.mean_time,
        "precision": list(r.precision),
        "recall": list(r.recall),
        "balanced_accuracy": list(r.balanced_accuracy),
        "syntax_error_pct": list(r.syntax_error_pct),
    } for r in rows], indent=2)
