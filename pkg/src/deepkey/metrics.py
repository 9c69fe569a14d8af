"""Evaluation metrics: classification report, FAR/FRR, ROC/AUC, stage timings."""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass
class ClassificationReport:
    accuracy: float
    confusion: np.ndarray           # [K, K], rows = true class
    precision: np.ndarray           # [K]
    recall: np.ndarray              # [K]
    f1: np.ndarray                  # [K]
    support: np.ndarray             # [K]
    macro_precision: float
    macro_recall: float
    macro_f1: float


def classification_report(y_true, y_pred, K: int) -> ClassificationReport:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ParameterError("y_true and y_pred must have equal length")
    conf = np.zeros((K, K), dtype=np.int64)
    np.add.at(conf, (y_true, y_pred), 1)
    support = conf.sum(axis=1)
    tp = np.diag(conf).astype(np.float64)
    pred_count = conf.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(pred_count > 0, tp / pred_count, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / pr, 0.0)
    present = support > 0  # classes absent from y_true excluded from macro averages
    return ClassificationReport(
        accuracy=float(tp.sum() / max(1, len(y_true))),
        confusion=conf, precision=precision, recall=recall, f1=f1, support=support,
        macro_precision=float(precision[present].mean()),
        macro_recall=float(recall[present].mean()),
        macro_f1=float(f1[present].mean()),
    )


def far_frr(decisions: list[tuple[bool, bool]]) -> tuple[float | None, float | None]:
    """(FAR, FRR) from (is_genuine, accepted) pairs; None when undefined."""
    genuine = [acc for gen, acc in decisions if gen]
    impostor = [acc for gen, acc in decisions if not gen]
    far = (sum(impostor) / len(impostor)) if impostor else None
    frr = ((len(genuine) - sum(genuine)) / len(genuine)) if genuine else None
    return far, frr


def roc_auc(scores, labels) -> float:
    """Trapezoidal AUC (equals rank-sum with tie averaging); labels in {0, 1}."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ParameterError("roc_auc needs both positive and negative labels")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    r = 1.0
    while i < scores.size:  # average ranks over score ties
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (r + r + (j - i)) / 2.0
        r += j - i + 1
        i = j + 1
    rank_sum = ranks[labels].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_points(scores, labels) -> np.ndarray:
    """(FPR, TPR) pairs over all score thresholds, for external plotting."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    order = np.argsort(-scores, kind="stable")
    tp = np.cumsum(labels[order])
    fp = np.cumsum(~labels[order])
    tpr = tp / max(1, labels.sum())
    fpr = fp / max(1, (~labels).sum())
    return np.column_stack([np.concatenate([[0.0], fpr]),
                            np.concatenate([[0.0], tpr])])


@dataclass
class StageTimer:
    """Accumulates wall-clock durations per named pipeline stage."""

    durations: dict[str, list[float]] = field(default_factory=dict)

    @contextmanager
    def time(self, stage: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.durations.setdefault(stage, []).append(time.perf_counter() - start)

    def last(self) -> dict[str, float]:
        return {k: v[-1] for k, v in self.durations.items()}

    def stats(self) -> dict[str, dict[str, float]]:
        out = {}
        for k, v in self.durations.items():
            arr = np.asarray(v)
            out[k] = {"mean": float(arr.mean()),
                      "p95": float(np.percentile(arr, 95)),
                      "total": float(arr.sum()),
                      "count": len(v)}
        return out


def time_stages(stages: dict[str, callable]) -> dict[str, float]:
    """Run the given stage callables in order, returning per-stage durations."""
    timer = StageTimer()
    for name, fn in stages.items():
        with timer.time(name):
            fn()
    return timer.last()
