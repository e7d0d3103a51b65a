"""Metrics for predicted transition probabilities.

All metrics are deterministic and implemented directly over numpy so
they can be cross-checked against brute-force references:

* RMSE: sqrt(mean((pred - truth)^2)).
* SMAPE (percent): mean of |pred - truth| / ((|truth| + |pred|) / 2),
  times 100, where a term with pred = truth = 0 contributes 0.
* F1: harmonic mean of precision and recall at an inclusive threshold
  (score >= threshold predicts positive).
* ROC-AUC: rank (Mann-Whitney) formulation with average ranks on ties.
* PR-AUC: step-wise precision-recall sum, no interpolation, ties
  grouped per distinct score.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyInput, LengthMismatch, MissingEmbedding, SingleClass

if TYPE_CHECKING:  # pragma: no cover
    from .graph import EventTransitionGraph
    from .predictor import HybridModel

__all__ = [
    "rmse",
    "smape",
    "f1_score",
    "roc_auc",
    "pr_auc",
    "classification_metrics",
    "MetricsReport",
    "evaluate",
]


def _paired(predicted, truth) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(predicted, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape or p.ndim != 1:
        raise LengthMismatch(f"shapes {p.shape} vs {t.shape}")
    if p.size == 0:
        raise EmptyInput("no samples")
    return p, t


def rmse(predicted: Sequence[float], truth: Sequence[float]) -> float:
    p, t = _paired(predicted, truth)
    return float(np.sqrt(np.mean((p - t) ** 2)))


def smape(predicted: Sequence[float], truth: Sequence[float]) -> float:
    p, t = _paired(predicted, truth)
    denom = (np.abs(t) + np.abs(p)) / 2.0
    terms = np.zeros_like(denom)
    active = denom > 0
    terms[active] = np.abs(p - t)[active] / denom[active]
    return float(100.0 * np.mean(terms))


def _scored(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise LengthMismatch(f"shapes {s.shape} vs {y.shape}")
    if s.size == 0:
        raise EmptyInput("no samples")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    return s, y.astype(int)


def f1_score(scores: Sequence[float], labels: Sequence[int], threshold: float) -> float:
    s, y = _scored(scores, labels)
    predicted = s >= threshold
    tp = int(np.sum(predicted & (y == 1)))
    fp = int(np.sum(predicted & (y == 0)))
    fn = int(np.sum(~predicted & (y == 1)))
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    s, y = _scored(scores, labels)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC-AUC undefined without both classes")
    ranks = rankdata(s)  # average ranks on ties
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def pr_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    s, y = _scored(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.size:
        raise SingleClass("PR-AUC undefined without both classes")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tp = np.cumsum(y)
    fp = np.cumsum(1 - y)
    # evaluate only at the last index of each tied score group
    last = np.nonzero(np.r_[s[1:] != s[:-1], True])[0]
    precision = tp[last] / (tp[last] + fp[last])
    recall = tp[last] / n_pos
    prev_recall = np.r_[0.0, recall[:-1]]
    return float(np.sum((recall - prev_recall) * precision))


def classification_metrics(
    scores: Sequence[float], labels: Sequence[int], threshold: float
) -> tuple[float, float, float]:
    """(F1, ROC-AUC, PR-AUC) at the given decision threshold.

    Raises :class:`SingleClass` when labels contain one class only; the
    AUCs are undefined there and must be reported as absent, never 0.
    """
    f1 = f1_score(scores, labels, threshold)
    return f1, roc_auc(scores, labels), pr_auc(scores, labels)


@dataclass(frozen=True)
class MetricsReport:
    rmse: float
    smape: float
    f1: float
    roc_auc: float | None
    pr_auc: float | None
    n_pairs: int
    n_positive: int
    n_smape_pairs: int
    mode: str = "hybrid"

    def to_json_dict(self) -> dict:
        return {
            "rmse": self.rmse,
            "smape": self.smape,
            "f1": self.f1,
            "roc_auc": self.roc_auc,
            "pr_auc": self.pr_auc,
            "pairs": {
                "total": self.n_pairs,
                "positive": self.n_positive,
                "smape": self.n_smape_pairs,
            },
            "mode": self.mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        headers = ["RMSE", "SMAPE", "F1", "ROC-AUC", "PR-AUC"]
        values = [self.rmse, self.smape, self.f1, self.roc_auc, self.pr_auc]
        cells = ["n/a" if v is None else f"{v:.4f}" for v in values]
        width = [max(len(h), len(c)) for h, c in zip(headers, cells)]
        head = "  ".join(h.rjust(w) for h, w in zip(headers, width))
        row = "  ".join(c.rjust(w) for c, w in zip(cells, width))
        return head + "\n" + row


def evaluate(
    model: "HybridModel",
    test_graph: "EventTransitionGraph",
    embeddings: Mapping[str, np.ndarray],
    f_seg: np.ndarray,
    *,
    mode: str = "hybrid",
    smape_support: str = "active",
) -> MetricsReport:
    """Score a model against a held-out graph over all valid ordered pairs.

    Ground truth for a pair is the graph's smoothed probability when the
    transition was observed, else 0; the label is plain edge existence.
    SMAPE is restricted to pairs where truth or prediction is nonzero
    (``smape_support="active"``, the default) because the both-zero
    terms dominate otherwise; ``"all"`` keeps every pair.
    """
    if smape_support not in ("active", "all"):
        raise ValueError(f"unknown smape_support {smape_support!r}")
    sources = test_graph.valid_sources()
    dests = test_graph.valid_destinations()
    for nid in test_graph.nodes:
        if nid not in embeddings:
            raise MissingEmbedding(nid)
    f_seg = np.asarray(f_seg, dtype=float)
    dest_block = np.stack([np.asarray(embeddings[d], dtype=float) for d in dests])
    seg_block = np.tile(f_seg, (len(dests), 1))

    truths, preds, labels, scores = [], [], [], []
    for src in sources:  # chunked by source to bound memory
        src_block = np.tile(np.asarray(embeddings[src], dtype=float), (len(dests), 1))
        x = np.hstack([src_block, dest_block, seg_block])
        _, prob, score = model.predict_batch(x, mode=mode)
        preds.append(prob)
        scores.append(score)
        truths.append(
            [test_graph.probability(src, d) if test_graph.observed(src, d) else 0.0 for d in dests]
        )
        labels.append([1 if test_graph.observed(src, d) else 0 for d in dests])

    y = np.concatenate([np.asarray(t, dtype=float) for t in truths])
    y_hat = np.concatenate(preds)
    lab = np.concatenate([np.asarray(l, dtype=int) for l in labels])
    sc = np.concatenate(scores)

    active = (y > 0) | (y_hat > 0)
    smape_mask = active if smape_support == "active" else np.ones_like(active)
    f1 = f1_score(sc, lab, model.config.decision_threshold)
    try:
        roc = roc_auc(sc, lab)
        pr = pr_auc(sc, lab)
    except SingleClass:
        roc = pr = None
    return MetricsReport(
        rmse=rmse(y_hat, y),
        smape=smape(y_hat[smape_mask], y[smape_mask]) if smape_mask.any() else 0.0,
        f1=f1,
        roc_auc=roc,
        pr_auc=pr,
        n_pairs=int(y.size),
        n_positive=int(lab.sum()),
        n_smape_pairs=int(smape_mask.sum()),
        mode=mode,
    )
