"""Two-stage pair model over embedding features.

A binary classifier decides whether an ordered node pair (src, dst) is
linked at all; a regressor, trained only on linked pairs, estimates the
transition probability. Inputs are concatenated (source, destination,
segment) embedding vectors. Filtering through the classifier first
keeps the regressor away from the overwhelming mass of unlinked pairs.

Both stages are gradient-boosted tree ensembles with validation-based
early stopping; any probabilistic classifier plus bounded regressor
would satisfy the same contract. Artifacts persist to a directory of
joblib dumps with a versioned JSON metadata sidecar (docs/model-format.md).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import joblib
import numpy as np
from sklearn.ensemble import (
    HistGradientBoostingClassifier,
    HistGradientBoostingRegressor,
)
from threadpoolctl import threadpool_limits

from .errors import DegenerateDataset, DimensionMismatch, MissingEmbedding
from .events import SESSION_END, SESSION_START
from .graph import EventTransitionGraph

__all__ = [
    "PredictorConfig",
    "TrainingDataset",
    "HybridModel",
    "combine_features",
    "build_dataset",
    "train",
    "predict_new_event_edges",
    "save_model",
    "load_model",
]

MODEL_FORMAT = "clicksim-model"
MODEL_VERSION = 1

# early-stopping checks run on boosting-round multiples of this
CHECK_EVERY = 10


def combine_features(f_src: np.ndarray, f_dst: np.ndarray, f_seg: np.ndarray) -> np.ndarray:
    """Model input for one pair: source | destination | segment."""
    f_src, f_dst, f_seg = (np.asarray(v, dtype=float) for v in (f_src, f_dst, f_seg))
    if not (f_src.shape == f_dst.shape == f_seg.shape) or f_src.ndim != 1:
        raise DimensionMismatch(
            f"feature parts must be equal-length vectors, got "
            f"{f_src.shape}/{f_dst.shape}/{f_seg.shape}"
        )
    return np.concatenate([f_src, f_dst, f_seg])


@dataclass(frozen=True)
class PredictorConfig:
    decision_threshold: float = 0.1
    positive_class_weight: float = 5.0
    max_iterations: int = 1500
    early_stopping_rounds: int = 50
    negative_subsample: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.decision_threshold < 1.0):
            raise ValueError("decision_threshold must lie in (0, 1)")
        if self.positive_class_weight <= 0.0:
            raise ValueError("positive_class_weight must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.early_stopping_rounds < 1:
            raise ValueError("early_stopping_rounds must be >= 1")
        if not (0.0 <= self.negative_subsample <= 1.0):
            raise ValueError("negative_subsample must lie in [0, 1]")


@dataclass(frozen=True)
class TrainingDataset:
    """Pair rows in array form; reg_targets is NaN on negative rows."""

    features: np.ndarray
    cls_labels: np.ndarray
    reg_targets: np.ndarray
    src_ids: tuple[str, ...]
    dst_ids: tuple[str, ...]

    def __post_init__(self):
        n = len(self.features)
        if not (len(self.cls_labels) == len(self.reg_targets) == len(self.src_ids) == len(self.dst_ids) == n):
            raise ValueError("dataset columns disagree on row count")
        labels = np.asarray(self.cls_labels)
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("cls_labels must be 0 or 1")
        present = ~np.isnan(self.reg_targets)
        if not np.array_equal(present, labels == 1):
            raise ValueError("reg_target must be present exactly on positive rows")
        targets = np.asarray(self.reg_targets)[present]
        if ((targets <= 0.0) | (targets > 1.0)).any():
            raise ValueError("reg_target must lie in (0, 1]")

    @property
    def n_rows(self) -> int:
        return len(self.features)

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.cls_labels == 1))


def build_dataset(
    graph: EventTransitionGraph,
    embeddings: Mapping[str, np.ndarray],
    f_seg: np.ndarray,
    config: PredictorConfig,
) -> TrainingDataset:
    """One row per ordered pair: sources x destinations, self-pairs included.

    Sources are every node but the end sentinel; destinations every node
    but the start sentinel, so m event nodes give (m+1)^2 pairs. A pair
    is positive iff the graph observed the transition, and then carries
    the graph's stored probability as regression target. Negatives may
    be subsampled (seeded); positives never are.
    """
    srcs = graph.valid_sources()
    dsts = graph.valid_destinations()
    for nid in graph.nodes:
        if nid not in embeddings:
            raise MissingEmbedding(nid)
    f_seg = np.asarray(f_seg, dtype=float)
    d = f_seg.shape[0] if f_seg.ndim == 1 else -1
    for nid in graph.nodes:
        if np.asarray(embeddings[nid]).shape != (d,):
            raise DimensionMismatch(
                f"embedding of {nid} does not match segment vector length {d}"
            )

    rng = np.random.default_rng(config.seed)
    rows: list[tuple[str, str, int, float]] = []
    for src in srcs:
        for dst in dsts:
            if graph.observed(src, dst):
                rows.append((src, dst, 1, graph.probability(src, dst)))
            elif config.negative_subsample >= 1.0:
                rows.append((src, dst, 0, math.nan))
            elif config.negative_subsample > 0.0 and rng.random() < config.negative_subsample:
                rows.append((src, dst, 0, math.nan))

    features = np.empty((len(rows), 3 * d))
    for k, (src, dst, _, _) in enumerate(rows):
        features[k, :d] = embeddings[src]
        features[k, d : 2 * d] = embeddings[dst]
        features[k, 2 * d :] = f_seg
    return TrainingDataset(
        features=features,
        cls_labels=np.array([r[2] for r in rows], dtype=np.int8),
        reg_targets=np.array([r[3] for r in rows], dtype=float),
        src_ids=tuple(r[0] for r in rows),
        dst_ids=tuple(r[1] for r in rows),
    )


@dataclass
class HybridModel:
    """Trained classifier + regressor pair with its decision threshold."""

    cls: object
    reg: object
    config: PredictorConfig
    feature_dim: int
    metadata: dict

    def _check_features(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.feature_dim:
            raise DimensionMismatch(
                f"expected feature rows of length {self.feature_dim}, got {X.shape}"
            )
        return X

    def predict_batch(self, X, mode: str = "hybrid"):
        """Row-wise (exists, probability, score) for a block of pairs.

        hybrid: classifier gates, regressor fills accepted rows only.
        cls_only: the classifier's probability doubles as the estimate.
        reg_only: the regressor runs unfiltered and its output doubles
        as the decision score (diagnostic baseline).
        """
        X = self._check_features(X)
        threshold = self.config.decision_threshold
        if mode == "reg_only":
            raw = np.clip(np.asarray(self.reg.predict(X), dtype=float), 0.0, 1.0)
            return raw >= threshold, raw, raw.copy()
        cls_prob = np.asarray(self.cls.predict_proba(X), dtype=float)[:, 1]
        exists = cls_prob >= threshold
        if mode == "cls_only":
            return exists, cls_prob, cls_prob.copy()
        if mode != "hybrid":
            raise ValueError(f"unknown prediction mode {mode!r}")
        prob = np.zeros(len(X))
        if exists.any():
            raw = np.asarray(self.reg.predict(X[exists]), dtype=float)
            prob[exists] = np.clip(raw, 0.0, 1.0)
        return exists, prob, cls_prob

    def predict_pair(self, f_src, f_dst, f_seg) -> tuple[bool, float]:
        x = combine_features(f_src, f_dst, f_seg)
        exists, prob, _ = self.predict_batch(x)
        return bool(exists[0]), float(prob[0])


def _fit_boosted(make_estimator, X, y, weights, metric_fn, cap, patience):
    """Grow an ensemble in CHECK_EVERY steps, stop when the validation
    metric hasn't improved for `patience` rounds, refit at the best size."""
    probe = make_estimator(min(CHECK_EVERY, cap))
    probe.set_params(warm_start=True)
    best_metric, best_iter, stale, n_iter = math.inf, 0, 0, 0
    while n_iter < cap:
        n_iter = min(n_iter + CHECK_EVERY, cap)
        probe.set_params(max_iter=n_iter)
        probe.fit(X, y, sample_weight=weights)
        metric = metric_fn(probe)
        if metric < best_metric - 1e-12:
            best_metric, best_iter, stale = metric, n_iter, 0
        else:
            stale += CHECK_EVERY
            if stale >= patience:
                break
    final = make_estimator(best_iter)
    final.fit(X, y, sample_weight=weights)
    return final, best_iter, best_metric


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log1p(-p)))


def train(
    train_ds: TrainingDataset,
    val_ds: TrainingDataset,
    config: PredictorConfig,
    *,
    threads: int = 1,
) -> HybridModel:
    """Fit both stages with early stopping against the validation split.

    Deterministic for a fixed config: boosting is sequential, the seed
    pins the learners, and the thread cap pins reduction order.
    """
    if train_ds.n_rows == 0 or val_ds.n_rows == 0:
        raise DegenerateDataset("training and validation sets must be non-empty")
    if train_ds.n_positive == 0 or train_ds.n_positive == train_ds.n_rows:
        raise DegenerateDataset("training set must contain both classes")
    if val_ds.n_positive == 0 or val_ds.n_positive == val_ds.n_rows:
        raise DegenerateDataset("validation set must contain both classes")

    y_train = np.asarray(train_ds.cls_labels, dtype=int)
    weights = np.where(y_train == 1, config.positive_class_weight, 1.0)
    y_val = np.asarray(val_ds.cls_labels, dtype=int)

    def make_cls(max_iter):
        return HistGradientBoostingClassifier(
            max_iter=max(1, max_iter),
            early_stopping=False,
            random_state=config.seed,
        )

    def make_reg(max_iter):
        return HistGradientBoostingRegressor(
            max_iter=max(1, max_iter),
            early_stopping=False,
            random_state=config.seed,
        )

    def cls_metric(est):
        return _log_loss(y_val, est.predict_proba(val_ds.features)[:, 1])

    pos_train = train_ds.cls_labels == 1
    pos_val = val_ds.cls_labels == 1
    X_reg = train_ds.features[pos_train]
    y_reg = train_ds.reg_targets[pos_train]
    X_reg_val = val_ds.features[pos_val]
    y_reg_val = val_ds.reg_targets[pos_val]

    def reg_metric(est):
        pred = est.predict(X_reg_val)
        return float(np.sqrt(np.mean((pred - y_reg_val) ** 2)))

    with threadpool_limits(limits=threads):
        cls, cls_iter, cls_score = _fit_boosted(
            make_cls,
            train_ds.features,
            y_train,
            weights,
            cls_metric,
            config.max_iterations,
            config.early_stopping_rounds,
        )
        reg, reg_iter, reg_score = _fit_boosted(
            make_reg,
            X_reg,
            y_reg,
            None,
            reg_metric,
            config.max_iterations,
            config.early_stopping_rounds,
        )

    feature_dim = train_ds.features.shape[1]
    metadata = {
        "feature_dim": feature_dim,
        "n_train_rows": train_ds.n_rows,
        "n_train_positive": train_ds.n_positive,
        "cls_iterations": cls_iter,
        "cls_val_logloss": cls_score,
        "reg_iterations": reg_iter,
        "reg_val_rmse": reg_score,
        "early_stopping_granularity": CHECK_EVERY,
    }
    return HybridModel(cls=cls, reg=reg, config=config, feature_dim=feature_dim, metadata=metadata)


def predict_new_event_edges(
    model: HybridModel,
    graph: EventTransitionGraph,
    f_new: np.ndarray,
    f_seg: np.ndarray,
    embeddings: Mapping[str, np.ndarray],
) -> tuple[list[tuple[str, float]], list[tuple[str, float]]]:
    """Predicted raw-weight edge lists linking a new node into the graph.

    in_edges pair every possible source (all but END) with the new node;
    out_edges pair it with every possible destination (all but START).
    A pair survives when the classifier accepts it and the regressed
    weight is positive.
    """
    f_new = np.asarray(f_new, dtype=float)
    in_candidates = [nid for nid in sorted(graph.nodes) if nid != SESSION_END.id]
    out_candidates = [nid for nid in sorted(graph.nodes) if nid != SESSION_START.id]
    for nid in graph.nodes:
        if nid not in embeddings:
            raise MissingEmbedding(nid)

    def predict_direction(pairs):
        X = np.stack([combine_features(a, b, f_seg) for a, b in pairs])
        exists, prob, _ = model.predict_batch(X)
        return exists, prob

    in_exists, in_prob = predict_direction([(embeddings[i], f_new) for i in in_candidates])
    out_exists, out_prob = predict_direction([(f_new, embeddings[j]) for j in out_candidates])
    in_edges = [
        (nid, float(p)) for nid, ok, p in zip(in_candidates, in_exists, in_prob) if ok and p > 0.0
    ]
    out_edges = [
        (nid, float(p)) for nid, ok, p in zip(out_candidates, out_exists, out_prob) if ok and p > 0.0
    ]
    return in_edges, out_edges


def save_model(model: HybridModel, path) -> None:
    """Write the artifact directory: two joblib dumps + metadata.json."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    joblib.dump(model.cls, path / "cls.joblib")
    joblib.dump(model.reg, path / "reg.joblib")
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config": asdict(model.config),
        "feature_dim": model.feature_dim,
        "metadata": model.metadata,
    }
    (path / "metadata.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_model(path) -> HybridModel:
    path = Path(path)
    doc = json.loads((path / "metadata.json").read_text())
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise ValueError(
            f"unsupported model artifact {doc.get('format')!r} v{doc.get('version')!r}"
        )
    return HybridModel(
        cls=joblib.load(path / "cls.joblib"),
        reg=joblib.load(path / "reg.joblib"),
        config=PredictorConfig(**doc["config"]),
        feature_dim=doc["feature_dim"],
        metadata=doc["metadata"],
    )
