import math
import random
from types import SimpleNamespace

import numpy as np
import pytest

from clicksim.errors import EmptyInput, LengthMismatch, SingleClass
from clicksim.evaluation import (
    MetricsReport,
    classification_metrics,
    evaluate,
    f1_score,
    pr_auc,
    rmse,
    roc_auc,
    smape,
)
from clicksim.graph import build_graph

from .helpers import sessions

# -- brute-force reference implementations (kept deliberately naive) ----


def rmse_oracle(pred, truth):
    return math.sqrt(sum((p - t) ** 2 for p, t in zip(pred, truth)) / len(pred))


def smape_oracle(pred, truth):
    total = 0.0
    for p, t in zip(pred, truth):
        if p == 0 and t == 0:
            continue
        total += abs(p - t) / ((abs(p) + abs(t)) / 2)
    return 100.0 * total / len(pred)


def f1_oracle(scores, labels, threshold):
    tp = sum(1 for s, y in zip(scores, labels) if s >= threshold and y == 1)
    fp = sum(1 for s, y in zip(scores, labels) if s >= threshold and y == 0)
    fn = sum(1 for s, y in zip(scores, labels) if s < threshold and y == 1)
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    return 2 * prec * rec / (prec + rec) if prec + rec else 0.0


def roc_auc_oracle(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else (0.5 if p == n else 0.0)
    return total / (len(pos) * len(neg))


def pr_auc_oracle(scores, labels):
    n_pos = sum(labels)
    prev_recall = 0.0
    area = 0.0
    for thr in sorted(set(scores), reverse=True):
        tp = sum(1 for s, y in zip(scores, labels) if s >= thr and y == 1)
        fp = sum(1 for s, y in zip(scores, labels) if s >= thr and y == 0)
        precision = tp / (tp + fp)
        recall = tp / n_pos
        area += (recall - prev_recall) * precision
        prev_recall = recall
    return area


def random_fixture(rng, n_max=50):
    n = rng.randint(1, n_max)
    # coarse scores force plenty of ties
    scores = [round(rng.random(), 1) for _ in range(n)]
    labels = [rng.randint(0, 1) for _ in range(n)]
    return scores, labels


class TestRmse:
    def test_zero_when_equal(self):
        assert rmse([0.1, 0.5], [0.1, 0.5]) == 0.0

    def test_hand_arithmetic(self):
        assert rmse([0.0, 1.0], [1.0, 0.0]) == 1.0

    def test_matches_oracle(self):
        rng = random.Random(3)
        pred = [rng.random() for _ in range(100)]
        truth = [rng.random() for _ in range(100)]
        assert rmse(pred, truth) == pytest.approx(rmse_oracle(pred, truth), abs=1e-12)

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            rmse([0.1], [0.1, 0.2])
        with pytest.raises(EmptyInput):
            rmse([], [])


class TestSmape:
    def test_equal_is_zero(self):
        assert smape([0.5], [0.5]) == 0.0

    def test_both_zero_rule(self):
        assert smape([0.0], [0.0]) == 0.0

    def test_hand_arithmetic(self):
        assert smape([0.2], [0.1]) == pytest.approx(100 * (0.1 / 0.15), abs=1e-12)

    def test_bounded_by_200(self):
        assert smape([1.0, 0.0], [0.0, 1.0]) == pytest.approx(200.0)


class TestClassificationMetrics:
    def test_perfect_separation(self):
        scores = [0.9, 0.8, 0.2, 0.1]
        labels = [1, 1, 0, 0]
        f1, roc, pr = classification_metrics(scores, labels, 0.5)
        assert (f1, roc, pr) == (1.0, 1.0, 1.0)

    def test_hand_worked_example(self):
        # scores [0.9, 0.8, 0.3], labels [1, 0, 1], threshold 0.5:
        # TP=1 FP=1 FN=1 -> F1=0.5; one concordant pair + one discordant -> ROC 0.5;
        # PR steps: (R=.5,P=1), (R=.5,P=.5), (R=1,P=2/3) -> AP = .5*1 + .5*(2/3) = 5/6
        f1, roc, pr = classification_metrics([0.9, 0.8, 0.3], [1, 0, 1], 0.5)
        assert f1 == pytest.approx(0.5)
        assert roc == pytest.approx(0.5)
        assert pr == pytest.approx(5 / 6, abs=1e-12)

    def test_single_class_raises(self):
        with pytest.raises(SingleClass):
            classification_metrics([0.9, 0.8], [1, 1], 0.5)
        with pytest.raises(SingleClass):
            classification_metrics([0.9, 0.8], [0, 0], 0.5)

    def test_threshold_inclusive(self):
        assert f1_score([0.1], [1], 0.1) == 1.0

    def test_all_ties_roc_is_half(self):
        assert roc_auc([0.3, 0.3, 0.3, 0.3], [1, 0, 1, 0]) == pytest.approx(0.5)

    def test_matches_oracles_on_random_fixtures(self):
        rng = random.Random(17)
        checked = 0
        for _ in range(300):
            scores, labels = random_fixture(rng)
            thr = rng.choice([0.1, 0.3, 0.5, 0.9])
            assert f1_score(scores, labels, thr) == pytest.approx(
                f1_oracle(scores, labels, thr), abs=1e-9
            )
            if 0 < sum(labels) < len(labels):
                assert roc_auc(scores, labels) == pytest.approx(
                    roc_auc_oracle(scores, labels), abs=1e-9
                )
                assert pr_auc(scores, labels) == pytest.approx(
                    pr_auc_oracle(scores, labels), abs=1e-9
                )
                checked += 1
            else:
                with pytest.raises(SingleClass):
                    roc_auc(scores, labels)
        assert checked > 100

    def test_permutation_invariant(self):
        rng = random.Random(5)
        scores, labels = random_fixture(rng)
        labels[0], labels[-1] = 1, 0  # both classes present
        perm = list(range(len(scores)))
        rng.shuffle(perm)
        ps = [scores[i] for i in perm]
        pl = [labels[i] for i in perm]
        assert roc_auc(ps, pl) == pytest.approx(roc_auc(scores, labels), abs=1e-12)
        assert pr_auc(ps, pl) == pytest.approx(pr_auc(scores, labels), abs=1e-12)
        assert f1_score(ps, pl, 0.5) == f1_score(scores, labels, 0.5)


# -- evaluate() over a graph with stub models ---------------------------


def one_hot_embeddings(graph):
    ids = sorted(graph.nodes)
    emb = {}
    for i, nid in enumerate(ids):
        v = np.zeros(len(ids))
        v[i] = 1.0
        emb[nid] = v
    return emb, ids


class LookupStub:
    """Duck-typed model that decodes (src, dst) from one-hot features."""

    def __init__(self, ids, pair_score, threshold=0.1):
        self.ids = ids
        self.pair_score = pair_score
        self.config = SimpleNamespace(decision_threshold=threshold)

    def predict_batch(self, x, mode="hybrid"):
        d = len(self.ids)
        scores = np.array(
            [
                self.pair_score(self.ids[int(row[:d].argmax())], self.ids[int(row[d : 2 * d].argmax())])
                for row in x
            ]
        )
        exists = scores >= self.config.decision_threshold
        return exists, np.where(exists, scores, 0.0), scores


@pytest.fixture()
def small_graph():
    return build_graph(sessions([["A", "B"], ["A", "C"], ["A", "B"]]), alpha=5.0)


class TestEvaluate:
    def test_oracle_stub_scores_perfectly(self, small_graph):
        emb, ids = one_hot_embeddings(small_graph)
        stub = LookupStub(ids, small_graph.probability)
        report = evaluate(stub, small_graph, emb, np.zeros(len(ids)))
        assert report.rmse == 0.0
        assert report.smape == 0.0
        assert report.f1 == 1.0
        assert report.n_pairs == 16  # 4 sources x 4 destinations

    def test_constant_zero_model(self, small_graph):
        emb, ids = one_hot_embeddings(small_graph)
        stub = LookupStub(ids, lambda s, d: 0.0)
        report = evaluate(stub, small_graph, emb, np.zeros(len(ids)))
        # truths: 1, 7/13, 6/13, 1, 1 over 16 pairs (A->B seen twice, A->C once)
        want = math.sqrt((3 + (7 / 13) ** 2 + (6 / 13) ** 2) / 16)
        assert report.f1 == 0.0
        assert report.rmse == pytest.approx(want, abs=1e-12)
        # constant scores: every pos/neg pair ties -> 0.5; one PR group -> prevalence
        assert report.roc_auc == pytest.approx(0.5)
        assert report.pr_auc == pytest.approx(5 / 16)

    def test_smape_support_all(self, small_graph):
        emb, ids = one_hot_embeddings(small_graph)
        stub = LookupStub(ids, small_graph.probability)
        active = evaluate(stub, small_graph, emb, np.zeros(len(ids)), smape_support="active")
        everything = evaluate(stub, small_graph, emb, np.zeros(len(ids)), smape_support="all")
        assert active.n_smape_pairs == 5
        assert everything.n_smape_pairs == 16

    def test_deterministic(self, small_graph):
        emb, ids = one_hot_embeddings(small_graph)
        stub = LookupStub(ids, small_graph.probability)
        r1 = evaluate(stub, small_graph, emb, np.zeros(len(ids)))
        r2 = evaluate(stub, small_graph, emb, np.zeros(len(ids)))
        assert r1 == r2


class TestReportRendering:
    def test_table_column_order(self):
        report = MetricsReport(0.05, 23.5, 0.85, 0.93, 0.81, 100, 10, 12)
        table = report.to_table()
        header = table.splitlines()[0]
        assert header.split() == ["RMSE", "SMAPE", "F1", "ROC-AUC", "PR-AUC"]

    def test_absent_auc_rendered_na(self):
        report = MetricsReport(0.05, 23.5, 0.85, None, None, 100, 10, 12)
        assert "n/a" in report.to_table()
        assert report.to_json_dict()["roc_auc"] is None
