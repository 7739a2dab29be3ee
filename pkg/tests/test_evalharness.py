import json
import math

import numpy as np
import pandas as pd
import pytest
import scipy.sparse as sp

from pysrc.errors import DataError, NumericalError
from pysrc.helpers.evalharness.metrics import (
    hr_at_n,
    ndcg_strong,
    ndcg_weak,
    rank_of,
    recall_at_n,
    top_n_items,
)
from pysrc.helpers.evalharness.protocols import evaluate_strong, evaluate_weak
from pysrc.helpers.evalharness.report import EvalReport
from pysrc.helpers.models.baselines import Popularity
from pysrc.helpers.recdata.loading import from_rows, load_interactions
from pysrc.helpers.recdata.splitting import EvalGroup, StrongSplit, split_strong, split_weak

from conftest import synthetic_rows


class TestMetrics:
    def test_weak_metrics(self):
        assert (hr_at_n(1, 10), ndcg_weak(1, 10)) == (1.0, 1.0)
        assert (hr_at_n(11, 10), ndcg_weak(11, 10)) == (0.0, 0.0)
        assert ndcg_weak(10, 10) == pytest.approx(0.28906, abs=1e-5)
        for rank in range(1, 5):
            assert hr_at_n(rank, 1) == ndcg_weak(rank, 1)

    def test_rank_must_be_positive(self):
        with pytest.raises(ValueError):
            hr_at_n(0, 10)
        with pytest.raises(ValueError):
            ndcg_weak(0, 10)

    def test_strong_metrics(self):
        assert recall_at_n([7, 1, 2], {7}, 100) == 1.0
        assert ndcg_strong([7, 1, 2], {7}, 100) == 1.0
        assert recall_at_n([1, 2, 3], {4, 5, 6}) == 0.0
        assert ndcg_strong([1, 2, 3], {4, 5, 6}, 3) == 0.0

    def test_two_hits_at_one_and_three(self):
        ranked = [10, 20, 30]
        assert recall_at_n(ranked, {10, 30}, 3) == 1.0
        assert ndcg_strong(ranked, {10, 30}, 3) == pytest.approx(0.9197, abs=1e-4)

    def test_empty_heldout(self):
        with pytest.raises(DataError):
            recall_at_n([1, 2], set())
        with pytest.raises(DataError):
            ndcg_strong([1, 2], [], 2)

    def test_rank_ties_go_to_lower_index(self):
        items = np.array([9, 3, 5, 1])
        scores = np.array([0.5, 0.5, 0.9, 0.5])
        assert rank_of(0.5, 9, scores, items) == 4
        assert rank_of(0.5, 1, scores, items) == 2
        assert rank_of(0.9, 5, scores, items) == 1

    def test_top_n_ties(self):
        scores = np.array([0.1, 0.7, 0.7, -np.inf, 0.7])
        np.testing.assert_array_equal(top_n_items(scores, 3), [1, 2, 4])
        np.testing.assert_array_equal(top_n_items(scores, 10), [1, 2, 4, 0, 3])


@pytest.fixture
def weak_split():
    return split_weak(from_rows(synthetic_rows(), 40), n_negatives=20, seed=0, holdout="random")


def row_dependent_scorer(n_items, transform=lambda s: s):
    w = np.random.default_rng(5).normal(size=(n_items, n_items))
    return lambda rows: transform(np.tanh(0.1 * (rows @ w)))


class TestWeakProtocol:
    def test_oracle_scores_one(self, weak_split):
        def oracle(rows):
            scores = np.zeros((rows.shape[0], weak_split.n_items))
            scores[np.arange(rows.shape[0]), weak_split.test_items] = 1.0
            return scores

        report = evaluate_weak(oracle, weak_split)
        assert report.protocol == "weak"
        assert report.cutoffs == [1, 5, 10]
        assert all(v == 1.0 for v in report.metrics.values())
        assert report.n_users == len(weak_split.users)

    def test_uniform_scores_rank_by_index(self):
        rng = np.random.default_rng(3)
        rows = [sorted(rng.choice(500, size=2, replace=False).tolist()) for _ in range(400)]
        split = split_weak(from_rows(rows, 500), n_negatives=100, seed=1, holdout="random")
        uniform = lambda r: np.zeros((r.shape[0], 500))
        first = evaluate_weak(uniform, split)
        assert first.metrics["HR@10"] == pytest.approx(10 / 101, abs=0.045)
        second = evaluate_weak(uniform, split)
        assert first.metrics == second.metrics

    def test_hr_at_one_equals_ndcg_at_one(self, weak_split):
        report = evaluate_weak(row_dependent_scorer(40), weak_split)
        assert report.metrics["HR@1"] == report.metrics["NDCG@1"]

    def test_monotone_transform_invariance(self, weak_split):
        base = evaluate_weak(row_dependent_scorer(40), weak_split).metrics
        affine = evaluate_weak(row_dependent_scorer(40, lambda s: 2 * s + 7), weak_split).metrics
        squashed = evaluate_weak(row_dependent_scorer(40, np.tanh), weak_split).metrics
        assert base == affine == squashed

    def test_batching_does_not_change_metrics(self, weak_split):
        scorer = row_dependent_scorer(40)
        whole = evaluate_weak(scorer, weak_split).metrics
        single = evaluate_weak(scorer, weak_split, batch_size=1).metrics
        for key in whole:
            assert whole[key] == pytest.approx(single[key], abs=1e-12)

    def test_non_finite_scores(self, weak_split):
        with pytest.raises(NumericalError):
            evaluate_weak(lambda r: np.full((r.shape[0], 40), np.nan), weak_split)

    def test_wrong_score_shape(self, weak_split):
        with pytest.raises(DataError):
            evaluate_weak(lambda r: np.zeros((r.shape[0], 39)), weak_split)


def popularity_split():
    # item counts over train users: [3, 3, 1, 1, 0, 0]
    train = from_rows([[0, 1], [0, 2], [0, 1, 3], [1]], 6)
    foldin = sp.csr_matrix(np.array([[1, 0, 0, 0, 0, 0], [0, 1, 1, 0, 0, 0]], dtype=np.float64))
    heldout = sp.csr_matrix(np.array([[0, 1, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1]], dtype=np.float64))
    group = EvalGroup(users=np.array([4, 5]), foldin=foldin, heldout=heldout)
    return StrongSplit(train=train, train_users=np.arange(4), groups={"test": group}, seed=0)


class TestStrongProtocol:
    def test_popularity_hand_fixture(self):
        split = popularity_split()
        model = Popularity.fit(split.train.matrix)
        report = evaluate_strong(model.score, split, cutoffs=(5, 2))
        assert report.cutoffs == [2, 5]
        # user 4 ranks 1,2,3,4,5 with hits at 1 and 4; user 5 ranks 0,3,4,5 with its hit at 4
        ideal_two = 1 + 1 / math.log2(3)
        assert report.metrics["Recall@2"] == pytest.approx((0.5 + 0.0) / 2)
        assert report.metrics["NDCG@2"] == pytest.approx((1 / ideal_two + 0.0) / 2)
        assert report.metrics["Recall@5"] == pytest.approx(1.0)
        user4 = (1 + 1 / math.log2(5)) / ideal_two
        user5 = 1 / math.log2(5)
        assert report.metrics["NDCG@5"] == pytest.approx((user4 + user5) / 2)

    def test_oracle_scores_one(self, ratings_file):
        split = split_strong(load_interactions(ratings_file), seed=0)
        heldout = split.groups["test"].heldout
        report = evaluate_strong(lambda rows: heldout.toarray(), split)
        assert report.metrics["Recall@100"] == 1.0
        assert report.metrics["NDCG@100"] == pytest.approx(1.0, abs=1e-12)

    def test_foldin_items_are_masked(self):
        split = popularity_split()
        loud = evaluate_strong(lambda rows: 100.0 * rows.toarray(), split, cutoffs=(2, 5))
        flat = evaluate_strong(lambda rows: np.zeros(rows.shape), split, cutoffs=(2, 5))
        assert loud.metrics == flat.metrics

    def test_unknown_group(self):
        with pytest.raises(DataError):
            evaluate_strong(lambda rows: np.zeros(rows.shape), popularity_split(), group="val")


def sample_report(**overrides):
    fields = dict(
        protocol="weak",
        cutoffs=[10, 1, 5],
        metrics={"HR@1": 0.2, "NDCG@1": 0.2, "HR@5": 0.5, "NDCG@5": 0.35, "HR@10": 0.7, "NDCG@10": 0.41},
        n_users=10,
        seed=0,
        model="ae",
        wall_time=1.5,
        config_hash="abc",
    )
    fields.update(overrides)
    return EvalReport(**fields)


class TestEvalReport:
    def test_cutoffs_are_sorted(self):
        report = sample_report()
        assert report.cutoffs == [1, 5, 10]
        assert report.columns() == ["HR@1", "NDCG@1", "HR@5", "NDCG@5", "HR@10", "NDCG@10"]

    def test_rejects_out_of_range_metric(self):
        with pytest.raises(DataError):
            sample_report(metrics={"HR@1": 1.5})

    def test_rejects_zero_users(self):
        with pytest.raises(DataError):
            sample_report(n_users=0)

    def test_json_and_csv(self, tmp_path):
        report = sample_report()
        paths = report.write(str(tmp_path))
        report.write(str(tmp_path))
        with open(paths["json"], encoding="utf-8") as f:
            assert json.load(f)["config_hash"] == "abc"
        assert EvalReport.read(paths["json"]) == report
        frame = pd.read_csv(paths["csv"])
        assert len(frame) == 2
        assert list(frame.columns[:6]) == ["model", "config_hash", "protocol", "group", "seed", "n_users"]
        assert frame["HR@10"].tolist() == [0.7, 0.7]

    def test_unreadable_report(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(DataError):
            EvalReport.read(str(path))
