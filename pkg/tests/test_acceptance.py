"""
Full-data checks on MovieLens-1M. Point HYPREC_ML1M at ratings.dat to run them:

    HYPREC_ML1M=~/data/ml-1m/ratings.dat pytest -m slow
"""
import os

import numpy as np
import pytest

from pysrc.helpers.curvature.estimate import estimate_c
from pysrc.helpers.evalharness.protocols import evaluate_strong, evaluate_weak
from pysrc.helpers.models.baselines import Popularity, PureSVD
from pysrc.helpers.pipeline.boxplots import box_stats
from pysrc.helpers.pipeline.search_space import SearchSpace
from pysrc.helpers.pipeline.training import train_model
from pysrc.helpers.pipeline.tuning import tune
from pysrc.helpers.recdata.loading import from_csr, load_interactions
from pysrc.helpers.recdata.splitting import split_strong, split_weak
from pysrc.run_config import RunConfig

ML1M = os.environ.get("HYPREC_ML1M")

pytestmark = [
    pytest.mark.slow,
    pytest.mark.skipif(not ML1M, reason="HYPREC_ML1M is not set"),
]


@pytest.fixture(scope="module")
def ml1m():
    return load_interactions(ML1M)


def test_estimated_curvature_brackets_reference(ml1m):
    estimate = estimate_c(ml1m.matrix, rank=100, sample_size=1500, trials=10, seed=0)
    assert 0.0008 <= estimate.c <= 0.0032


def test_puresvd_weak_hit_rate(ml1m):
    split = split_weak(ml1m, seed=0)
    model = PureSVD.fit(split.train.matrix, 64, seed=0)
    report = evaluate_weak(model.score, split)
    assert 0.66 <= report.metrics["HR@10"] <= 0.72


def test_hvae_beats_popularity_on_strong_subsample(ml1m, tmp_path):
    users = np.random.default_rng(0).permutation(ml1m.n_users)[: ml1m.n_users // 10]
    sub = from_csr(ml1m.matrix[np.sort(users)])
    split = split_strong(sub, seed=0)
    config = RunConfig(
        model="hvae",
        protocol="strong",
        c=1.0,
        latent_dim=64,
        lr=1e-3,
        batch_size=128,
        epochs=20,
        quiet=True,
        output_dir=str(tmp_path),
    ).validate()
    result = train_model(config, split, str(tmp_path / "hvae"))

    hvae = evaluate_strong(result.model.score, split)
    popularity = evaluate_strong(Popularity.fit(split.train.matrix).score, split)
    assert hvae.metrics["Recall@100"] > popularity.metrics["Recall@100"]
    assert hvae.metrics["NDCG@100"] > popularity.metrics["NDCG@100"]


# Search-budget comparisons: 40 trials of 20 epochs per run, shared seeds.
# These take a couple of hours on a desktop CPU.

TRIALS = 40
EPOCHS_PER_TRIAL = 20
WORKERS = min(4, os.cpu_count() or 1)
SEARCH_RUNS = {
    "ae": dict(model="ae"),
    "hae-h": dict(model="hae-h", c_policy="estimate"),
    "hae-m": dict(model="hae-m", c_policy="estimate"),
    "hae-m-unit": dict(model="hae-m", c_policy="unit"),
}


@pytest.fixture(scope="module")
def searched(ml1m, tmp_path_factory):
    split = split_weak(ml1m, seed=0)
    root = tmp_path_factory.mktemp("search")
    stats = {}
    for name, settings in SEARCH_RUNS.items():
        config = RunConfig(
            protocol="weak",
            tune_trials=TRIALS,
            epochs_per_trial=EPOCHS_PER_TRIAL,
            seed=0,
            workers=WORKERS,
            quiet=True,
            output_dir=str(root / name),
            **settings,
        ).validate()
        result = tune(config, split, SearchSpace())
        stats[name] = box_stats(result.trials).iloc[0]
    return stats


def test_hyperbolic_autoencoder_beats_euclidean_at_the_median(searched):
    assert searched["hae-m"]["median"] >= searched["ae"]["median"] + 0.05
    assert searched["hae-m"]["median"] >= searched["hae-h"]["median"] - 0.01


def test_estimated_curvature_does_not_regress_against_unit(searched):
    assert searched["hae-m"]["max"] >= searched["hae-m-unit"]["max"] - 0.005
