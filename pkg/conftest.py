import os

import numpy as np
import pytest

from pysrc.helpers.recdata.loading import from_rows

# 5 users x 7 items, every user has at least two items
TOY_ROWS = [
    [0, 1, 2],
    [1, 3, 4],
    [0, 2, 5, 6],
    [3, 4, 6],
    [0, 5],
]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-data runs, skipped unless HYPREC_ML1M is set")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_matrix():
    return from_rows(TOY_ROWS, 7)


def synthetic_rows(n_users=60, n_items=40, n_clusters=4, seed=7):
    """Users drawn from item clusters, so models have structure to learn."""
    rng = np.random.default_rng(seed)
    cluster_of = np.arange(n_items) % n_clusters
    rows = []
    for u in range(n_users):
        own = np.flatnonzero(cluster_of == u % n_clusters)
        picked = rng.choice(own, size=min(len(own), 5 + u % 4), replace=False)
        extra = rng.choice(n_items, size=1)
        rows.append(sorted(set(int(i) for i in np.concatenate([picked, extra]))))
    return rows


def write_ratings(path, rows, sep="::"):
    """MovieLens-style user::item::rating::timestamp, item k of user u stamped u*100+k."""
    with open(path, "w", encoding="utf-8") as f:
        for u, items in enumerate(rows):
            for k, item in enumerate(items):
                f.write(f"{u + 1}{sep}{item + 1}{sep}{4}{sep}{u * 100 + k}\n")
    return str(path)


@pytest.fixture
def ratings_file(tmp_path):
    return write_ratings(os.path.join(tmp_path, "ratings.dat"), synthetic_rows())
