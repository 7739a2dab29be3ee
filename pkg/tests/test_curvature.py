import json

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.spatial.distance import pdist, squareform

from pysrc.errors import DataError
from pysrc.helpers.curvature.delta import delta_basepoint, estimate_delta, max_min_product
from pysrc.helpers.curvature.estimate import DeltaEstimate, curvature_from_delta, estimate_c
from pysrc.helpers.curvature.svd import item_embeddings, truncated_svd
from pysrc.helpers.recdata.loading import from_rows

from conftest import synthetic_rows


def brute_force_delta(D, w=0):
    G = 0.5 * (D[w][:, None] + D[w][None, :] - D)
    # min(G_xz, G_zy) over every z, then the worst triple
    best = np.max(np.minimum(G[:, :, None], G.T[None, :, :]), axis=1)
    return max(0.0, float(np.max(best - G)))


def random_metric(rng, n=30):
    points = rng.normal(size=(n, rng.integers(2, 6)))
    return squareform(pdist(points))


def tree_metric():
    # star: center 0, leaves 1..3, unit edges
    return np.array(
        [
            [0.0, 1.0, 1.0, 1.0],
            [1.0, 0.0, 2.0, 2.0],
            [1.0, 2.0, 0.0, 2.0],
            [1.0, 2.0, 2.0, 0.0],
        ]
    )


def random_tree_metric(rng, n=12):
    """Shortest-path distances of a random weighted tree."""
    parent = [None] + [int(rng.integers(0, i)) for i in range(1, n)]
    weight = rng.uniform(0.5, 2.0, size=n)
    depth_path = []
    for v in range(n):
        path, u = {}, v
        dist = 0.0
        while u is not None:
            path[u] = dist
            if parent[u] is not None:
                dist += weight[u]
            u = parent[u]
        depth_path.append(path)
    D = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            common = [u for u in depth_path[a] if u in depth_path[b]]
            D[a, b] = min(depth_path[a][u] + depth_path[b][u] for u in common)
    return D


class TestMaxMinProduct:
    def test_small_example(self):
        A = np.array([[1.0, 4.0], [2.0, 0.0]])
        B = np.array([[3.0, 1.0], [2.0, 5.0]])
        expected = np.array([[2.0, 4.0], [2.0, 1.0]])
        np.testing.assert_array_equal(max_min_product(A, B), expected)


class TestDeltaBasepoint:
    def test_matches_brute_force_on_random_metrics(self, rng):
        for _ in range(50):
            D = random_metric(rng)
            w = int(rng.integers(0, D.shape[0]))
            assert delta_basepoint(D, w) == brute_force_delta(D, w)

    def test_star_tree_is_zero(self):
        assert delta_basepoint(tree_metric(), 0) == 0.0
        assert delta_basepoint(tree_metric(), 2) == 0.0

    def test_path_is_zero(self):
        D = squareform(pdist(np.array([[0.0], [1.0], [2.5], [4.0]])))
        assert delta_basepoint(D, 1) == pytest.approx(0.0, abs=1e-12)

    def test_random_trees_are_zero(self, rng):
        for _ in range(5):
            D = random_tree_metric(rng)
            assert delta_basepoint(D, int(rng.integers(0, D.shape[0]))) <= 1e-9

    def test_unit_square(self):
        D = squareform(pdist(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])))
        assert delta_basepoint(D, 0) == pytest.approx(brute_force_delta(D, 0))
        assert delta_basepoint(D, 0) > 0

    def test_scale_covariant(self, rng):
        D = random_metric(rng)
        assert delta_basepoint(3.5 * D) == pytest.approx(3.5 * delta_basepoint(D), rel=1e-12)

    @pytest.mark.parametrize(
        "D",
        [
            np.ones((3, 4)),
            np.array([[0.0, -1.0], [-1.0, 0.0]]),
            np.array([[0.0, 1.0], [2.0, 0.0]]),
            np.array([[1.0, 1.0], [1.0, 1.0]]),
        ],
        ids=["not-square", "negative", "asymmetric", "diagonal"],
    )
    def test_rejects_invalid_matrices(self, D):
        with pytest.raises(DataError):
            delta_basepoint(D)


class TestEstimateDelta:
    def test_collinear_points(self, rng):
        points = np.outer(rng.uniform(-3, 3, size=50), [1.0, 2.0])
        stats = estimate_delta(points, sample_size=20, trials=4, seed=0)
        assert stats.delta_trials == pytest.approx([0.0] * 4, abs=1e-9)
        assert stats.delta_rel == pytest.approx(0.0, abs=1e-9)

    def test_relative_delta_is_scale_invariant(self, rng):
        points = rng.normal(size=(80, 3))
        a = estimate_delta(points, sample_size=40, trials=3, seed=5)
        b = estimate_delta(7.0 * points, sample_size=40, trials=3, seed=5)
        assert a.delta_rel == pytest.approx(b.delta_rel, abs=1e-9)

    def test_raw_delta_scales(self, rng):
        points = rng.normal(size=(40, 3))
        a = estimate_delta(points, sample_size=40, trials=2, seed=5, relative=False)
        b = estimate_delta(2.0 * points, sample_size=40, trials=2, seed=5, relative=False)
        assert b.delta_rel == pytest.approx(2.0 * a.delta_rel, rel=1e-9)

    def test_whole_population_when_sample_is_large(self, rng):
        r = np.sqrt(rng.uniform(size=60))
        theta = rng.uniform(0, 2 * np.pi, size=60)
        points = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
        stats = estimate_delta(points, sample_size=1500, trials=3, seed=1)
        D = squareform(pdist(points))
        per_base = [2 * brute_force_delta(D, w) / D.max() for w in range(60)]
        assert stats.sample_size == 60
        assert min(per_base) - 1e-12 <= stats.delta_rel <= max(per_base) + 1e-12

    def test_same_seed_same_result(self, rng):
        points = rng.normal(size=(100, 4))
        a = estimate_delta(points, sample_size=30, trials=3, seed=9)
        b = estimate_delta(points, sample_size=30, trials=3, seed=9, workers=3)
        assert a.delta_trials == b.delta_trials

    def test_all_degenerate_trials_raise(self):
        with pytest.raises(DataError):
            estimate_delta(np.zeros((10, 2)), sample_size=5, trials=2)

    def test_too_few_points(self):
        with pytest.raises(DataError):
            estimate_delta(np.ones((3, 2)))


class TestCurvatureFormula:
    def test_fixed_point(self):
        assert curvature_from_delta(0.144) == pytest.approx(1.0)

    def test_pinterest_scale(self):
        assert curvature_from_delta(0.72) == pytest.approx(0.04)

    def test_zero_delta_raises(self):
        with pytest.raises(DataError):
            curvature_from_delta(0.0)


class TestSvd:
    def test_recovers_exact_low_rank(self, rng):
        A = rng.normal(size=(40, 3)) @ rng.normal(size=(3, 25))
        factors = truncated_svd(A, 3, seed=0)
        np.testing.assert_allclose(factors.U * factors.S @ factors.V.T, A, atol=1e-8)
        assert np.all(np.diff(factors.S) <= 0)

    def test_close_to_dense_svd(self):
        A = sp.random(200, 150, density=0.1, format="csr", random_state=np.random.default_rng(7))
        factors = truncated_svd(A, 20, seed=0)
        dense = A.toarray()
        U, S, Vt = np.linalg.svd(dense, full_matrices=False)
        best = np.linalg.norm(dense - (U[:, :20] * S[:20]) @ Vt[:20])
        err = np.linalg.norm(dense - (factors.U * factors.S) @ factors.V.T)
        assert err <= 1.05 * best
        assert factors.S[0] == pytest.approx(S[0], rel=1e-4)
        np.testing.assert_allclose(factors.U.T @ factors.U, np.eye(20), atol=1e-6)
        np.testing.assert_allclose(factors.V.T @ factors.V, np.eye(20), atol=1e-6)
        assert np.all(np.diff(factors.S) <= 0)

    def test_seed_stable(self, toy_matrix):
        a = truncated_svd(toy_matrix.matrix, 3, seed=4)
        b = truncated_svd(toy_matrix.matrix, 3, seed=4)
        np.testing.assert_array_equal(a.V, b.V)

    def test_rank_too_large(self, toy_matrix):
        with pytest.raises(DataError):
            truncated_svd(toy_matrix.matrix, 6)

    def test_embeddings(self, toy_matrix):
        factors = truncated_svd(toy_matrix.matrix, 2)
        assert item_embeddings(factors, "VS").shape == (7, 2)
        assert item_embeddings(factors, "US").shape == (5, 2)
        with pytest.raises(ValueError):
            item_embeddings(factors, "SV")


class TestEstimateC:
    def test_pipeline_on_synthetic_data(self):
        m = from_rows(synthetic_rows(), 40)
        est = estimate_c(m.matrix, rank=8, sample_size=30, trials=3, seed=0)
        assert len(est.delta_trials) == 3
        assert all(d >= 0 for d in est.delta_trials)
        assert all(d > 0 for d in est.diam_trials)
        assert est.c == pytest.approx((0.144 / est.delta_rel) ** 2)
        assert est.seed == 0

    def test_json_roundtrip(self, tmp_path):
        m = from_rows(synthetic_rows(), 40)
        est = estimate_c(m.matrix, rank=5, sample_size=25, trials=2, seed=3, raw_delta=True)
        path = tmp_path / "curvature.json"
        est.write(str(path))
        data = json.loads(path.read_text())
        assert data["raw_delta"] is True
        assert DeltaEstimate.from_dict(data) == est
