import numpy as np
import pytest

from ersatz import _kernels
from ersatz.neighbors import count_within, kth_neighbor_radii


@pytest.fixture
def cloud():
    rng = np.random.default_rng(11)
    return rng.standard_normal((300, 3))


def _naive_radius(points, k):
    d = np.max(np.abs(points[:, None, :] - points[None, :, :]), axis=2)
    np.fill_diagonal(d, np.inf)
    return np.sort(d, axis=1)[:, k - 1]


def _naive_count(points, r):
    d = np.max(np.abs(points[:, None, :] - points[None, :, :]), axis=2)
    np.fill_diagonal(d, np.inf)
    return np.sum(d < r[:, None], axis=1)


@pytest.mark.parametrize("k", [1, 3, 7])
def test_knn_radius_1d_both_paths(k):
    rng = np.random.default_rng(k)
    xs = np.sort(rng.standard_normal(500))
    expected = _naive_radius(xs[:, None], k)
    np.testing.assert_array_equal(_kernels._knn_radius_1d_nb(xs, k), expected)
    np.testing.assert_array_equal(_kernels._knn_radius_1d_np(xs, k), expected)


def test_count_within_1d_both_paths():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(400)
    xs = np.sort(x)
    r = rng.uniform(0.01, 0.5, size=400)
    a = _kernels._count_within_1d_nb(xs, x, r)
    b = _kernels._count_within_1d_np(xs, x, r)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a - 1, _naive_count(x[:, None], r))


@pytest.mark.parametrize("k", [1, 5])
def test_brute_radius_both_paths(cloud, k):
    expected = _naive_radius(cloud, k)
    np.testing.assert_array_equal(_kernels._brute_knn_radius_nb(cloud, k), expected)
    np.testing.assert_array_equal(_kernels._brute_knn_radius_np(cloud, k), expected)


def test_brute_count_both_paths(cloud):
    r = np.full(cloud.shape[0], 0.6)
    expected = _naive_count(cloud, r)
    np.testing.assert_array_equal(_kernels._brute_count_within_nb(cloud, r), expected)
    np.testing.assert_array_equal(_kernels._brute_count_within_np(cloud, r), expected)


@pytest.mark.parametrize("dim", [1, 2, 4])
def test_tree_matches_brute(dim):
    rng = np.random.default_rng(dim)
    pts = rng.standard_normal((1500, dim)).cumsum(axis=0)
    ks = [1, 4, 9]
    brute = kth_neighbor_radii(pts, ks, method="brute")
    np.testing.assert_array_equal(kth_neighbor_radii(pts, ks, method="tree"), brute)
    np.testing.assert_array_equal(kth_neighbor_radii(pts, ks, method="auto"), brute)
    r = brute[:, 1]
    expected = count_within(pts, r, method="brute")
    np.testing.assert_array_equal(count_within(pts, r, method="tree"), expected)
    np.testing.assert_array_equal(count_within(pts, r, method="auto"), expected)


def test_count_is_strict_at_ties():
    pts = np.array([0.0, 1.0, 2.0, 3.0])
    # radius exactly 1 must exclude the neighbors at distance 1
    for method in ("auto", "brute", "tree"):
        np.testing.assert_array_equal(count_within(pts, np.ones(4), method), [0, 0, 0, 0])
        np.testing.assert_array_equal(count_within(pts, np.full(4, 1.5), method), [1, 2, 2, 1])


def test_zero_radius_counts_nothing():
    pts = np.zeros((5, 2))
    for method in ("brute", "tree"):
        np.testing.assert_array_equal(count_within(pts, np.zeros(5), method), np.zeros(5))
