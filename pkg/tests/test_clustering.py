import itertools

import numpy as np
import pytest

from hpwl.clustering import kmeans, snap_centroids, sse
from hpwl.dataset import DataMatrix

SQUARE = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])


def best_two_partition(x):
    best = None
    for mask in itertools.product([0, 1], repeat=len(x)):
        labels = np.array(mask)
        if labels.min() == labels.max():
            continue
        means = np.array([x[labels == j].mean(axis=0) for j in (0, 1)])
        cost = sse(x, means, labels)
        if best is None or cost < best[0]:
            best = (cost, labels)
    return best


@pytest.mark.parametrize("seed", [1, 2, 3, 6])
def test_two_clusters_match_exhaustive_oracle(seed):
    # these seeds draw one initial row from each side of the gap
    cost, _ = best_two_partition(SQUARE)
    model = kmeans(DataMatrix(SQUARE), 2, seed=seed)
    assert sse(SQUARE, model.means, model.assignments) == pytest.approx(cost)
    groups = {frozenset(np.flatnonzero(model.assignments == j)) for j in (0, 1)}
    assert groups == {frozenset({0, 1}), frozenset({2, 3})}
    means = sorted(map(tuple, model.means))
    assert means == [(0.0, 0.5), (10.0, 0.5)]


@pytest.mark.parametrize("seed", range(8))
def test_result_is_lloyd_fixed_point(seed):
    model = kmeans(SQUARE, 2, seed=seed)
    d2 = ((SQUARE[:, None, :] - model.means[None]) ** 2).sum(axis=2)
    np.testing.assert_array_equal(model.assignments, np.argmin(d2, axis=1))
    for j in range(2):
        np.testing.assert_allclose(model.means[j], SQUARE[model.assignments == j].mean(axis=0))


def test_m_equals_n_and_one():
    model = kmeans(SQUARE, 4, seed=3)
    np.testing.assert_array_equal(np.sort(model.means, axis=0), np.sort(SQUARE, axis=0))
    assert len(set(model.assignments)) == 4
    model = kmeans(SQUARE, 1, seed=3)
    np.testing.assert_allclose(model.means[0], SQUARE.mean(axis=0))


def test_argument_errors():
    with pytest.raises(ValueError):
        kmeans(SQUARE, 5)
    with pytest.raises(ValueError):
        kmeans(SQUARE, 2, max_iter=0)


def test_sse_non_increasing_and_clusters_nonempty(rng):
    for trial in range(20):
        x = rng.normal(size=(int(rng.integers(20, 80)), 3))
        m = int(rng.integers(2, 10))
        model = kmeans(x, m, seed=trial)
        assert np.all(np.diff(model.sse_trace) <= 1e-9)
        assert set(model.assignments) == set(range(m))


def test_deterministic(rng):
    x = rng.normal(size=(50, 4))
    a, b = kmeans(x, 5, seed=9), kmeans(x, 5, seed=9)
    np.testing.assert_array_equal(a.assignments, b.assignments)
    np.testing.assert_array_equal(a.means, b.means)


def test_snap_exact_rows():
    model = kmeans(SQUARE, 4, seed=0)
    snapped = snap_centroids(SQUARE, model)
    np.testing.assert_array_equal(SQUARE[snapped.centroid_indices], snapped.means)


def test_snap_tie_goes_to_lowest_row():
    model = kmeans(SQUARE, 1, seed=0)
    model.means = np.array([[5.0, 0.5]])
    d2 = ((SQUARE - model.means[0]) ** 2).sum(axis=1)
    assert d2[0] == d2[1] == d2[2] == d2[3] == 25.25
    assert snap_centroids(SQUARE, model).centroid_indices.tolist() == [0]


def test_snap_merges_duplicates():
    model = kmeans(SQUARE, 2, seed=0)
    model.means = np.array([[0.0, 0.1], [0.1, 0.0]])
    snapped = snap_centroids(SQUARE, model)
    assert snapped.n_clusters == 1
    assert snapped.centroid_indices.tolist() == [0]
    assert set(snapped.assignments) == {0}


def test_snapped_rows_are_data_rows(rng):
    x = rng.normal(size=(60, 5))
    snapped = snap_centroids(x, kmeans(x, 6, seed=1))
    assert snapped.n_clusters <= 6
    for j, i in enumerate(snapped.centroid_indices):
        dist = ((x - snapped.means[j]) ** 2).sum(axis=1)
        assert i == np.argmin(dist)
        np.testing.assert_array_equal(snapped.centroids[j], x[i])
