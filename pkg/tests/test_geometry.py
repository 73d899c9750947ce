import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_distances, naive_knn
from topodim.errors import InvalidArgumentError, InvalidInputError
from topodim.geometry import (
    DistanceMatrix,
    PointCloud,
    condensed_index,
    enclosing_radius,
    knn,
    pairwise_distances,
    subsample,
    subsample_indices,
)

coords = st.floats(min_value=-100, max_value=100, allow_nan=False)
clouds = st.integers(2, 9).flatmap(
    lambda n: st.integers(1, 4).flatmap(lambda d: arrays(np.float64, (n, d), elements=coords))
)


def test_three_four_five():
    assert pairwise_distances([[0, 0], [3, 4]])[0, 1] == 5.0


def test_identical_points_zero():
    assert pairwise_distances([[1, 1], [1, 1]])[0, 1] == 0.0


@pytest.mark.parametrize("metric", ["euclidean", "manhattan", "chebyshev", "cosine"])
def test_matches_double_loop(metric):
    pts = np.random.default_rng(7).normal(size=(7, 3))
    dm = pairwise_distances(pts, metric)
    ref = naive_distances(pts, metric)
    assert len(dm.entries) == 21
    for (i, j), v in ref.items():
        assert dm[i, j] == pytest.approx(v, abs=1e-12)
        assert dm[j, i] == dm[i, j]


def test_condensed_index_layout():
    n = 6
    expected = [(i, j) for i in range(n) for j in range(i + 1, n)]
    assert [condensed_index(n, i, j) for i, j in expected] == list(range(len(expected)))


def test_cosine_zero_row_named():
    with pytest.raises(InvalidInputError, match="row 2"):
        pairwise_distances([[1, 0], [0, 1], [0, 0]], "cosine")


def test_cloud_rejects_nan():
    with pytest.raises(InvalidInputError):
        PointCloud([[0.0, np.nan]])


def test_unknown_metric():
    with pytest.raises(InvalidArgumentError):
        pairwise_distances([[0], [1]], "hamming")


@given(clouds)
@settings(max_examples=50, deadline=None)
def test_triangle_inequality_and_symmetry(pts):
    sq = pairwise_distances(pts).square()
    assert np.allclose(sq, sq.T)
    n = len(sq)
    for k in range(n):
        assert np.all(sq <= sq[:, [k]] + sq[[k], :] + 1e-9)


@given(clouds, st.sampled_from(["euclidean", "manhattan", "chebyshev"]), st.randoms())
@settings(max_examples=50, deadline=None)
def test_coordinate_permutation_invariance(pts, metric, rnd):
    perm = list(range(pts.shape[1]))
    rnd.shuffle(perm)
    a = pairwise_distances(pts, metric).entries
    b = pairwise_distances(pts[:, perm], metric).entries
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("metric", ["euclidean", "manhattan", "chebyshev"])
def test_scaling_scales_distances(metric):
    pts = np.random.default_rng(1).random((12, 3))
    a = pairwise_distances(pts, metric).entries
    b = pairwise_distances(pts * 2.5, metric).entries
    assert np.allclose(b, 2.5 * a, rtol=1e-14)


def test_knn_collinear():
    t = knn(pairwise_distances([[0.0], [1.0], [3.0]]), 1)
    assert t.indices[:, 0].tolist() == [1, 0, 1]
    assert t.distances[:, 0].tolist() == [1.0, 1.0, 2.0]


def test_knn_full_row_is_sorted_distance_list():
    pts = np.random.default_rng(3).random((9, 2))
    dm = pairwise_distances(pts)
    t = knn(dm, 8)
    sq = dm.square()
    for i in range(9):
        assert t.distances[i].tolist() == sorted(np.delete(sq[i], i).tolist())


def test_knn_matches_sort_oracle():
    pts = np.random.default_rng(11).random((50, 3))
    dm = pairwise_distances(pts)
    t = knn(dm, 5)
    idx, dist = naive_knn(dm.square(), 5)
    assert np.array_equal(t.indices, idx)
    assert np.array_equal(t.distances, dist)


def test_knn_ties_lower_index_first():
    t = knn(pairwise_distances([[0.0], [1.0], [-1.0], [2.0]]), 2)
    assert t.indices[0].tolist() == [1, 2]


def test_knn_k_too_large():
    with pytest.raises(InvalidArgumentError):
        knn(pairwise_distances([[0.0], [1.0]]), 2)


def test_subsample_full_is_permutation():
    pts = np.arange(20.0).reshape(10, 2)
    out = subsample(pts, 10, seed=4)
    assert sorted(map(tuple, out.points)) == sorted(map(tuple, pts))


def test_subsample_single_row():
    pts = np.arange(20.0).reshape(10, 2)
    row = subsample(pts, 1, seed=0).points[0]
    assert any(np.array_equal(row, p) for p in pts)


def test_subsample_reproducible_and_seed_sensitive():
    a = subsample_indices(100, 50, 123)
    assert np.array_equal(a, subsample_indices(100, 50, 123))
    assert set(a.tolist()) != set(subsample_indices(100, 50, 124).tolist())
    assert len(set(a.tolist())) == 50


def test_subsample_too_many():
    with pytest.raises(InvalidArgumentError):
        subsample(np.zeros((3, 1)), 4, seed=0)


def test_enclosing_radius_cases():
    assert enclosing_radius(pairwise_distances([[0.0], [1.0], [3.0]])) == 2.0
    assert enclosing_radius(pairwise_distances([[5.0, 5.0]])) == 0.0
    pts = np.random.default_rng(5).random((30, 2))
    sq = pairwise_distances(pts).square()
    assert enclosing_radius(pairwise_distances(pts)) == min(max(row) for row in sq.tolist())


def test_distance_matrix_validation():
    with pytest.raises(InvalidInputError):
        DistanceMatrix(3, [1.0, 2.0])
    with pytest.raises(InvalidInputError):
        DistanceMatrix(2, [-1.0])
