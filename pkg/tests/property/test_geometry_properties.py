"""Property-based tests for neighbourhoods and sampling using Hypothesis."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.strategies import composite

from pothole_seg.domain.autodiff import Tensor
from pothole_seg.domain.geometry import (
    PointCloud,
    centroid_offset,
    coarse_count,
    knn,
    nn_upsample,
    random_subsample,
    relative_neighbor_encoding,
)


@composite
def clouds(draw, min_points=1, max_points=40):
    """Random continuous point sets (distinct almost surely)."""
    n = draw(st.integers(min_value=min_points, max_value=max_points))
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    scale = draw(st.sampled_from([1e-3, 1.0, 50.0]))
    return np.random.default_rng(seed).normal(scale=scale, size=(n, 3))


@composite
def cloud_and_k(draw):
    positions = draw(clouds())
    k = draw(st.integers(min_value=1, max_value=positions.shape[0]))
    return positions, k


class TestKnnProperties:
    """Property-based tests for knn."""

    @settings(max_examples=60, deadline=None)
    @given(cloud_and_k())
    def test_matches_brute_force(self, case):
        """Test neighbour distances equal the k smallest brute-force distances."""
        positions, k = case
        nbrs = knn(positions, k)
        dist = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=2)
        expected = np.sort(dist, axis=1)[:, :k]
        actual = np.take_along_axis(dist, nbrs.indices, axis=1)
        assert np.allclose(actual, expected, rtol=0.0, atol=1e-12 * max(1.0, dist.max()))

    @settings(max_examples=60, deadline=None)
    @given(cloud_and_k())
    def test_rows_sorted_and_self_first(self, case):
        """Test rows are nondecreasing in distance and start with the point itself."""
        positions, k = case
        indices = knn(positions, k).indices
        dist = np.linalg.norm(positions[indices] - positions[:, None, :], axis=2)
        assert np.all(np.diff(dist, axis=1) >= 0.0)
        assert np.array_equal(indices[:, 0], np.arange(positions.shape[0]))

    @settings(max_examples=40, deadline=None)
    @given(clouds(), st.integers(min_value=0, max_value=2**16))
    def test_permutation_equivariant(self, positions, seed):
        """Test permuting the points permutes the neighbour sets."""
        k = min(4, positions.shape[0])
        perm = np.random.default_rng(seed).permutation(positions.shape[0])
        base = knn(positions, k).indices
        moved = knn(positions[perm], k).indices
        inverse = np.argsort(perm)
        for i, p in enumerate(perm):
            assert set(inverse[base[p]].tolist()) == set(moved[i].tolist())


class TestEncodingProperties:
    """Property-based tests for the relative neighbour encoding."""

    @settings(max_examples=50, deadline=None)
    @given(cloud_and_k(), st.floats(min_value=-100.0, max_value=100.0))
    def test_translation(self, case, shift):
        """Test only the centroid channels move under translation."""
        positions, k = case
        nbrs = knn(positions, k)
        a = relative_neighbor_encoding(positions, nbrs)
        b = relative_neighbor_encoding(positions + shift, nbrs)
        tol = 1e-9 * max(1.0, abs(shift), np.abs(positions).max())
        assert np.allclose(a[..., [0, 1, 2, 6, 7]], b[..., [0, 1, 2, 6, 7]], atol=tol)
        assert np.allclose(b[..., 3:6] - a[..., 3:6], shift, atol=tol)

    @settings(max_examples=50, deadline=None)
    @given(cloud_and_k())
    def test_spread_is_distance_to_centroid(self, case):
        """Test L is the non-negative distance from a point to its centroid."""
        positions, k = case
        nbrs = knn(positions, k)
        centroids, spread = centroid_offset(positions, nbrs)
        assert np.all(spread >= 0.0)
        assert np.allclose(spread[:, 0], np.linalg.norm(positions - centroids, axis=1))
        if k == 1:
            assert np.all(spread == 0.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=3, max_value=24), st.floats(min_value=0.1, max_value=10.0))
    def test_closed_loop_centroid_at_centre(self, n, radius):
        """Test a full regular loop has its centroid at the centre, at distance r from every point."""
        angles = 2.0 * np.pi * np.arange(n) / n
        positions = np.column_stack([radius * np.cos(angles), radius * np.sin(angles), np.zeros(n)])
        centroids, spread = centroid_offset(positions, knn(positions, n))
        assert np.allclose(centroids, 0.0, atol=1e-9 * radius)
        assert np.allclose(spread, radius)


class TestSamplingProperties:
    """Property-based tests for subsampling and upsampling."""

    @settings(max_examples=50, deadline=None)
    @given(clouds(), st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**16))
    def test_kept_set_size_and_uniqueness(self, positions, ratio, seed):
        """Test ceil(N/ratio) distinct kept points."""
        coarse, trace = random_subsample(PointCloud(positions), ratio, np.random.default_rng(seed))
        assert coarse.num_points == coarse_count(positions.shape[0], ratio)
        assert np.unique(trace.kept).size == trace.kept.size
        assert np.array_equal(coarse.positions, positions[trace.kept])

    @settings(max_examples=50, deadline=None)
    @given(clouds(), st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**16))
    def test_upsample_restores_kept_rows(self, positions, ratio, seed):
        """Test every kept point gets its own coarse row back."""
        coarse, trace = random_subsample(PointCloud(positions), ratio, np.random.default_rng(seed))
        features = Tensor(np.arange(coarse.num_points, dtype=np.float64)[:, None])
        fine = nn_upsample(features, trace, positions.shape[0]).data[:, 0]
        assert np.array_equal(fine[trace.kept], np.arange(coarse.num_points))
        assert set(np.unique(fine).tolist()) <= set(range(coarse.num_points))
