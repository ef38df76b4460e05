"""Tests for neighbour queries and the relative encoding."""

import numpy as np
import pytest

from pothole_seg.domain.geometry import (
    NeighborIndex,
    centroid_offset,
    knn,
    nearest_index,
    relative_neighbor_encoding,
)
from pothole_seg.shared.exceptions import GeometryError


def brute_force_knn(positions: np.ndarray, k: int) -> np.ndarray:
    dist = np.array([[np.sum((p - q) ** 2) for q in positions] for p in positions])
    return np.argsort(dist, axis=1, kind="stable")[:, :k]


class TestKnn:
    """Test knn."""

    def test_k_one_is_self(self, rng):
        """Test every point's only neighbour is itself."""
        positions = rng.normal(size=(20, 3))
        assert np.array_equal(knn(positions, 1).indices[:, 0], np.arange(20))

    def test_collinear_points(self):
        """Test points at x=0,1,3 with k=2."""
        positions = np.array([[0.0, 0, 0], [1.0, 0, 0], [3.0, 0, 0]])
        assert list(knn(positions, 2).indices[1]) == [1, 0]

    def test_duplicate_points_order_by_index(self):
        """Test a duplicate with a lower index precedes the point itself."""
        positions = np.array([[0.0, 0, 0], [5.0, 0, 0], [0.0, 0, 0]])
        indices = knn(positions, 2).indices
        assert list(indices[0]) == [0, 2]
        assert list(indices[2]) == [0, 2]

    def test_matches_brute_force(self, rng):
        """Test a 200-point cloud with k=16 against a full distance sort."""
        positions = rng.normal(size=(200, 3))
        assert np.array_equal(knn(positions, 16).indices, brute_force_knn(positions, 16))

    def test_chunk_boundary(self, rng):
        """Test clouds larger than one distance chunk."""
        positions = rng.normal(size=(300, 3))
        assert np.array_equal(knn(positions, 4).indices, brute_force_knn(positions, 4))

    def test_ties_prefer_lower_index(self):
        """Test equidistant neighbours keep index order."""
        positions = np.array([[0.0, 0, 0], [1.0, 0, 0], [-1.0, 0, 0]])
        assert list(knn(positions, 3).indices[0]) == [0, 1, 2]

    @pytest.mark.parametrize("k", [0, 4])
    def test_invalid_k(self, k):
        """Test k outside [1, N] is rejected."""
        with pytest.raises(GeometryError):
            knn(np.zeros((3, 3)), k)


class TestNearestIndex:
    """Test nearest_index."""

    def test_nearest(self):
        """Test each query finds its closest point."""
        points = np.array([[0.0, 0, 0], [10.0, 0, 0]])
        queries = np.array([[1.0, 0, 0], [9.0, 0, 0], [4.0, 0, 0]])
        assert list(nearest_index(queries, points)) == [0, 1, 0]


class TestCentroidOffset:
    """Test centroid_offset."""

    def test_symmetric_neighbourhood(self):
        """Test neighbours symmetric about the point give L = 0."""
        positions = np.array([[0.0, 0, 0], [1.0, 0, 0], [-1.0, 0, 0]])
        nbrs = NeighborIndex(np.array([[0, 1, 2], [1, 0, 2], [2, 0, 1]]))
        _, spread = centroid_offset(positions, nbrs)
        assert spread[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_hand_example(self):
        """Test neighbours (1,0,0) and (3,0,0) of the origin."""
        positions = np.array([[0.0, 0, 0], [1.0, 0, 0], [3.0, 0, 0]])
        nbrs = NeighborIndex(np.array([[1, 2], [1, 2], [1, 2]]))
        centroids, spread = centroid_offset(positions, nbrs)
        assert np.allclose(centroids[0], [2.0, 0.0, 0.0])
        assert spread[0, 0] == pytest.approx(2.0)

    def test_matches_loop(self, rng):
        """Test L against a per-point loop."""
        positions = rng.normal(size=(40, 3))
        nbrs = knn(positions, 6)
        _, spread = centroid_offset(positions, nbrs)
        for i in range(40):
            centroid = sum(positions[j] for j in nbrs.indices[i]) / 6
            assert abs(spread[i, 0] - np.sqrt(np.sum((positions[i] - centroid) ** 2))) < 1e-9


class TestRelativeEncoding:
    """Test relative_neighbor_encoding."""

    def test_single_point(self):
        """Test the self-neighbourhood of one point."""
        positions = np.array([[1.0, 2.0, 3.0]])
        r = relative_neighbor_encoding(positions, knn(positions, 1))
        assert np.array_equal(r[0, 0], [0, 0, 0, 1, 2, 3, 0, 0])

    def test_offsets_sum_to_zero(self, rng):
        """Test offsets from the centroid cancel over each neighbourhood."""
        positions = rng.normal(size=(30, 3))
        r = relative_neighbor_encoding(positions, knn(positions, 5))
        assert np.allclose(r[:, :, 0:3].sum(axis=1), 0.0, atol=1e-9)

    def test_norm_channel(self, rng):
        """Test channel 6 is the norm of channels 0-2."""
        positions = rng.normal(size=(30, 3))
        r = relative_neighbor_encoding(positions, knn(positions, 5))
        assert np.allclose(r[:, :, 6], np.linalg.norm(r[:, :, 0:3], axis=2))

    def test_shape_and_constant_channels(self, rng):
        """Test centroid and L channels are constant across neighbours."""
        positions = rng.normal(size=(12, 3))
        r = relative_neighbor_encoding(positions, knn(positions, 4))
        assert r.shape == (12, 4, 8)
        assert np.allclose(r[:, :, 3:6], r[:, :1, 3:6])
        assert np.allclose(r[:, :, 7], r[:, :1, 7])
