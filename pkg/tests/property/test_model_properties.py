"""Property-based tests for network blocks, loss and metrics using Hypothesis."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.strategies import composite

from pothole_seg.domain.autodiff import ParameterRegistry, Tensor
from pothole_seg.domain.models import EvalReport
from pothole_seg.domain.modules import FeatureAugmenterBlock
from pothole_seg.domain.services import confusion_matrix, cross_entropy

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@composite
def labelings(draw):
    """Paired truth and prediction vectors over a small class count."""
    num_classes = draw(st.integers(min_value=2, max_value=5))
    n = draw(st.integers(min_value=1, max_value=60))
    rng = np.random.default_rng(draw(seeds))
    return num_classes, rng.integers(0, num_classes, size=n), rng.integers(0, num_classes, size=n)


class TestFeatureAugmenterProperties:
    """Property-based tests for the feature augmenter."""

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=1, max_value=30), st.integers(min_value=1, max_value=6), seeds)
    def test_permutation_equivariant(self, n, d, seed):
        """Test shuffling rows shuffles the output rows the same way."""
        rng = np.random.default_rng(seed)
        block = FeatureAugmenterBlock(d, 2, ParameterRegistry(), "fa", rng)
        x = rng.normal(size=(n, d))
        perm = rng.permutation(n)
        a = block(Tensor(x)).data
        b = block(Tensor(x[perm])).data
        assert np.allclose(b, a[perm], atol=1e-12)


class TestLossProperties:
    """Property-based tests for cross-entropy."""

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=1, max_value=20), st.integers(min_value=2, max_value=6), seeds)
    def test_non_negative_and_shift_invariant(self, n, c, seed):
        """Test the loss is non-negative and ignores a per-row logit shift."""
        rng = np.random.default_rng(seed)
        logits = rng.normal(scale=5.0, size=(n, c))
        labels = rng.integers(0, c, size=n)
        shift = rng.normal(scale=100.0, size=(n, 1))
        base = cross_entropy(Tensor(logits), labels).item()
        moved = cross_entropy(Tensor(logits + shift), labels).item()
        assert base >= 0.0
        assert math.isclose(base, moved, rel_tol=1e-9, abs_tol=1e-9)


class TestMetricProperties:
    """Property-based tests for confusion-derived metrics."""

    @settings(max_examples=80, deadline=None)
    @given(labelings())
    def test_recomputed_from_sets(self, case):
        """Test OA and per-class IoU agree with direct set arithmetic."""
        num_classes, truth, predicted = case
        report = EvalReport.from_confusion(confusion_matrix(truth, predicted, num_classes))
        assert math.isclose(report.oa, float(np.mean(truth == predicted)))
        for c in range(num_classes):
            inter = np.sum((truth == c) & (predicted == c))
            union = np.sum((truth == c) | (predicted == c))
            if union == 0:
                assert math.isnan(report.per_class_iou[c])
            else:
                assert math.isclose(report.per_class_iou[c], inter / union)

    @settings(max_examples=50, deadline=None)
    @given(labelings())
    def test_bounds(self, case):
        """Test every score lies in [0, 1] and the matrix counts each point once."""
        num_classes, truth, predicted = case
        matrix = confusion_matrix(truth, predicted, num_classes)
        report = EvalReport.from_confusion(matrix)
        assert matrix.sum() == truth.size
        for value in (report.oa, report.macc, report.miou):
            assert 0.0 <= value <= 1.0

    @settings(max_examples=30, deadline=None)
    @given(labelings())
    def test_perfect_prediction(self, case):
        """Test predicting the truth scores 1.0."""
        num_classes, truth, _ = case
        report = EvalReport.from_confusion(confusion_matrix(truth, truth, num_classes))
        assert report.oa == report.macc == report.miou == 1.0
