"""Tests for cross-entropy and class weighting."""

import math

import numpy as np
import pytest

from pothole_seg.domain.autodiff import Tape, Tensor, gradient_check
from pothole_seg.domain.services import cross_entropy, inverse_frequency_weights, log_softmax
from pothole_seg.shared.exceptions import CloudValidationError, DimensionError


class TestCrossEntropy:
    """Test cross_entropy."""

    def test_uniform_logits(self):
        """Test uniform logits over four classes give ln 4."""
        loss = cross_entropy(Tensor(np.zeros((5, 4))), [0, 1, 2, 3, 0])
        assert loss.item() == pytest.approx(math.log(4.0))

    def test_saturated_correct_logits(self):
        """Test +-30 one-hot logits on the right class give a near-zero loss."""
        labels = np.array([0, 1, 1, 0])
        logits = np.where(np.eye(2)[labels] > 0, 30.0, -30.0)
        assert cross_entropy(Tensor(logits), labels).item() < 1e-9

    def test_large_logits_stay_finite(self):
        """Test max shifting keeps huge logits finite."""
        loss = cross_entropy(Tensor([[1000.0, -1000.0]]), [1])
        assert math.isfinite(loss.item())
        assert loss.item() == pytest.approx(2000.0)

    def test_gradient(self, rng):
        """Test gradients against finite differences."""
        logits = Tensor(rng.normal(size=(6, 3)))
        labels = rng.integers(0, 3, size=6)
        assert gradient_check(lambda: cross_entropy(logits, labels), [logits]).passed(1e-4)

    def test_weighted_gradient(self, rng):
        """Test weighted gradients against finite differences."""
        logits = Tensor(rng.normal(size=(6, 2)))
        labels = np.array([0, 1, 1, 0, 0, 0])
        weights = np.array([0.5, 2.0])
        assert gradient_check(lambda: cross_entropy(logits, labels, weights), [logits]).passed(1e-4)

    def test_weighted_mean(self):
        """Test weights act as per-point multiplicities."""
        logits = np.array([[2.0, 0.0], [0.0, 1.0]])
        log_probs = log_softmax(logits)
        expected = -(1.0 * log_probs[0, 0] + 3.0 * log_probs[1, 1]) / 4.0
        loss = cross_entropy(Tensor(logits), [0, 1], np.array([1.0, 3.0]))
        assert loss.item() == pytest.approx(expected)

    def test_is_differentiable_scalar(self):
        """Test the loss is a 0-d tensor on the tape."""
        logits = Tensor(np.zeros((2, 2)), requires_grad=True)
        with Tape() as tape:
            loss = cross_entropy(logits, [0, 1])
        assert loss.shape == ()
        assert tape.ops() == ["cross_entropy"]

    def test_label_out_of_range(self):
        """Test labels must be class ids."""
        with pytest.raises(CloudValidationError):
            cross_entropy(Tensor(np.zeros((2, 2))), [0, 2])

    def test_label_count(self):
        """Test one label per row is required."""
        with pytest.raises(DimensionError):
            cross_entropy(Tensor(np.zeros((3, 2))), [0, 1])


class TestClassWeights:
    """Test inverse_frequency_weights."""

    def test_inverse_frequency(self):
        """Test weights are total over present classes times count."""
        weights = inverse_frequency_weights([np.array([0, 0, 0, 1])], 2)
        assert np.allclose(weights, [4.0 / 6.0, 2.0])

    def test_missing_class_weight_one(self):
        """Test absent classes keep weight 1."""
        weights = inverse_frequency_weights([np.array([0, 0]), np.array([2])], 3)
        assert weights[1] == 1.0
        assert np.allclose(weights[[0, 2]], [3.0 / 4.0, 3.0 / 2.0])
