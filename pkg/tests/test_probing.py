from __future__ import annotations

import math

import numpy as np
import pytest

from vorocil.errors import ConfigError, DataError
from vorocil.geometry import LinearProbe, assign_cells, constrain_bias, reduce_to_vd
from vorocil.incremental import compute_prototypes
from vorocil.probing import (
    ProbeConfig,
    cross_entropy_loss,
    loss_and_gradient,
    train_probe,
    train_residual_probe,
)

from conftest import make_blobs


def fd_gradient(loss_fn, W, step=1e-4):
    """Central finite differences of a scalar loss over a weight matrix."""
    grad = np.zeros_like(W)
    for idx in np.ndindex(*W.shape):
        plus = W.copy()
        plus[idx] += step
        minus = W.copy()
        minus[idx] -= step
        grad[idx] = (loss_fn(plus) - loss_fn(minus)) / (2.0 * step)
    return grad


def two_blobs(rng, per_class=100, sep=5.0, sigma=0.5):
    X = np.vstack(
        [
            [-sep, 0.0] + sigma * rng.standard_normal((per_class, 2)),
            [sep, 0.0] + sigma * rng.standard_normal((per_class, 2)),
        ]
    )
    y = np.repeat([0, 1], per_class)
    return X, y


class TestCrossEntropy:
    def test_uniform_softmax_is_log_k(self, rng):
        probe = LinearProbe(weights=np.zeros((2, 3)), biases=np.zeros(2))
        X = rng.standard_normal((10, 3))
        y = rng.integers(0, 2, size=10)
        assert cross_entropy_loss(probe, (X, y)) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_confident_sample(self):
        # logits (10, -10) for the true class: loss = log(1 + e^-20)
        probe = LinearProbe(weights=np.array([[10.0], [-10.0]]), biases=np.zeros(2))
        expected = math.log1p(math.exp(-20.0))
        assert expected == pytest.approx(2.061e-9, rel=1e-3)
        assert cross_entropy_loss(probe, (np.array([[1.0]]), np.array([0]))) == pytest.approx(
            expected, rel=1e-9
        )

    def test_out_of_range_label(self):
        probe = LinearProbe(weights=np.zeros((2, 2)), biases=np.zeros(2))
        with pytest.raises(DataError, match="out of range"):
            cross_entropy_loss(probe, (np.zeros((1, 2)), np.array([5])))

    def test_nonnegative(self, rng):
        for _ in range(20):
            W = rng.standard_normal((3, 4))
            probe = LinearProbe(weights=W, biases=rng.standard_normal(3))
            X = rng.standard_normal((8, 4))
            y = rng.integers(0, 3, size=8)
            assert cross_entropy_loss(probe, (X, y)) >= 0.0


class TestGradients:
    @pytest.mark.parametrize("couple_bias", [False, True])
    def test_matches_central_differences(self, rng, couple_bias):
        for _ in range(20):
            k = int(rng.integers(2, 5))
            n = int(rng.integers(1, 9))
            W = rng.standard_normal((k, n))
            X = rng.standard_normal((12, n))
            y = rng.integers(0, k, size=12)
            if couple_bias:
                def loss_fn(w):
                    return loss_and_gradient(w, X, y, biases=None, couple_bias=True)[0]
                _, grad = loss_and_gradient(W, X, y, biases=None, couple_bias=True)
            else:
                b = constrain_bias(W)
                def loss_fn(w):
                    return loss_and_gradient(w, X, y, biases=b)[0]
                _, grad = loss_and_gradient(W, X, y, biases=b)
            numeric = fd_gradient(loss_fn, W)
            rel = np.linalg.norm(grad - numeric) / max(np.linalg.norm(numeric), 1e-12)
            assert rel <= 1e-4


class TestTrainProbe:
    def test_separable_blobs_high_accuracy(self, rng):
        X, y = two_blobs(rng)
        # Oracle: the midplane classifier x=0 already achieves >= 0.99 here.
        midplane = (X[:, 0] > 0).astype(int)
        assert (midplane == y).mean() >= 0.99
        probe = train_probe((X, y), ProbeConfig(epochs=40, seed=1))
        accuracy = (probe.argmax(X) == y).mean()
        assert accuracy >= 0.99

    def test_single_class_rejected(self, rng):
        X = rng.standard_normal((10, 2))
        with pytest.raises(DataError, match="two distinct classes"):
            train_probe((X, np.zeros(10, dtype=int)), ProbeConfig(epochs=1))

    def test_mirror_symmetric_data_gives_symmetric_centers(self, rng):
        base = rng.standard_normal((80, 3)) + np.array([2.0, 0.0, 0.0])
        X = np.vstack([base, -base])
        y = np.repeat([0, 1], 80)
        probe = train_probe((X, y), ProbeConfig(epochs=30, seed=7))
        c = np.stack([c.vector for c in reduce_to_vd(probe)])
        assert np.linalg.norm(c[0] + c[1]) <= 0.2 * np.linalg.norm(c[0])

    def test_constraint_holds_exactly_after_training(self, rng):
        X, y = two_blobs(rng, per_class=30)
        probe = train_probe((X, y), ProbeConfig(epochs=5, seed=0))
        assert probe.constrained
        assert np.array_equal(probe.biases, constrain_bias(probe.weights))

    def test_bitwise_determinism(self, rng):
        X, y = two_blobs(rng, per_class=40)
        cfg = ProbeConfig(epochs=10, seed=99)
        a = train_probe((X, y), cfg)
        b = train_probe((X, y), cfg)
        assert a.weights.tobytes() == b.weights.tobytes()
        assert a.biases.tobytes() == b.biases.tobytes()

    def test_final_loss_not_above_initial_on_separable_data(self, rng):
        X, y = two_blobs(rng, per_class=50)
        zero = LinearProbe(weights=np.zeros((2, 2)), biases=np.zeros(2))
        initial = cross_entropy_loss(zero, (X, y))
        trained = train_probe((X, y), ProbeConfig(epochs=20, seed=3))
        assert cross_entropy_loss(trained, (X, y)) <= initial

    def test_nontrivial_epochs_validation(self):
        with pytest.raises(ConfigError):
            ProbeConfig(epochs=-1)
        ProbeConfig(epochs=0)  # zero-step training is legal (residual identity case)


class TestTrainResidual:
    def test_zero_epochs_is_exact_identity(self, rng):
        X, y = make_blobs(rng, 3, 4, 20)
        prototypes = compute_prototypes((X, y))
        residual = train_residual_probe(prototypes, (X, y), ProbeConfig(epochs=0))
        for r, p in zip(residual, prototypes):
            assert np.array_equal(r.vector, p.vector)
            assert r.kind.value == "residual"
            assert r.class_id == p.class_id

    def test_heavy_decay_shrinks_displacement(self, rng):
        X, y = make_blobs(rng, 3, 4, 30, spread=3.0, sigma=1.2)
        prototypes = compute_prototypes((X, y))
        proto = np.stack([p.vector for p in prototypes])

        def displacement(decay):
            cfg = ProbeConfig(epochs=15, seed=5, weight_decay=decay)
            res = train_residual_probe(prototypes, (X, y), cfg)
            return np.linalg.norm(np.stack([c.vector for c in res]) - proto)

        free = displacement(0.0)
        pinned = displacement(1e6)
        assert free > 0.0
        assert pinned < free

    def test_residual_centers_do_not_hurt_training_accuracy(self, rng):
        X, y = make_blobs(rng, 4, 6, 40, spread=4.0, sigma=1.5)
        prototypes = compute_prototypes((X, y))
        residual = train_residual_probe(prototypes, (X, y), ProbeConfig(epochs=40, seed=2))
        acc_proto = (np.array([p.class_id for p in prototypes])[assign_cells(X, prototypes)] == y).mean()
        acc_res = (np.array([c.class_id for c in residual])[assign_cells(X, residual)] == y).mean()
        assert acc_res >= acc_proto

    def test_prototype_mismatch_rejected(self, rng):
        X, y = make_blobs(rng, 3, 4, 10)
        prototypes = compute_prototypes((X, y))[:2]
        with pytest.raises(DataError, match="mismatch"):
            train_residual_probe(prototypes, (X, y), ProbeConfig(epochs=1))
