"""Voronoi-constrained logistic regression and residual prototype training.

Both trainers run plain seeded SGD on a K-way softmax classifier whose
biases are reprojected onto ``b_k = -||W_k||^2 / 4`` at the start of every
epoch, so the decision regions remain an exact Voronoi diagram. Gradients
treat the bias as a fixed leaf within an epoch (project-then-step); the
fully coupled gradient, with the bias differentiated as a function of the
weights, is available for verification via ``couple_bias=True``.

The residual trainer keeps a frozen anchor ``W0 = 2 * prototype`` per
class and only updates the displacement ``dW``, shrunk toward zero by a
weight-decay term. Decay is applied as an implicit (proximal) step,
``dW <- dW / (1 + 2 * decay * lr)``, which stays contractive for
arbitrarily large decay where the explicit Euler step would oscillate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .geometry import Center, CenterKind, LinearProbe, constrain_bias
from .ingestion import FeatureDataset


@dataclass(frozen=True)
class ProbeConfig:
    """SGD hyperparameters; epochs=0 is allowed and returns the initialization."""

    epochs: int = 40
    batch_size: int = 64
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.learning_rate <= 0.0:
            raise ConfigError("learning_rate must be positive")
        if self.weight_decay < 0.0:
            raise ConfigError("weight_decay must be >= 0")


@dataclass(eq=False)
class ResidualProbe:
    """Anchored probe ``W = W0 + dW`` where only ``dW`` trains."""

    anchor: np.ndarray
    displacement: np.ndarray

    @property
    def effective_weights(self) -> np.ndarray:
        return self.anchor + self.displacement

    def as_probe(self) -> LinearProbe:
        w = self.effective_weights
        return LinearProbe(weights=w, biases=constrain_bias(w), constrained=True)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _as_arrays(data: FeatureDataset | tuple[np.ndarray, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, FeatureDataset):
        return data.features64, data.labels.astype(np.int64)
    features, labels = data
    return np.asarray(features, dtype=np.float64), np.asarray(labels, dtype=np.int64)


def _check_labels(labels: np.ndarray, n_classes: int) -> None:
    if labels.size == 0:
        raise DataError("empty batch")
    lo, hi = int(labels.min()), int(labels.max())
    if lo < 0 or hi >= n_classes:
        raise DataError(f"label {hi if hi >= n_classes else lo} out of range for {n_classes} classes")


def cross_entropy_loss(
    probe: LinearProbe, data: FeatureDataset | tuple[np.ndarray, np.ndarray]
) -> float:
    """Mean negative log softmax probability of the true labels."""
    features, labels = _as_arrays(data)
    _check_labels(labels, probe.n_classes)
    logp = _log_softmax(probe.scores(features))
    return float(-logp[np.arange(labels.size), labels].mean())


def loss_and_gradient(
    weights: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    biases: np.ndarray | None = None,
    couple_bias: bool = False,
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient with respect to the weights.

    With ``biases=None`` they are derived from the Voronoi constraint.
    ``couple_bias`` additionally backpropagates through that derivation
    (``db_k/dW_k = -W_k / 2``); the default treats the bias as fixed.
    """
    W = np.asarray(weights, dtype=np.float64)
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    b = constrain_bias(W) if biases is None else np.asarray(biases, dtype=np.float64)
    _check_labels(y, W.shape[0])

    logits = X @ W.T + b
    logp = _log_softmax(logits)
    n = y.size
    loss = float(-logp[np.arange(n), y].mean())

    grad_logits = np.exp(logp)
    grad_logits[np.arange(n), y] -= 1.0
    grad_logits /= n
    grad_w = grad_logits.T @ X
    if couple_bias:
        grad_b = grad_logits.sum(axis=0)
        grad_w += grad_b[:, None] * (-0.5 * W)
    return loss, grad_w


def _epoch_batches(
    n: int, batch_size: int, shuffle: bool, rng: np.random.Generator
) -> list[np.ndarray]:
    order = rng.permutation(n) if shuffle else np.arange(n)
    return [order[i : i + batch_size] for i in range(0, n, batch_size)]


def train_probe(
    data: FeatureDataset | tuple[np.ndarray, np.ndarray],
    cfg: ProbeConfig,
    init_prototypes: np.ndarray | None = None,
) -> LinearProbe:
    """Train a Voronoi-constrained softmax classifier on one phase of data.

    Weights start at ``2 * init_prototypes`` when given (the prototype
    diagram), otherwise at zero. Deterministic given (data, cfg).
    """
    X, y = _as_arrays(data)
    classes = np.unique(y)
    if classes.size < 2:
        raise DataError("probe training needs at least two distinct classes")
    n_classes = int(classes.max()) + 1
    if classes.size != n_classes:
        raise DataError(f"labels must cover 0..{n_classes - 1}; got {classes.tolist()}")

    if init_prototypes is not None:
        W0 = 2.0 * np.asarray(init_prototypes, dtype=np.float64)
        if W0.shape != (n_classes, X.shape[1]):
            raise DataError(f"init prototypes must have shape ({n_classes}, {X.shape[1]})")
        W = W0.copy()
    else:
        W = np.zeros((n_classes, X.shape[1]))

    rng = np.random.default_rng(cfg.seed)
    for epoch in range(cfg.epochs):
        b = constrain_bias(W)
        for batch in _epoch_batches(y.size, cfg.batch_size, cfg.shuffle, rng):
            loss, grad = loss_and_gradient(W, X[batch], y[batch], biases=b)
            if not np.isfinite(loss):
                raise DataError(f"non-finite training loss at epoch {epoch}")
            W -= cfg.learning_rate * grad
    return LinearProbe(weights=W, biases=constrain_bias(W), constrained=True)


def train_residual_probe(
    prototypes: list[Center],
    data: FeatureDataset | tuple[np.ndarray, np.ndarray],
    cfg: ProbeConfig,
) -> list[Center]:
    """Train residual centers anchored at the prototypes (dense labels 0..K-1).

    ``prototypes[k]`` anchors class ``k``. With ``epochs=0`` the returned
    centers equal the prototypes exactly; larger ``cfg.weight_decay``
    shrinks the displacement toward zero.
    """
    X, y = _as_arrays(data)
    n_classes = len(prototypes)
    if n_classes == 0:
        raise DataError("at least one prototype is required")
    present = set(int(c) for c in np.unique(y))
    if present != set(range(n_classes)):
        raise DataError(
            f"prototype/class mismatch: {n_classes} prototypes but data labels are {sorted(present)}"
        )
    anchor = 2.0 * np.stack([p.vector for p in prototypes])
    if anchor.shape[1] != X.shape[1]:
        raise DataError(
            f"prototype dimension {anchor.shape[1]} does not match feature dimension {X.shape[1]}"
        )

    state = ResidualProbe(anchor=anchor, displacement=np.zeros_like(anchor))
    rng = np.random.default_rng(cfg.seed)
    shrink = 1.0 + 2.0 * cfg.weight_decay * cfg.learning_rate
    for epoch in range(cfg.epochs):
        W = state.effective_weights
        b = constrain_bias(W)
        for batch in _epoch_batches(y.size, cfg.batch_size, cfg.shuffle, rng):
            loss, grad = loss_and_gradient(state.effective_weights, X[batch], y[batch], biases=b)
            if not np.isfinite(loss):
                raise DataError(f"non-finite training loss at epoch {epoch}")
            state.displacement = (state.displacement - cfg.learning_rate * grad) / shrink

    centers = state.effective_weights / 2.0
    return [
        Center(
            vector=centers[k],
            weight=0.0,
            class_id=prototypes[k].class_id,
            phase_id=prototypes[k].phase_id,
            kind=CenterKind.RESIDUAL,
        )
        for k in range(n_classes)
    ]
