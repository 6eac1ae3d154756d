"""Power/Voronoi diagram primitives.

All distances are squared Euclidean and no square roots are taken for
cell assignment: the square root is monotone, so argmin decisions are
identical and cheaper without it. A center with weight ``nu`` scores a
query ``z`` as ``||z - c||^2 - nu``; equal weights collapse the Power
diagram to an ordinary Voronoi diagram.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DataError

# Tolerance for validating the bias/weight coupling of a constrained probe.
BIAS_RTOL = 1e-6


class CenterKind(str, Enum):
    PROTOTYPE = "prototype"
    PROBING = "probing"
    RESIDUAL = "residual"


@dataclass(frozen=True, eq=False)
class Center:
    """A weighted site of a Power diagram, tagged with class and phase identity."""

    vector: np.ndarray
    weight: float = 0.0
    class_id: int = 0
    phase_id: int = 0
    kind: CenterKind = CenterKind.PROTOTYPE

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=np.float64)
        if v.ndim != 1:
            raise DataError(f"center vector must be one-dimensional, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("center vector components must be finite")
        if not np.isfinite(self.weight):
            raise DataError("center weight must be finite")
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])


@dataclass(frozen=True, eq=False)
class Bisector:
    """Hyperplane ``normal . z - offset = 0`` separating two centers.

    The side where ``normal . z - offset > 0`` belongs to the first
    generating center.
    """

    normal: np.ndarray
    offset: float

    def __post_init__(self) -> None:
        v = np.asarray(self.normal, dtype=np.float64)
        object.__setattr__(self, "normal", v)

    def side(self, z: np.ndarray) -> float:
        """Signed evaluation of the plane equation at ``z``."""
        return float(self.normal @ np.asarray(z, dtype=np.float64) - self.offset)


@dataclass(frozen=True, eq=False)
class LinearProbe:
    """A K-way linear classifier ``scores(z) = W z + b``.

    When ``constrained`` is set, every bias is tied to its weight row by
    ``b_k = -||W_k||^2 / 4``, which makes the decision regions an exact
    Voronoi diagram with centers ``W_k / 2`` (see :func:`reduce_to_vd`).
    """

    weights: np.ndarray
    biases: np.ndarray
    constrained: bool = False

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.biases, dtype=np.float64)
        if w.ndim != 2:
            raise DataError(f"probe weights must be a K x n matrix, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise DataError(
                f"probe biases must have one entry per class: got {b.shape}, expected ({w.shape[0]},)"
            )
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise DataError("probe parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def n_classes(self) -> int:
        return int(self.weights.shape[0])

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])

    def scores(self, features: np.ndarray) -> np.ndarray:
        """Affine class scores for one query (n,) or a batch (N, n)."""
        z = np.asarray(features, dtype=np.float64)
        return z @ self.weights.T + self.biases

    def argmax(self, features: np.ndarray) -> np.ndarray | int:
        s = self.scores(features)
        return np.argmax(s, axis=-1)


def pairwise_sq_distances(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between query rows and point rows.

    Uses the expanded form ``||z||^2 - 2 z.c + ||c||^2`` so memory stays
    O(N*K); tiny negative rounding residues are clipped to zero.
    """
    Z = np.asarray(queries, dtype=np.float64)
    M = np.asarray(points, dtype=np.float64)
    d2 = (Z * Z).sum(axis=-1, keepdims=True) - 2.0 * (Z @ M.T) + (M * M).sum(axis=-1)
    return np.maximum(d2, 0.0)


def _stack_centers(centers: Sequence[Center]) -> tuple[np.ndarray, np.ndarray]:
    if len(centers) == 0:
        raise DataError("at least one center is required")
    dims = {c.dim for c in centers}
    if len(dims) != 1:
        raise DataError(f"centers disagree on dimensionality: {sorted(dims)}")
    matrix = np.stack([c.vector for c in centers])
    weights = np.array([c.weight for c in centers], dtype=np.float64)
    return matrix, weights


def power_score(z: np.ndarray, center: Center) -> float:
    """``||z - c||^2 - nu`` for a single query/center pair."""
    q = np.asarray(z, dtype=np.float64)
    if q.shape != center.vector.shape:
        raise DataError(
            f"dimension mismatch: query has dim {q.shape}, center has dim {center.vector.shape}"
        )
    diff = q - center.vector
    return float(diff @ diff - center.weight)


def power_scores(queries: np.ndarray, centers: Sequence[Center]) -> np.ndarray:
    """Power scores of query rows against every center; shape (N, K)."""
    matrix, weights = _stack_centers(centers)
    Z = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if Z.shape[1] != matrix.shape[1]:
        raise DataError(
            f"dimension mismatch: queries have dim {Z.shape[1]}, centers have dim {matrix.shape[1]}"
        )
    return pairwise_sq_distances(Z, matrix) - weights


def assign_cell(z: np.ndarray, centers: Sequence[Center]) -> int:
    """Index of the center with minimal power score; ties pick the lowest index."""
    scores = power_scores(np.asarray(z, dtype=np.float64)[None, :], centers)
    return int(np.argmin(scores[0]))


def assign_cells(queries: np.ndarray, centers: Sequence[Center]) -> np.ndarray:
    """Vectorised :func:`assign_cell` over query rows."""
    return np.argmin(power_scores(queries, centers), axis=1)


def bisector(c1: Center, c2: Center) -> Bisector:
    """Perpendicular bisector of two Voronoi centers.

    ``normal = (c1 - c2) / ||c1 - c2||`` and
    ``offset = (||c1||^2 - ||c2||^2) / (2 ||c1 - c2||)``; the positive
    side is the half-space closer to ``c1``.
    """
    if c1.vector.shape != c2.vector.shape:
        raise DataError("bisector requires centers of equal dimension")
    diff = c1.vector - c2.vector
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise DataError("coincident centers admit no bisector")
    normal = diff / norm
    offset = float((c1.vector @ c1.vector - c2.vector @ c2.vector) / (2.0 * norm))
    return Bisector(normal=normal, offset=offset)


def constrain_bias(weights: np.ndarray) -> np.ndarray:
    """The bias vector ``b_k = -||W_k||^2 / 4`` that ties a linear classifier to a VD."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2:
        raise DataError(f"expected a K x n weight matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise DataError("weight matrix must be finite")
    return -0.25 * (w * w).sum(axis=1)


def bias_violation(probe: LinearProbe) -> float:
    """Largest absolute deviation of the probe biases from the VD constraint."""
    expected = constrain_bias(probe.weights)
    return float(np.max(np.abs(probe.biases - expected))) if probe.n_classes else 0.0


def reduce_to_vd(
    probe: LinearProbe,
    class_ids: Sequence[int] | None = None,
    phase_id: int = 0,
    kind: CenterKind = CenterKind.PROBING,
) -> list[Center]:
    """Voronoi centers ``W_k / 2`` of a bias-constrained linear classifier.

    Rejects probes whose biases drift from ``-||W_k||^2 / 4`` beyond a
    small relative tolerance, reporting the worst violation.
    """
    expected = constrain_bias(probe.weights)
    tol = BIAS_RTOL * np.maximum(1.0, np.abs(expected))
    violations = np.abs(probe.biases - expected)
    if not probe.constrained or np.any(violations > tol):
        raise DataError(
            "probe is not Voronoi-constrained: "
            f"max bias violation {float(np.max(violations)):.3e} exceeds tolerance"
        )
    ids = list(class_ids) if class_ids is not None else list(range(probe.n_classes))
    if len(ids) != probe.n_classes:
        raise DataError(f"expected {probe.n_classes} class ids, got {len(ids)}")
    return [
        Center(vector=probe.weights[k] / 2.0, weight=0.0, class_id=ids[k], phase_id=phase_id, kind=kind)
        for k in range(probe.n_classes)
    ]
