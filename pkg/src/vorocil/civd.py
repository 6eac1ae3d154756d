"""Cluster-to-cluster Voronoi assignment over multiple feature layers.

Each class is represented by an ordered cluster of centers, one per
network layer; a query is likewise an ordered cluster of per-layer
features. The influence of a class cluster on a query cluster is
``-sign(gamma) * sum_l d_l ** gamma`` with ``d_l`` the squared distance
at layer ``l``; cells are assigned by maximal influence. With one layer
and positive ``gamma`` this degenerates to the ordinary Voronoi rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError
from .geometry import Center, pairwise_sq_distances
from .transforms import TransformParams


@dataclass(frozen=True, eq=False)
class CenterCluster:
    """One center per layer, in fixed model-wide layer order."""

    members: tuple[Center, ...]
    class_id: int
    phase_id: int = 0

    def __post_init__(self) -> None:
        if len(self.members) == 0:
            raise DataError("a center cluster needs at least one layer")

    @property
    def layer_count(self) -> int:
        return len(self.members)

    def layer_dims(self) -> tuple[int, ...]:
        return tuple(c.dim for c in self.members)


@dataclass(frozen=True, eq=False)
class LayeredModel:
    """A set of equally sized center clusters plus the influence exponent."""

    clusters: tuple[CenterCluster, ...]
    gamma: float = 1.0
    transforms: tuple[TransformParams, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.clusters) == 0:
            raise DataError("layered model has no clusters")
        if self.gamma == 0.0:
            raise ConfigError("influence exponent gamma must be nonzero")
        counts = {c.layer_count for c in self.clusters}
        if len(counts) != 1:
            raise DataError("all clusters must have the same number of layers")
        dims = {c.layer_dims() for c in self.clusters}
        if len(dims) != 1:
            raise DataError("clusters disagree on per-layer dimensionality")
        if self.transforms is not None and len(self.transforms) != self.layer_count:
            raise DataError("one TransformParams per layer is required")

    @property
    def layer_count(self) -> int:
        return self.clusters[0].layer_count

    def layer_dims(self) -> tuple[int, ...]:
        return self.clusters[0].layer_dims()


def _query_layers(query: Sequence[np.ndarray], dims: tuple[int, ...]) -> list[np.ndarray]:
    if len(query) != len(dims):
        raise DataError(f"query has {len(query)} layers, model has {len(dims)}")
    out = []
    for i, (q, d) in enumerate(zip(query, dims)):
        arr = np.asarray(q, dtype=np.float64)
        if arr.shape != (d,):
            raise DataError(f"layer {i} query has shape {arr.shape}, expected ({d},)")
        out.append(arr)
    return out


def influence(cluster: CenterCluster, query: Sequence[np.ndarray], gamma: float) -> float:
    """``-sign(gamma) * sum_l d_l ** gamma`` over the cluster's layers."""
    if gamma == 0.0:
        raise ConfigError("influence exponent gamma must be nonzero")
    layers = _query_layers(query, cluster.layer_dims())
    total = 0.0
    for center, q in zip(cluster.members, layers):
        diff = q - center.vector
        d = float(diff @ diff)
        if d == 0.0 and gamma < 0.0:
            raise DataError(
                f"zero distance at layer for class {cluster.class_id}: negative gamma is singular"
            )
        total += d ** gamma
    return -np.sign(gamma) * total


def influence_many(model: LayeredModel, queries: Sequence[np.ndarray]) -> np.ndarray:
    """Influence of every cluster on each query row; shape (N, n_clusters).

    ``queries`` holds one (N, dim_l) array per layer.
    """
    dims = model.layer_dims()
    if len(queries) != len(dims):
        raise DataError(f"query has {len(queries)} layers, model has {len(dims)}")
    n = np.asarray(queries[0]).shape[0]
    total = np.zeros((n, len(model.clusters)))
    for l, dim in enumerate(dims):
        Z = np.asarray(queries[l], dtype=np.float64)
        if Z.shape != (n, dim):
            raise DataError(f"layer {l} queries have shape {Z.shape}, expected ({n}, {dim})")
        M = np.stack([c.members[l].vector for c in model.clusters])
        d = pairwise_sq_distances(Z, M)
        if model.gamma < 0.0 and np.any(d == 0.0):
            raise DataError("zero distance encountered: negative gamma is singular")
        total += d ** model.gamma
    return -np.sign(model.gamma) * total


def assign_ccvd(model: LayeredModel, query: Sequence[np.ndarray]) -> int:
    """Class of the cluster with maximal influence; ties pick the lowest class id."""
    per_layer = [np.asarray(q, dtype=np.float64)[None, :] for q in query]
    scores = influence_many(model, per_layer)[0]
    best = scores.max()
    tied = [c.class_id for c, s in zip(model.clusters, scores) if s == best]
    return min(tied)


def assign_ccvd_many(model: LayeredModel, queries: Sequence[np.ndarray]) -> np.ndarray:
    """Vectorised :func:`assign_ccvd`; ties pick the lowest class id."""
    scores = influence_many(model, queries)
    class_ids = np.array([c.class_id for c in model.clusters], dtype=np.int64)
    order = np.argsort(class_ids, kind="stable")
    best = np.argmax(scores[:, order], axis=1)
    return class_ids[order][best]
