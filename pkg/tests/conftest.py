from __future__ import annotations

import numpy as np
import pytest

from vorocil.geometry import Center
from vorocil.ingestion import FeatureDataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_blobs(
    rng: np.random.Generator,
    n_classes: int,
    n_dims: int,
    per_class: int,
    spread: float = 8.0,
    sigma: float = 0.6,
) -> tuple[np.ndarray, np.ndarray]:
    """Well-separated Gaussian blobs for quick training tests."""
    means = rng.uniform(-spread, spread, size=(n_classes, n_dims))
    X = np.vstack([means[k] + sigma * rng.standard_normal((per_class, n_dims)) for k in range(n_classes)])
    y = np.repeat(np.arange(n_classes), per_class)
    return X, y


def blob_dataset(rng, n_classes, n_dims, per_class, **kw) -> FeatureDataset:
    X, y = make_blobs(rng, n_classes, n_dims, per_class, **kw)
    return FeatureDataset(features=X, labels=y)


def centers_from(matrix: np.ndarray, **kw) -> list[Center]:
    return [Center(vector=row, **kw) for row in np.atleast_2d(matrix)]
