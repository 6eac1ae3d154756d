"""Rotation label augmentation, test-time consensus/integration, and HV.

A query is evaluated through a 4 x 4 x K tensor of squared distances:
axis 0 indexes the rotation applied to the query, axis 1 the rotation
variant of each class, axis 2 the base class. Consensus takes the most
frequent per-slice winner; integration takes the class with the smallest
total distance. The entropy-weighted spread of the 16 distance vectors
(HV) quantifies how much the rotated views disagree.

A ``diagonal_only`` switch restricts all three to the four matched
(query rotation == class rotation) slices; the default uses all 16
combinations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

ROTATIONS = 4


@dataclass(frozen=True)
class AugmentedLabelMap:
    """Bijection between base classes and their four rotation variants."""

    base_count: int

    def __post_init__(self) -> None:
        if self.base_count < 1:
            raise DataError("label map needs at least one base class")

    @property
    def expanded_count(self) -> int:
        return ROTATIONS * self.base_count

    def expand(self, class_id: int, rotation: int) -> int:
        if not 0 <= class_id < self.base_count:
            raise DataError(f"class id {class_id} out of range for {self.base_count} classes")
        if not 0 <= rotation < ROTATIONS:
            raise DataError(f"rotation {rotation} out of range")
        return class_id * ROTATIONS + rotation

    def split(self, expanded_id: int) -> tuple[int, int]:
        if not 0 <= expanded_id < self.expanded_count:
            raise DataError(f"expanded id {expanded_id} out of range")
        return divmod(expanded_id, ROTATIONS)


@dataclass(frozen=True, eq=False)
class DistanceTensor:
    """4 x 4 x K nonnegative squared distances from rotated queries to rotated class centers."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3 or v.shape[0] != ROTATIONS or v.shape[1] != ROTATIONS or v.shape[2] < 1:
            raise DataError(f"distance tensor must be 4 x 4 x K with K >= 1, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("distance tensor entries must be finite")
        if np.any(v < 0.0):
            raise DataError("distance tensor entries must be nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def n_classes(self) -> int:
        return int(self.values.shape[2])

    def members(self, diagonal_only: bool = False) -> np.ndarray:
        """The distance vectors entering consensus/integration/HV, shape (M, K)."""
        if diagonal_only:
            return np.stack([self.values[a, a] for a in range(ROTATIONS)])
        return self.values.reshape(ROTATIONS * ROTATIONS, self.n_classes)


def rotate90(image: np.ndarray, turns: int) -> np.ndarray:
    """Rotate an H x W (x C) array counter-clockwise by 90 degrees ``turns`` times."""
    arr = np.asarray(image)
    if arr.ndim < 2:
        raise DataError("rotate90 expects at least a 2-D array")
    return np.rot90(arr, k=int(turns) % ROTATIONS, axes=(0, 1))


def consensus_many(values: np.ndarray, diagonal_only: bool = False) -> np.ndarray:
    """Vectorised consensus over a batch of tensors, shape (N, 4, 4, K).

    Per tensor: each member slice votes with its argmin class; the mode
    wins. Vote ties are broken by the smaller total distance among the
    tied classes, then by the lower class id.
    """
    v = np.asarray(values, dtype=np.float64)
    n, _, _, k = v.shape
    if diagonal_only:
        members = v[:, np.arange(ROTATIONS), np.arange(ROTATIONS), :]
    else:
        members = v.reshape(n, ROTATIONS * ROTATIONS, k)
    votes = np.argmin(members, axis=2)
    counts = np.zeros((n, k), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(n), votes.shape[1]), votes.ravel()), 1)
    best = counts.max(axis=1, keepdims=True)
    tied = counts == best
    totals = members.sum(axis=1)
    # Order ties by total distance, then class id; untied classes are pushed to the back.
    keyed = np.where(tied, totals, np.inf)
    return np.argmin(keyed, axis=1)


def consensus(tensor: DistanceTensor, diagonal_only: bool = False) -> int:
    """Most frequent per-slice winner of one tensor."""
    return int(consensus_many(tensor.values[None], diagonal_only=diagonal_only)[0])


def integrate_many(values: np.ndarray, diagonal_only: bool = False) -> np.ndarray:
    """Vectorised integration: argmin of summed distances, shape (N, 4, 4, K) in."""
    v = np.asarray(values, dtype=np.float64)
    n, _, _, k = v.shape
    if diagonal_only:
        sums = v[:, np.arange(ROTATIONS), np.arange(ROTATIONS), :].sum(axis=1)
    else:
        sums = v.reshape(n, ROTATIONS * ROTATIONS, k).sum(axis=1)
    return np.argmin(sums, axis=1)


def integrate(tensor: DistanceTensor, diagonal_only: bool = False) -> int:
    """Class with the smallest distance summed over all member slices."""
    return int(integrate_many(tensor.values[None], diagonal_only=diagonal_only)[0])


def hv_many(values: np.ndarray, diagonal_only: bool = False) -> np.ndarray:
    """Vectorised entropy-weighted geometric variance over a batch of tensors.

    For member vectors d_i with mean d*: V = sum_i ||d* - d_i||^2,
    q_i = ||d* - d_i||^2 / V, H = -sum_i q_i log q_i (natural log,
    0 log 0 = 0), and the result is H * V (0 when V = 0).
    """
    v = np.asarray(values, dtype=np.float64)
    n, _, _, k = v.shape
    if diagonal_only:
        members = v[:, np.arange(ROTATIONS), np.arange(ROTATIONS), :]
    else:
        members = v.reshape(n, ROTATIONS * ROTATIONS, k)
    # Deviations are computed relative to the first member so identical
    # members yield an exact zero instead of last-ulp summation residue.
    rel = members - members[:, :1, :]
    centered = rel - rel.mean(axis=1, keepdims=True)
    dev = (centered ** 2).sum(axis=2)
    total = dev.sum(axis=1)
    out = np.zeros(n)
    live = total > 0.0
    if np.any(live):
        q = dev[live] / total[live, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(q > 0.0, q * np.log(q), 0.0)
        out[live] = -terms.sum(axis=1) * total[live]
    return out


def hv(tensor: DistanceTensor, diagonal_only: bool = False) -> float:
    """Entropy-weighted geometric variance of one tensor's member vectors."""
    return float(hv_many(tensor.values[None], diagonal_only=diagonal_only)[0])


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient of two equal-length sequences."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise DataError("pearson expects two 1-D sequences of equal length")
    if a.size < 2:
        raise DataError("pearson needs at least two observations")
    da = a - a.mean()
    db = b - b.mean()
    va = float(da @ da)
    vb = float(db @ db)
    if va == 0.0 or vb == 0.0:
        raise DataError("pearson is undefined for a zero-variance sequence")
    return float((da @ db) / np.sqrt(va * vb))
