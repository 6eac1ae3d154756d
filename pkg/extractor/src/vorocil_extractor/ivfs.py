"""Writer for the IVFS feature-file interchange format.

Layout (little-endian): magic "IVFS", u16 version = 1, u8 dtype = 1
(f32), u8 flags (bit 0: rotation tags), u32 n_dims, u64 n_samples, then
labels (u32 each), optional rotation tags (u8 each), and f32 feature
rows. This mirrors the consumer-side specification byte for byte.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<4sHBBIQ")


def ivfs_bytes(features: np.ndarray, labels: np.ndarray, tags: np.ndarray | None = None) -> bytes:
    f = np.ascontiguousarray(features, dtype="<f4")
    y = np.ascontiguousarray(labels, dtype="<u4")
    if f.ndim != 2 or y.shape != (f.shape[0],):
        raise ValueError("features must be (N, d) with one label per row")
    flags = 0
    parts = [b""]
    if tags is not None:
        t = np.ascontiguousarray(tags, dtype=np.uint8)
        if t.shape != (f.shape[0],) or (t.size and t.max() > 3):
            raise ValueError("rotation tags must be one value in 0..3 per row")
        flags = 1
        parts = [t.tobytes()]
    header = _HEADER.pack(b"IVFS", 1, 1, flags, f.shape[1], f.shape[0])
    return header + y.tobytes() + parts[0] + f.tobytes()


def write_ivfs(
    path: str | Path, features: np.ndarray, labels: np.ndarray, tags: np.ndarray | None = None
) -> Path:
    path = Path(path)
    path.write_bytes(ivfs_bytes(features, labels, tags))
    return path
