"""Feature-file I/O, phase manifests, and a seeded synthetic data generator.

Feature files use the IVFS container: a fixed little-endian header
followed by labels, optional per-row rotation tags, and f32 feature rows.
Features are stored as f32 (CNN embeddings do not exceed f32 precision);
the engine upcasts to f64 for all arithmetic.

Layout (all little-endian)::

    magic      4 bytes  "IVFS"
    version    u16      1
    dtype      u8       1 = f32
    flags      u8       bit 0: rotation tags present
    n_dims     u32
    n_samples  u64
    labels     u32 * n_samples
    tags       u8  * n_samples          (only if flagged)
    features   f32 * n_samples * n_dims (row-major)
"""

from __future__ import annotations

import configparser
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

IVFS_MAGIC = b"IVFS"
IVFS_VERSION = 1
IVFS_DTYPE_F32 = 1
_HEADER = struct.Struct("<4sHBBIQ")

MANIFEST_VERSION = 1


@dataclass(eq=False)
class FeatureDataset:
    """Labelled feature vectors, optionally tagged with a rotation variant 0..3."""

    features: np.ndarray
    labels: np.ndarray
    rotation_tags: np.ndarray | None = None

    def __post_init__(self) -> None:
        f = np.ascontiguousarray(np.asarray(self.features), dtype=np.float32)
        y = np.asarray(self.labels)
        if f.ndim != 2:
            raise DataError(f"features must be a 2-D array, got shape {f.shape}")
        if y.shape != (f.shape[0],):
            raise DataError(f"labels must have shape ({f.shape[0]},), got {y.shape}")
        if y.size and np.any(np.asarray(y, dtype=np.int64) < 0):
            raise DataError("labels must be nonnegative")
        self.features = f
        self.labels = np.ascontiguousarray(y, dtype=np.uint32)
        if self.rotation_tags is not None:
            t = np.asarray(self.rotation_tags)
            if t.shape != (f.shape[0],):
                raise DataError(f"rotation tags must have shape ({f.shape[0]},), got {t.shape}")
            if t.size and (np.any(np.asarray(t, dtype=np.int64) < 0) or np.any(np.asarray(t, dtype=np.int64) > 3)):
                raise DataError("rotation tags must be in 0..3")
            self.rotation_tags = np.ascontiguousarray(t, dtype=np.uint8)

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_dims(self) -> int:
        return int(self.features.shape[1])

    @property
    def features64(self) -> np.ndarray:
        return self.features.astype(np.float64)

    def class_ids(self) -> list[int]:
        return sorted(int(c) for c in np.unique(self.labels)) if self.n_samples else []

    def select(self, mask: np.ndarray) -> "FeatureDataset":
        return FeatureDataset(
            features=self.features[mask],
            labels=self.labels[mask],
            rotation_tags=None if self.rotation_tags is None else self.rotation_tags[mask],
        )


def dataset_to_bytes(ds: FeatureDataset) -> bytes:
    flags = 1 if ds.rotation_tags is not None else 0
    parts = [
        _HEADER.pack(IVFS_MAGIC, IVFS_VERSION, IVFS_DTYPE_F32, flags, ds.n_dims, ds.n_samples),
        ds.labels.astype("<u4").tobytes(),
    ]
    if ds.rotation_tags is not None:
        parts.append(ds.rotation_tags.tobytes())
    parts.append(ds.features.astype("<f4").tobytes())
    return b"".join(parts)


def dataset_from_bytes(blob: bytes) -> FeatureDataset:
    if len(blob) < _HEADER.size:
        raise DataError(f"truncated feature file: header needs {_HEADER.size} bytes, got {len(blob)} (offset {len(blob)})")
    magic, version, dtype, flags, n_dims, n_samples = _HEADER.unpack_from(blob, 0)
    if magic != IVFS_MAGIC:
        raise DataError(f"bad magic {magic!r} at offset 0: not a feature file")
    if version != IVFS_VERSION:
        raise DataError(f"unsupported feature-file version {version} at offset 4")
    if dtype != IVFS_DTYPE_F32:
        raise DataError(f"unsupported feature dtype code {dtype} at offset 6")
    if flags & ~1:
        raise DataError(f"unknown flag bits 0x{flags:02x} at offset 7")
    has_tags = bool(flags & 1)
    offset = _HEADER.size
    expected = offset + 4 * n_samples + (n_samples if has_tags else 0) + 4 * n_samples * n_dims
    if len(blob) != expected:
        raise DataError(
            f"truncated feature file at offset {len(blob)}: expected {expected} bytes for "
            f"{n_samples} samples x {n_dims} dims"
        )
    labels = np.frombuffer(blob, dtype="<u4", count=n_samples, offset=offset)
    offset += 4 * n_samples
    tags = None
    if has_tags:
        tags = np.frombuffer(blob, dtype=np.uint8, count=n_samples, offset=offset)
        offset += n_samples
    feats = np.frombuffer(blob, dtype="<f4", count=n_samples * n_dims, offset=offset)
    return FeatureDataset(
        features=feats.reshape(n_samples, n_dims).copy(),
        labels=labels.copy(),
        rotation_tags=None if tags is None else tags.copy(),
    )


def write_features(ds: FeatureDataset, path: str | Path) -> Path:
    """Serialize a dataset to an IVFS file; the round trip is bit-exact."""
    path = Path(path)
    path.write_bytes(dataset_to_bytes(ds))
    return path


def read_features(path: str | Path) -> FeatureDataset:
    """Load an IVFS file, validating magic, version, and length."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"feature file not found: {path}")
    return dataset_from_bytes(path.read_bytes())


@dataclass(frozen=True)
class SynthConfig:
    """Seeded Gaussian-blob generator standing in for CNN features at desk scale.

    Class means are drawn uniformly from a ball of radius ``spread``;
    samples are Gaussian around them with standard deviation
    ``cov_scale``. ``anisotropy`` > 1 stretches each class along a
    random orthogonal frame (ratio of widest to narrowest axis), which
    is what makes locally trained boundaries beat plain prototype
    bisectors. With ``augmentations = 4`` every sample emits four rows
    whose features are offset by a deterministic per-class direction per
    rotation index (a stand-in for rotated-image features: the generator
    has no images).
    """

    n_classes: int
    n_dims: int
    samples_per_class: int
    spread: float = 10.0
    cov_scale: float = 1.0
    anisotropy: float = 1.0
    rotation_offset: float = 0.0
    augmentations: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_classes < 1 or self.n_dims < 1 or self.samples_per_class < 1:
            raise ConfigError("synthetic generator counts must all be >= 1")
        if self.spread <= 0.0:
            raise ConfigError("class-mean spread must be positive")
        if self.cov_scale < 0.0:
            raise ConfigError("covariance scale must be nonnegative")
        if self.anisotropy < 1.0:
            raise ConfigError("anisotropy is a >= 1 axis ratio")
        if self.augmentations not in (1, 4):
            raise ConfigError("augmentations must be 1 or 4")


def _class_geometry(cfg: SynthConfig) -> tuple[np.ndarray, list[np.ndarray], np.ndarray]:
    """Means, per-class mixing matrices, and per-(class, rotation) offsets.

    Drawn from ``cfg.seed`` only, so train/test splits generated with
    different sample seeds share the same class geometry.
    """
    rng = np.random.default_rng(cfg.seed)
    directions = rng.standard_normal((cfg.n_classes, cfg.n_dims))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = cfg.spread * rng.random(cfg.n_classes) ** (1.0 / cfg.n_dims)
    means = directions * radii[:, None]

    mixers: list[np.ndarray] = []
    for _ in range(cfg.n_classes):
        if cfg.anisotropy == 1.0:
            mixers.append(cfg.cov_scale * np.eye(cfg.n_dims))
        else:
            q, _ = np.linalg.qr(rng.standard_normal((cfg.n_dims, cfg.n_dims)))
            half = np.sqrt(cfg.anisotropy)
            axis_scales = np.geomspace(1.0 / half, half, cfg.n_dims)
            mixers.append(cfg.cov_scale * (q * axis_scales))

    offsets = np.zeros((cfg.n_classes, 4, cfg.n_dims))
    if cfg.augmentations == 4 and cfg.rotation_offset != 0.0:
        u = rng.standard_normal((cfg.n_classes, 3, cfg.n_dims))
        u /= np.linalg.norm(u, axis=2, keepdims=True)
        offsets[:, 1:, :] = cfg.rotation_offset * u
    return means, mixers, offsets


def synth_gaussian(cfg: SynthConfig, sample_seed: int | None = None) -> FeatureDataset:
    """Generate a synthetic dataset, deterministic given (cfg, sample_seed).

    Class geometry depends only on ``cfg.seed``; the per-sample noise
    stream uses ``sample_seed`` (defaulting to ``cfg.seed``), so calling
    with two different sample seeds yields a train/test pair over
    identical class distributions.
    """
    means, mixers, offsets = _class_geometry(cfg)
    noise_rng = np.random.default_rng(cfg.seed if sample_seed is None else sample_seed)

    rows = []
    labels = []
    tags = []
    for k in range(cfg.n_classes):
        base = means[k] + noise_rng.standard_normal((cfg.samples_per_class, cfg.n_dims)) @ mixers[k].T
        if cfg.augmentations == 1:
            rows.append(base)
            labels.extend([k] * cfg.samples_per_class)
        else:
            for i in range(cfg.samples_per_class):
                rows.append(base[i][None, :] + offsets[k])
                labels.extend([k] * 4)
                tags.extend([0, 1, 2, 3])
    features = np.vstack(rows)
    return FeatureDataset(
        features=features,
        labels=np.array(labels, dtype=np.uint32),
        rotation_tags=np.array(tags, dtype=np.uint8) if cfg.augmentations == 4 else None,
    )


@dataclass(frozen=True)
class LayerFiles:
    name: str
    train_path: Path
    test_path: Path


@dataclass(frozen=True)
class PhaseManifest:
    """Phase schedule plus the feature files backing each layer.

    ``phases`` lists the class ids introduced at each phase; the lists
    must be disjoint and nonempty. ``layers`` binds layer names to
    train/test IVFS files, in model order (first layer is the default
    when layered assignment is off).
    """

    phases: tuple[tuple[int, ...], ...]
    layers: tuple[LayerFiles, ...]
    augmentations: int = 1
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self) -> None:
        if not self.phases:
            raise DataError("manifest must list at least one phase")
        seen: set[int] = set()
        for i, phase in enumerate(self.phases):
            if not phase:
                raise DataError(f"phase {i} lists no classes")
            dup = seen.intersection(phase)
            if dup:
                raise DataError(f"classes {sorted(dup)} appear in more than one phase")
            if len(set(phase)) != len(phase):
                raise DataError(f"phase {i} repeats a class id")
            seen.update(phase)
        if not self.layers:
            raise DataError("manifest must bind at least one layer")
        if self.augmentations not in (1, 4):
            raise DataError("manifest augmentations must be 1 or 4")

    @property
    def n_phases(self) -> int:
        return len(self.phases)

    @property
    def layer_names(self) -> list[str]:
        return [layer.name for layer in self.layers]

    def all_classes(self) -> set[int]:
        return {c for phase in self.phases for c in phase}


def save_manifest(manifest: PhaseManifest, path: str | Path) -> Path:
    path = Path(path)
    cp = configparser.ConfigParser()
    cp["manifest"] = {
        "version": str(MANIFEST_VERSION),
        "augmentations": str(manifest.augmentations),
    }
    cp["phases"] = {
        f"phase_{i}": ", ".join(str(c) for c in phase) for i, phase in enumerate(manifest.phases)
    }
    for layer in manifest.layers:
        cp[f"layer:{layer.name}"] = {
            "train": str(layer.train_path),
            "test": str(layer.test_path),
        }
    with path.open("w") as fh:
        cp.write(fh)
    return path


def load_manifest(path: str | Path) -> PhaseManifest:
    """Parse and validate a manifest file; referenced files must exist."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise DataError(f"malformed manifest {path}: {exc}") from exc
    if "manifest" not in cp or "phases" not in cp:
        raise DataError(f"manifest {path} is missing its [manifest] or [phases] section")
    version = cp["manifest"].getint("version", fallback=MANIFEST_VERSION)
    if version != MANIFEST_VERSION:
        raise DataError(f"unsupported manifest version {version}")
    augmentations = cp["manifest"].getint("augmentations", fallback=1)

    phases = []
    for i in range(len(cp["phases"])):
        key = f"phase_{i}"
        if key not in cp["phases"]:
            raise DataError(f"manifest phases must be contiguous: missing {key}")
        raw = cp["phases"][key].strip()
        if not raw:
            raise DataError(f"{key} lists no classes")
        try:
            phases.append(tuple(int(tok) for tok in raw.replace(",", " ").split()))
        except ValueError as exc:
            raise DataError(f"{key} contains a non-integer class id") from exc

    base = path.parent
    layers = []
    for section in cp.sections():
        if not section.startswith("layer:"):
            continue
        name = section.split(":", 1)[1]
        try:
            train = base / cp[section]["train"]
            test = base / cp[section]["test"]
        except KeyError as exc:
            raise DataError(f"layer {name!r} must declare both train and test paths") from exc
        for p in (train, test):
            if not p.exists():
                raise DataError(f"layer {name!r} references a missing file: {p}")
        layers.append(LayerFiles(name=name, train_path=train, test_path=test))

    return PhaseManifest(
        phases=tuple(phases), layers=tuple(layers), augmentations=augmentations, base_dir=base
    )


def split_phases(ds: FeatureDataset, manifest: PhaseManifest) -> list[FeatureDataset]:
    """Partition a dataset into per-phase datasets following the manifest.

    Every label in the dataset must appear in exactly one phase list;
    row order is preserved within each phase.
    """
    assigned = manifest.all_classes()
    present = set(ds.class_ids())
    missing = present - assigned
    if missing:
        raise DataError(f"labels {sorted(missing)} are not assigned to any phase")
    out = []
    for phase in manifest.phases:
        mask = np.isin(ds.labels, np.array(sorted(phase), dtype=np.uint32))
        out.append(ds.select(mask))
    return out
