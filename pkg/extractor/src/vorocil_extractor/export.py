"""Image-folder export: frozen backbone features at several taps and rotations.

The dataset is a directory of class subdirectories containing images
(ImageFolder layout). Class ids follow the sorted subdirectory order and
files are traversed sorted, so reruns produce identical rows. Each image
is resized, rotated by 0/90/180/270 degrees counter-clockwise, and run
through the backbone; one IVFS file is written per layer tap, rows
grouped per sample with rotation tags cycling 0..3.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .backbone import available_taps, load_backbone
from .ivfs import write_ivfs

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".gif")


@dataclass(frozen=True)
class ExportSpec:
    """Everything one export needs; see the CLI for the flag spelling."""

    dataset_dir: Path
    out_dir: Path
    backbone: str = "tiny8"
    weights_path: Path | None = None
    layer_taps: tuple[str, ...] = ("embedding",)
    rotations: int = 4
    batch_size: int = 32
    device: str = "cpu"
    image_size: int = 32
    test_dataset_dir: Path | None = None
    phase_sizes: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.rotations not in (1, 4):
            raise ValueError("rotations must be 1 or 4")
        if not self.layer_taps:
            raise ValueError("at least one layer tap is required")
        unknown = set(self.layer_taps) - set(available_taps(self.backbone))
        if unknown:
            raise ValueError(
                f"backbone {self.backbone!r} has no taps {sorted(unknown)}; "
                f"available: {available_taps(self.backbone)}"
            )
        if self.batch_size < 1 or self.image_size < 8:
            raise ValueError("batch_size must be >= 1 and image_size >= 8")


@dataclass(frozen=True)
class ExportResult:
    manifest_path: Path
    feature_files: tuple[Path, ...]
    class_names: tuple[str, ...]
    n_samples: int


def discover_images(root: Path) -> tuple[list[Path], np.ndarray, tuple[str, ...]]:
    """Sorted class-directory traversal; class ids follow directory order."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {root}")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise FileNotFoundError(f"no class subdirectories under {root}")
    paths: list[Path] = []
    labels: list[int] = []
    for cid, cdir in enumerate(class_dirs):
        files = sorted(p for p in cdir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
        if not files:
            raise FileNotFoundError(f"class directory {cdir} contains no images")
        paths.extend(files)
        labels.extend([cid] * len(files))
    return paths, np.asarray(labels, dtype=np.uint32), tuple(d.name for d in class_dirs)


def load_images(paths: list[Path], size: int) -> np.ndarray:
    """Images as float32 NHWC in [0, 1], bilinear-resized to size x size."""
    out = np.empty((len(paths), size, size, 3), dtype=np.float32)
    for i, p in enumerate(paths):
        with Image.open(p) as img:
            arr = np.asarray(img.convert("RGB").resize((size, size), Image.BILINEAR))
        out[i] = arr.astype(np.float32) / 255.0
    return out


def _forward(model, batch_nhwc: np.ndarray, taps, device) -> dict[str, np.ndarray]:
    x = torch.from_numpy(np.ascontiguousarray(batch_nhwc.transpose(0, 3, 1, 2))).to(device)
    with torch.no_grad():
        features = model.forward_taps(x)
    return {tap: features[tap].cpu().numpy().astype(np.float32) for tap in taps}


def extract_features(
    model, images: np.ndarray, taps, rotations: int, batch_size: int, device: str
) -> dict[str, np.ndarray]:
    """Per-tap feature rows, one sample's rotations consecutive (tags 0..3)."""
    n = images.shape[0]
    chunks: dict[str, list[np.ndarray]] = {tap: [] for tap in taps}
    for start in range(0, n, batch_size):
        batch = images[start : start + batch_size]
        per_rotation = []
        for alpha in range(rotations):
            rotated = np.rot90(batch, k=alpha, axes=(1, 2)) if alpha else batch
            per_rotation.append(_forward(model, rotated, taps, device))
        for tap in taps:
            stacked = np.stack([per_rotation[a][tap] for a in range(rotations)], axis=1)
            chunks[tap].append(stacked.reshape(-1, stacked.shape[2]))
    return {tap: np.vstack(chunks[tap]) for tap in taps}


def _write_manifest(spec: ExportSpec, n_classes: int, files: dict[str, dict[str, Path]]) -> Path:
    if spec.phase_sizes is not None:
        if sum(spec.phase_sizes) != n_classes or any(s < 1 for s in spec.phase_sizes):
            raise ValueError(
                f"phase sizes {list(spec.phase_sizes)} must be positive and sum to {n_classes}"
            )
        sizes = spec.phase_sizes
    else:
        sizes = (n_classes,)
    cp = configparser.ConfigParser()
    cp["manifest"] = {"version": "1", "augmentations": str(spec.rotations)}
    phases = {}
    next_class = 0
    for i, size in enumerate(sizes):
        phases[f"phase_{i}"] = ", ".join(str(c) for c in range(next_class, next_class + size))
        next_class += size
    cp["phases"] = phases
    for tap, split_paths in files.items():
        cp[f"layer:{tap}"] = {
            "train": split_paths["train"].name,
            "test": split_paths["test"].name,
        }
    manifest_path = spec.out_dir / "manifest.ini"
    with manifest_path.open("w") as fh:
        cp.write(fh)
    return manifest_path


def export(spec: ExportSpec) -> ExportResult:
    """Run the export and write IVFS files plus a manifest binding them."""
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    model = load_backbone(spec.backbone, spec.weights_path, spec.device)

    splits = {"train": Path(spec.dataset_dir)}
    splits["test"] = Path(spec.test_dataset_dir) if spec.test_dataset_dir else splits["train"]

    files: dict[str, dict[str, Path]] = {tap: {} for tap in spec.layer_taps}
    n_classes = None
    n_train = 0
    written: list[Path] = []
    for split, root in splits.items():
        if split == "test" and splits["test"] == splits["train"]:
            for tap in spec.layer_taps:
                files[tap]["test"] = files[tap]["train"]
            continue
        paths, labels, class_names = discover_images(root)
        if n_classes is None:
            n_classes = len(class_names)
            names = class_names
            n_train = len(paths)
        elif len(class_names) != n_classes:
            raise ValueError(
                f"{split} split has {len(class_names)} classes, train has {n_classes}"
            )
        images = load_images(paths, spec.image_size)
        features = extract_features(
            model, images, spec.layer_taps, spec.rotations, spec.batch_size, spec.device
        )
        row_labels = np.repeat(labels, spec.rotations)
        tags = (
            np.tile(np.arange(4, dtype=np.uint8), len(paths)) if spec.rotations == 4 else None
        )
        for tap in spec.layer_taps:
            path = spec.out_dir / f"{split}_{tap}.ivfs"
            write_ivfs(path, features[tap], row_labels, tags)
            files[tap][split] = path
            written.append(path)

    manifest_path = _write_manifest(spec, n_classes, files)
    return ExportResult(
        manifest_path=manifest_path,
        feature_files=tuple(written),
        class_names=names,
        n_samples=n_train,
    )
