"""Benchmark harness: full class-incremental protocols, metrics, reports.

A run iterates the manifest's phases, building one model per feature
layer and evaluating after every phase on the cumulative test classes.
The mode string composes the engine's optional stages:

    N   feature normalization pipeline
    D   divide-and-conquer (probing centers within each phase)
    R   residual centers for cross-phase boundaries
    AC  rotation-augmentation consensus at test time
    AI  rotation-augmentation integration at test time
    L   layered assignment over several feature spaces

AC and AI are mutually exclusive; L needs at least two layers in the
manifest. Runs are deterministic given the config and input files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import augment
from .errors import ConfigError, DataError
from .geometry import CenterKind, pairwise_sq_distances
from .incremental import IncrementalModel, add_phase, predict_many
from .ingestion import (
    FeatureDataset,
    LayerFiles,
    PhaseManifest,
    SynthConfig,
    load_manifest,
    read_features,
    save_manifest,
    split_phases,
    synth_gaussian,
    write_features,
)
from .probing import ProbeConfig
from .transforms import TransformParams, compose

MODE_FLAGS = ("N", "D", "R", "AC", "AI", "L")


def parse_mode(mode: str) -> frozenset[str]:
    """Decompose a mode string like ``"NDAIL"`` into its component flags."""
    flags: set[str] = set()
    s = mode.strip().upper()
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "A":
            if i + 1 < len(s) and s[i + 1] in ("C", "I"):
                token = s[i : i + 2]
                i += 2
            else:
                raise ConfigError(f"dangling 'A' in mode {mode!r}: use AC or AI")
        elif ch in ("N", "D", "R", "L"):
            token = ch
            i += 1
        else:
            raise ConfigError(f"unknown flag {ch!r} in mode {mode!r}")
        if token in flags:
            raise ConfigError(f"duplicate flag {token} in mode {mode!r}")
        flags.add(token)
    if "AC" in flags and "AI" in flags:
        raise ConfigError("augmentation consensus and integration are mutually exclusive")
    return frozenset(flags)


@dataclass(frozen=True)
class RunConfig:
    """Everything a protocol run needs; validated before any phase executes."""

    manifest_path: str | Path
    out_dir: str | Path
    mode: str = ""
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    transform: TransformParams = field(default_factory=TransformParams)
    gamma: float = 1.0
    diagonal_augmentation: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        parse_mode(self.mode)
        if self.gamma == 0.0:
            raise ConfigError("gamma must be nonzero")


@dataclass
class EvalReport:
    """Per-phase accuracy matrix and the derived protocol metrics.

    ``accuracy_matrix[t][tau]`` is the accuracy (percent) at phase ``t``
    on the test data introduced at phase ``tau <= t``.
    """

    mode: str
    seed: int
    phase_classes: list[list[int]]
    accuracy_matrix: list[list[float]]
    phase_accuracy: list[float]
    avg_accuracy: list[float]
    last_accuracy: float
    avg_forgetting: list[float]
    per_class_hv: dict[int, float] | None = None
    per_class_delta_accuracy: dict[int, float] | None = None
    hv_delta_pearson: float | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "phase_classes": self.phase_classes,
            "accuracy_matrix": self.accuracy_matrix,
            "phase_accuracy": self.phase_accuracy,
            "avg_accuracy": self.avg_accuracy,
            "last_accuracy": self.last_accuracy,
            "avg_forgetting": self.avg_forgetting,
            "per_class_hv": None
            if self.per_class_hv is None
            else {str(k): v for k, v in self.per_class_hv.items()},
            "per_class_delta_accuracy": None
            if self.per_class_delta_accuracy is None
            else {str(k): v for k, v in self.per_class_delta_accuracy.items()},
            "hv_delta_pearson": self.hv_delta_pearson,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        def intkeys(d):
            return None if d is None else {int(k): float(v) for k, v in d.items()}

        return cls(
            mode=data["mode"],
            seed=int(data["seed"]),
            phase_classes=[[int(c) for c in p] for p in data["phase_classes"]],
            accuracy_matrix=[[float(a) for a in row] for row in data["accuracy_matrix"]],
            phase_accuracy=[float(a) for a in data["phase_accuracy"]],
            avg_accuracy=[float(a) for a in data["avg_accuracy"]],
            last_accuracy=float(data["last_accuracy"]),
            avg_forgetting=[float(a) for a in data["avg_forgetting"]],
            per_class_hv=intkeys(data.get("per_class_hv")),
            per_class_delta_accuracy=intkeys(data.get("per_class_delta_accuracy")),
            hv_delta_pearson=None
            if data.get("hv_delta_pearson") is None
            else float(data["hv_delta_pearson"]),
        )


def avg_forgetting(matrix: Sequence[Sequence[float]], t: int) -> float:
    """Mean drop from each past task's best-ever accuracy to its accuracy at phase ``t``.

    ``matrix[s][tau]`` is the accuracy at phase ``s`` on the task
    introduced at phase ``tau``. The first phase forgets nothing.
    """
    if t < 0 or t >= len(matrix):
        raise DataError(f"phase {t} outside the {len(matrix)}-phase history")
    if t == 0:
        return 0.0
    past = [tau for tau in range(min(t, len(matrix[t])))]
    if not past:
        return 0.0
    drops = []
    for tau in past:
        column = [matrix[s][tau] for s in range(tau, t + 1) if tau < len(matrix[s])]
        drops.append(max(column) - matrix[t][tau])
    return float(np.mean(drops))


def _check_layer_alignment(datasets: list[FeatureDataset], role: str) -> None:
    first = datasets[0]
    for i, ds in enumerate(datasets[1:], start=1):
        if ds.n_samples != first.n_samples or not np.array_equal(ds.labels, first.labels):
            raise DataError(f"{role} layer {i} rows are not aligned with layer 0")
        tags_a, tags_b = first.rotation_tags, ds.rotation_tags
        if (tags_a is None) != (tags_b is None) or (
            tags_a is not None and not np.array_equal(tags_a, tags_b)
        ):
            raise DataError(f"{role} layer {i} rotation tags are not aligned with layer 0")


def _rotation_groups(ds: FeatureDataset) -> None:
    if ds.rotation_tags is None:
        raise DataError("augmentation modes need rotation-tagged features")
    if ds.n_samples % 4 != 0:
        raise DataError("rotation-tagged data must come in groups of four rows")
    tags = ds.rotation_tags.reshape(-1, 4)
    if not np.all(tags == np.array([0, 1, 2, 3], dtype=np.uint8)):
        raise DataError("rotation tags must cycle 0,1,2,3 per sample")
    labels = ds.labels.reshape(-1, 4)
    if not np.all(labels == labels[:, :1]):
        raise DataError("all four rotations of a sample must share its label")


def _tag_zero(ds: FeatureDataset) -> FeatureDataset:
    if ds.rotation_tags is None:
        return ds
    return ds.select(ds.rotation_tags == 0)


def _kind_for_tensor(flags: frozenset[str]) -> CenterKind:
    if "R" in flags:
        return CenterKind.RESIDUAL
    if "D" in flags:
        return CenterKind.PROBING
    return CenterKind.PROTOTYPE


def _gather_centers(model: IncrementalModel, kind: CenterKind) -> tuple[np.ndarray, np.ndarray]:
    """All centers of one kind across cliques, sorted by class id."""
    ids = []
    vectors = []
    for clique in model.cliques:
        centers = clique.centers_of(kind)
        if centers is None:
            raise DataError(f"phase {clique.phase_id} has no {kind.value} centers")
        for c in centers:
            ids.append(c.class_id)
            vectors.append(c.vector)
    order = np.argsort(np.array(ids))
    return np.array(ids)[order], np.stack(vectors)[order]


def _signed_power(d: np.ndarray, gamma: float) -> np.ndarray:
    """Distance-like score: smaller is closer, for any nonzero gamma."""
    if gamma < 0.0 and np.any(d == 0.0):
        raise DataError("zero layer distance encountered: negative gamma is singular")
    return np.sign(gamma) * d ** gamma


def _predict_batch(
    models: list[IncrementalModel], queries: list[np.ndarray], gamma: float
) -> np.ndarray:
    """Two-stage prediction, over one layer or several (influence-summed)."""
    if len(models) == 1:
        return predict_many(models[0], queries[0])
    base = models[0]
    n = queries[0].shape[0]
    within_kind = CenterKind.PROBING if base.use_dnc else CenterKind.PROTOTYPE
    cross_kind = CenterKind.RESIDUAL if base.use_residual else CenterKind.PROTOTYPE
    cross_scores = np.empty((n, base.n_phases))
    winner_classes = np.empty((n, base.n_phases), dtype=np.int64)
    for t in range(base.n_phases):
        class_ids = np.asarray(base.cliques[t].class_ids)
        within = np.zeros((n, class_ids.size))
        for model, Z in zip(models, queries):
            centers = model.cliques[t].centers_of(within_kind)
            if centers is None:
                raise DataError(f"phase {t} has no {within_kind.value} centers")
            within += _signed_power(pairwise_sq_distances(Z, np.stack([c.vector for c in centers])), gamma)
        local = np.argmin(within, axis=1)
        winner_classes[:, t] = class_ids[local]
        cross = np.zeros(n)
        for model, Z in zip(models, queries):
            centers = model.cliques[t].centers_of(cross_kind)
            if centers is None:
                raise DataError(f"phase {t} has no {cross_kind.value} centers")
            vectors = np.stack([c.vector for c in centers])[local]
            diff = Z - vectors
            cross += _signed_power((diff * diff).sum(axis=1), gamma)
        cross_scores[:, t] = cross
    best = np.argmin(cross_scores, axis=1)
    return winner_classes[np.arange(n), best]


def _distance_tensors(
    models: list[IncrementalModel],
    grouped_queries: list[np.ndarray],
    seen_classes: np.ndarray,
    kind: CenterKind,
    gamma: float,
) -> np.ndarray:
    """Per-sample 4 x 4 x K distance tensors, shape (N, 4, 4, K).

    ``grouped_queries[l]`` has shape (N, 4, dim_l): the four rotated
    views of each sample at layer ``l``. Entry (n, a, a', k) accumulates
    the per-layer distance from view ``a`` to the rotation-``a'`` variant
    center of base class ``seen_classes[k]``.
    """
    n = grouped_queries[0].shape[0]
    k = seen_classes.size
    expected_ids = (seen_classes[:, None] * 4 + np.arange(4)).ravel()
    values = np.zeros((n, 4, 4, k))
    layered = len(models) > 1
    for model, grouped in zip(models, grouped_queries):
        ids, matrix = _gather_centers(model, kind)
        if not np.array_equal(ids, expected_ids):
            raise DataError("model classes do not cover the rotation-expanded label set")
        flat = grouped.reshape(n * 4, grouped.shape[2])
        d = pairwise_sq_distances(flat, matrix).reshape(n, 4, k, 4)
        d = np.transpose(d, (0, 1, 3, 2))
        values += _signed_power(d, gamma) if layered else d
    return values


@dataclass
class _AugmentedEval:
    predictions: np.ndarray
    integration_predictions: np.ndarray
    base_predictions: np.ndarray
    hv_values: np.ndarray


def _evaluate_augmented(
    models: list[IncrementalModel],
    grouped_queries: list[np.ndarray],
    seen_classes: np.ndarray,
    flags: frozenset[str],
    gamma: float,
    diagonal: bool,
) -> _AugmentedEval:
    values = _distance_tensors(models, grouped_queries, seen_classes, _kind_for_tensor(flags), gamma)
    ai_idx = augment.integrate_many(values, diagonal_only=diagonal)
    if "AC" in flags:
        idx = augment.consensus_many(values, diagonal_only=diagonal)
    else:
        idx = ai_idx
    # Delta-accuracy always compares integration against the single
    # unrotated prediction (the (0, 0) slice), whichever rule the run uses.
    base_idx = np.argmin(values[:, 0, 0, :], axis=1)
    return _AugmentedEval(
        predictions=seen_classes[idx],
        integration_predictions=seen_classes[ai_idx],
        base_predictions=seen_classes[base_idx],
        hv_values=augment.hv_many(values, diagonal_only=diagonal),
    )


def run_protocol(cfg: RunConfig) -> EvalReport:
    """Run the full phase protocol described by the manifest and emit the report."""
    flags = parse_mode(cfg.mode)
    manifest = load_manifest(cfg.manifest_path)
    if "L" in flags and len(manifest.layers) < 2:
        raise ConfigError("layered mode requires at least two layers in the manifest")
    augmented = "AC" in flags or "AI" in flags
    if augmented and manifest.augmentations != 4:
        raise ConfigError("augmentation modes require rotation-expanded data (augmentations = 4)")
    layered = "L" in flags
    if augmented and layered and cfg.gamma < 0:
        raise ConfigError("layered augmentation requires a positive gamma")

    layer_files = list(manifest.layers) if layered else [manifest.layers[0]]
    train_all = [read_features(lf.train_path) for lf in layer_files]
    test_all = [read_features(lf.test_path) for lf in layer_files]
    _check_layer_alignment(train_all, "train")
    _check_layer_alignment(test_all, "test")

    if augmented:
        for ds in train_all + test_all:
            _rotation_groups(ds)
    else:
        train_all = [_tag_zero(ds) for ds in train_all]
        test_all = [_tag_zero(ds) for ds in test_all]

    params = cfg.transform if "N" in flags else TransformParams.disabled()
    train_phases = [split_phases(ds, manifest) for ds in train_all]
    test_phases = [split_phases(ds, manifest) for ds in test_all]
    for t, phase in enumerate(manifest.phases):
        got = set(train_phases[0][t].class_ids())
        if got != set(phase):
            raise DataError(f"train data for phase {t} covers classes {sorted(got)}, manifest lists {sorted(phase)}")
        if test_phases[0][t].n_samples == 0:
            raise DataError(f"test data for phase {t} is empty")

    # Transform once, up front; queries and centers must live in the same space.
    train_X = [[compose(p.features64, params) for p in phases] for phases in train_phases]
    test_X = [[compose(p.features64, params) for p in phases] for phases in test_phases]

    models = [
        IncrementalModel(
            dim=ds.n_dims, transform=params, use_dnc="D" in flags, use_residual="R" in flags
        )
        for ds in train_all
    ]

    n_phases = manifest.n_phases
    matrix: list[list[float]] = []
    phase_accuracy: list[float] = []
    avg_acc: list[float] = []
    forgetting: list[float] = []
    final_stats: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []

    for t in range(n_phases):
        probe_cfg = replace(cfg.probe, seed=cfg.probe.seed + t)
        for l in range(len(models)):
            labels = train_phases[l][t].labels.astype(np.int64)
            if augmented:
                labels = labels * 4 + train_phases[l][t].rotation_tags.astype(np.int64)
            models[l] = add_phase(models[l], (train_X[l][t], labels), probe_cfg)

        row: list[float] = []
        correct_total = 0
        count_total = 0
        seen = np.array(sorted(c for phase in manifest.phases[: t + 1] for c in phase))
        for tau in range(t + 1):
            truths = test_phases[0][tau].labels.astype(np.int64)
            if augmented:
                truths = truths.reshape(-1, 4)[:, 0]
                grouped = [test_X[l][tau].reshape(-1, 4, test_X[l][tau].shape[1]) for l in range(len(models))]
                ev = _evaluate_augmented(models, grouped, seen, flags, cfg.gamma, cfg.diagonal_augmentation)
                preds = ev.predictions
                if t == n_phases - 1:
                    final_stats.append(
                        (truths, ev.hv_values, ev.integration_predictions, ev.base_predictions)
                    )
            else:
                preds = _predict_batch(models, [test_X[l][tau] for l in range(len(models))], cfg.gamma)
            n_correct = int((preds == truths).sum())
            row.append(100.0 * n_correct / truths.size)
            correct_total += n_correct
            count_total += truths.size
        matrix.append(row)
        phase_accuracy.append(100.0 * correct_total / count_total)
        avg_acc.append(float(np.mean(phase_accuracy)))
        forgetting.append(avg_forgetting(matrix, t))

    per_class_hv = None
    per_class_delta = None
    hv_pearson = None
    if augmented and final_stats:
        truths = np.concatenate([s[0] for s in final_stats])
        hv_values = np.concatenate([s[1] for s in final_stats])
        ai_preds = np.concatenate([s[2] for s in final_stats])
        base_preds = np.concatenate([s[3] for s in final_stats])
        per_class_hv = {}
        per_class_delta = {}
        for c in sorted(set(int(v) for v in truths)):
            mask = truths == c
            per_class_hv[c] = float(hv_values[mask].mean())
            per_class_delta[c] = float(
                100.0 * ((ai_preds[mask] == c).mean() - (base_preds[mask] == c).mean())
            )
        try:
            classes = sorted(per_class_hv)
            hv_pearson = augment.pearson(
                [per_class_hv[c] for c in classes], [per_class_delta[c] for c in classes]
            )
        except DataError:
            hv_pearson = None

    report = EvalReport(
        mode=cfg.mode,
        seed=cfg.seed,
        phase_classes=[[int(c) for c in phase] for phase in manifest.phases],
        accuracy_matrix=matrix,
        phase_accuracy=phase_accuracy,
        avg_accuracy=avg_acc,
        last_accuracy=phase_accuracy[-1],
        avg_forgetting=forgetting,
        per_class_hv=per_class_hv,
        per_class_delta_accuracy=per_class_delta,
        hv_delta_pearson=hv_pearson,
    )
    emit_report(report, cfg.out_dir)
    return report


def _svg_curve(report: EvalReport) -> str:
    """Hand-rolled SVG so re-emission is byte-identical."""
    width, height = 640, 400
    left, right, top, bottom = 60, 20, 20, 40
    n = len(report.phase_accuracy)
    xs = [left + (width - left - right) * (i / max(n - 1, 1)) for i in range(n)]

    def y_of(v: float) -> float:
        return top + (height - top - bottom) * (1.0 - v / 100.0)

    series = [
        ("phase accuracy", "#1f77b4", report.phase_accuracy),
        ("running average", "#d62728", report.avg_accuracy),
    ]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = y_of(100.0 * frac)
        parts.append(
            f'<text x="{left - 8:.2f}" y="{y + 4:.2f}" font-size="11" text-anchor="end">{100 * frac:.0f}</text>'
        )
    for i, x in enumerate(xs):
        parts.append(
            f'<text x="{x:.2f}" y="{height - bottom + 16:.2f}" font-size="11" text-anchor="middle">{i}</text>'
        )
    for idx, (name, color, values) in enumerate(series):
        points = " ".join(f"{x:.2f},{y_of(v):.2f}" for x, v in zip(xs, values))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>')
        for x, v in zip(xs, values):
            parts.append(f'<circle cx="{x:.2f}" cy="{y_of(v):.2f}" r="3" fill="{color}"/>')
        parts.append(
            f'<text x="{left + 10}" y="{top + 14 + 16 * idx}" font-size="12" fill="{color}">{name}</text>'
        )
    parts.append(
        f'<text x="{(left + width - right) / 2:.2f}" y="{height - 8}" font-size="12" text-anchor="middle">phase</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write report.json, report.csv, and accuracy_curve.svg; deterministic bytes."""
    if not report.accuracy_matrix or not report.phase_accuracy:
        raise DataError("cannot emit a report with an empty accuracy matrix")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    json_path = out / "report.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")

    n = len(report.accuracy_matrix)
    header = (
        ["phase", "n_classes", "phase_accuracy", "avg_accuracy", "avg_forgetting"]
        + [f"acc_on_phase_{tau}" for tau in range(n)]
    )
    lines = [",".join(header)]
    for t in range(n):
        row = [
            str(t),
            str(sum(len(p) for p in report.phase_classes[: t + 1])),
            f"{report.phase_accuracy[t]:.6f}",
            f"{report.avg_accuracy[t]:.6f}",
            f"{report.avg_forgetting[t]:.6f}",
        ]
        row += [f"{a:.6f}" for a in report.accuracy_matrix[t]] + [""] * (n - t - 1)
        lines.append(",".join(row))
    csv_path = out / "report.csv"
    csv_path.write_text("\n".join(lines) + "\n")

    svg_path = out / "accuracy_curve.svg"
    svg_path.write_text(_svg_curve(report))
    return [json_path, csv_path, svg_path]


@dataclass(frozen=True)
class SynthOutputs:
    manifest_path: Path
    feature_files: list[Path]


def synthesize_benchmark(
    out_dir: str | Path,
    cfg: SynthConfig,
    phase_sizes: Sequence[int],
    n_layers: int = 1,
    layer_dims: Sequence[int] | None = None,
) -> SynthOutputs:
    """Write train/test feature files (5:1 split per class) plus a manifest.

    Layers beyond the first are independent blob geometries over the same
    labels, standing in for intermediate network features; rows are
    aligned across layers by construction.
    """
    if sum(phase_sizes) != cfg.n_classes or any(s < 1 for s in phase_sizes):
        raise ConfigError(
            f"phase sizes {list(phase_sizes)} must be positive and sum to {cfg.n_classes} classes"
        )
    if n_layers < 1:
        raise ConfigError("at least one layer is required")
    dims = list(layer_dims) if layer_dims is not None else [cfg.n_dims] * n_layers
    if len(dims) != n_layers:
        raise ConfigError(f"expected {n_layers} layer dims, got {len(dims)}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    test_count = max(1, cfg.samples_per_class // 5)

    files: list[Path] = []
    layers: list[LayerFiles] = []
    for l in range(n_layers):
        name = "embedding" if l == 0 else f"layer{l + 1}"
        layer_cfg = replace(cfg, n_dims=dims[l], seed=cfg.seed + l)
        train = synth_gaussian(layer_cfg, sample_seed=layer_cfg.seed)
        test_cfg = replace(layer_cfg, samples_per_class=test_count)
        test = synth_gaussian(test_cfg, sample_seed=layer_cfg.seed + 1)
        train_path = write_features(train, out / f"train_{name}.ivfs")
        test_path = write_features(test, out / f"test_{name}.ivfs")
        files += [train_path, test_path]
        layers.append(
            LayerFiles(name=name, train_path=Path(train_path.name), test_path=Path(test_path.name))
        )

    phases = []
    next_class = 0
    for size in phase_sizes:
        phases.append(tuple(range(next_class, next_class + size)))
        next_class += size
    manifest = PhaseManifest(
        phases=tuple(phases),
        layers=tuple(layers),
        augmentations=cfg.augmentations,
        base_dir=out,
    )
    manifest_path = save_manifest(manifest, out / "manifest.ini")
    return SynthOutputs(manifest_path=manifest_path, feature_files=files)


def inspect_file(path: str | Path) -> dict:
    """Header summary of an IVFS feature file or IVMD model file."""
    p = Path(path)
    if not p.exists():
        raise DataError(f"no such file: {p}")
    blob = p.read_bytes()
    if blob[:4] == b"IVFS":
        ds = read_features(p)
        return {
            "format": "IVFS",
            "path": str(p),
            "n_samples": ds.n_samples,
            "n_dims": ds.n_dims,
            "rotation_tags": ds.rotation_tags is not None,
            "classes": ds.class_ids(),
        }
    if blob[:4] == b"IVMD":
        from .incremental import deserialize_model

        model = deserialize_model(blob)
        return {
            "format": "IVMD",
            "path": str(p),
            "dim": model.dim,
            "n_phases": model.n_phases,
            "use_dnc": model.use_dnc,
            "use_residual": model.use_residual,
            "classes": model.class_ids(),
        }
    raise DataError(f"bad magic {blob[:4]!r} at offset 0: not a vorocil file")
