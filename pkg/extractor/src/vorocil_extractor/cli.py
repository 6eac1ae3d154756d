"""Command-line entry point for the feature exporter."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backbone import available_taps
from .export import ExportSpec, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vorocil-extract",
        description=(
            "Export an image-folder dataset (one subdirectory per class) into IVFS "
            "feature files using a frozen CNN backbone, with rotation variants and a "
            "manifest ready for the classifier CLI."
        ),
    )
    parser.add_argument("--dataset", required=True, type=Path, help="Training image folder.")
    parser.add_argument("--out", required=True, type=Path, help="Output directory.")
    parser.add_argument("--test-dataset", type=Path, default=None,
                        help="Optional held-out image folder; defaults to reusing the training files.")
    parser.add_argument("--backbone", default="tiny8",
                        help="'tiny8' (built-in frozen weights) or a torchvision model name with --weights.")
    parser.add_argument("--weights", type=Path, default=None, help="Local weights file for the backbone.")
    parser.add_argument("--layers", default="embedding",
                        help="Comma-separated layer taps, e.g. embedding,block2.")
    parser.add_argument("--rotations", type=int, choices=(1, 4), default=4,
                        help="Rows per image: 4 adds 90/180/270-degree variants with tags.")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--image-size", type=int, default=32)
    parser.add_argument("--phases", default=None,
                        help="Comma-separated class counts per phase for the manifest.")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    taps = tuple(t.strip() for t in args.layers.split(",") if t.strip())
    phases = None
    if args.phases:
        try:
            phases = tuple(int(tok) for tok in args.phases.replace(",", " ").split())
        except ValueError:
            print(f"error: --phases must be integers, got {args.phases!r}", file=sys.stderr)
            return 2
    try:
        spec = ExportSpec(
            dataset_dir=args.dataset,
            out_dir=args.out,
            backbone=args.backbone,
            weights_path=args.weights,
            layer_taps=taps,
            rotations=args.rotations,
            batch_size=args.batch_size,
            device=args.device,
            image_size=args.image_size,
            test_dataset_dir=args.test_dataset,
            phase_sizes=phases,
        )
        result = export(spec)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"classes: {', '.join(result.class_names)}")
    print(f"samples: {result.n_samples} (x{spec.rotations} rotations)")
    for path in result.feature_files:
        print(f"wrote {path}")
    print(f"manifest: {result.manifest_path}")
    print(f"available taps for {spec.backbone}: {', '.join(available_taps(spec.backbone))}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
