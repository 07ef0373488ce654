"""Command-line front end.

Exit codes: 0 on success, 1 for usage problems (including empty input
manifests), 2 for data or validation errors, 3 for I/O failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dataio import (
    LabeledPair,
    load_image,
    load_manifest,
    load_mask,
    load_pairs,
    read_features,
    save_image,
    save_mask,
    write_manifest,
    FeatureSet,
)
from .errors import EmptyManifestError, SynstyleError, ValidationError
from .fid import (
    class_frequencies,
    color_feature_extractor,
    per_class_fid,
    report_to_csv,
    report_to_json,
    weighted_fid,
)
from .pipeline import PipelineConfig, run_pipeline
from .randomize import hue_randomize
from .segmeval import confusion, load_segmenter, predict_mask, segmentation_metrics
from .stylize import StylizeConfig, all_ones_mask, stylize_pair


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems as exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _seed_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("value must be at least 1")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("value must be non-negative")
    return value


def _extractor_arg(text: str) -> tuple[str, int | None]:
    if text == "file":
        return ("file", None)
    if text.startswith("color:"):
        try:
            radius = int(text.split(":", 1)[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad extractor radius in {text!r}")
        if radius < 0:
            raise argparse.ArgumentTypeError("extractor radius must be non-negative")
        return ("color", radius)
    raise argparse.ArgumentTypeError(
        f"unknown extractor {text!r}; use color:<radius>, or file (then --a/--b are feature files)"
    )


def _load_pair(image_path: str, mask_path: str | None) -> LabeledPair:
    image = load_image(image_path)
    mask = load_mask(mask_path) if mask_path else all_ones_mask(image)
    return LabeledPair(image=image, mask=mask)


def _cmd_stylize(args) -> int:
    content = _load_pair(args.content, args.content_mask)
    style = _load_pair(args.style, args.style_mask)
    cfg = StylizeConfig(smoothing_enabled=not args.no_smooth, seed=args.seed)
    result = stylize_pair(content, style, cfg)
    save_image(result, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_ds(args) -> int:
    synthetic = load_pairs(load_manifest(args.synthetic_manifest), require_masks=True)
    real_manifest = load_manifest(args.real_manifest)
    real_images = [load_image(rec.image) for rec in real_manifest.records]
    eval_pairs = None
    if args.eval_manifest:
        eval_pairs = load_pairs(load_manifest(args.eval_manifest), require_masks=True)
    coarse_map = None
    if args.coarse_map:
        try:
            raw = json.loads(Path(args.coarse_map).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.coarse_map}: invalid JSON ({exc.msg})") from exc
        if not isinstance(raw, dict):
            raise ValidationError(f"{args.coarse_map}: coarse map must be a JSON object")
        try:
            coarse_map = {int(k): int(v) for k, v in raw.items()}
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{args.coarse_map}: coarse map entries must be integers") from exc
    cfg = PipelineConfig(
        output_root=Path(args.out),
        iterations=args.t,
        stylize=StylizeConfig(num_styles=args.n),
        coarse_map=coarse_map,
        seed=args.seed,
    )
    run = run_pipeline(
        synthetic,
        real_images,
        cfg,
        eval_pairs=eval_pairs,
        jobs=args.jobs,
        keep_intermediate=args.keep_intermediate,
    )
    for entry in run.log:
        line = f"round {entry['t']}: trained on {entry['dataset_size']} records"
        if entry["pixel_acc"] is not None:
            line += f", mean_iou={entry['mean_iou']:.4f}, pixel_acc={entry['pixel_acc']:.4f}"
        print(line)
    print(f"wrote {cfg.output_root / 'run_log.json'}")
    return 0


def _cmd_randomize(args) -> int:
    manifest = load_manifest(args.manifest)
    pairs = load_pairs(manifest, require_masks=True)
    out_root = Path(args.out)
    (out_root / "images").mkdir(parents=True, exist_ok=True)
    (out_root / "masks").mkdir(parents=True, exist_ok=True)
    shifts = {label: 0.0 for label in range(255)} if args.zero_shift else None
    rows: list[tuple[str, str | None]] = []
    for i, pair in enumerate(pairs):
        recolored = hue_randomize(pair, args.seed, shifts=shifts)
        image_rel = f"images/{i:05d}.png"
        mask_rel = f"masks/{i:05d}.png"
        save_image(recolored, out_root / image_rel)
        save_mask(pair.mask, out_root / mask_rel)
        rows.append((image_rel, mask_rel))
    write_manifest(out_root / "manifest.jsonl", rows)
    print(f"wrote {len(rows)} images under {out_root}")
    return 0


def _concat_features(parts: list[FeatureSet]) -> FeatureSet:
    return FeatureSet(
        labels=np.concatenate([p.labels for p in parts]) if parts else np.zeros(0, np.uint16),
        vectors=np.concatenate([p.vectors for p in parts]) if parts else np.zeros((0, 1), np.float32),
    )


def _row_count_frequencies(features: FeatureSet) -> dict[int, float]:
    if len(features) == 0:
        raise ValidationError("feature file has no rows; class frequencies are undefined")
    labels, counts = np.unique(features.labels, return_counts=True)
    total = int(counts.sum())
    return {int(l): int(c) / total for l, c in zip(labels, counts)}


def _cmd_fid(args) -> int:
    mode, radius = args.extractor
    if mode == "color":
        extractor = color_feature_extractor(radius)
        pairs_a = load_pairs(load_manifest(args.a), require_masks=True)
        pairs_b = load_pairs(load_manifest(args.b), require_masks=True)
        feats_a = _concat_features([extractor.extract(p.image, p.mask) for p in pairs_a])
        feats_b = _concat_features([extractor.extract(p.image, p.mask) for p in pairs_b])
        weight_pairs = pairs_a if args.weights_from == "a" else pairs_b
        frequencies = class_frequencies([p.mask for p in weight_pairs])
    else:
        feats_a = read_features(args.a)
        feats_b = read_features(args.b)
        frequencies = _row_count_frequencies(feats_a if args.weights_from == "a" else feats_b)
    report = per_class_fid(feats_a, feats_b)
    value = weighted_fid(report, frequencies)
    out_csv = Path(args.out_csv)
    out_csv.write_text(report_to_csv(report), encoding="utf-8")
    out_json = out_csv.with_suffix(".json")
    out_json.write_text(json.dumps(report_to_json(report), indent=2) + "\n", encoding="utf-8")
    for label in sorted(report.per_class):
        print(f"class {label}: {report.per_class[label].distance:.6g}")
    if report.skipped:
        print(f"skipped (too few samples or one-sided): {report.skipped}")
    print(f"weighted average: {value:.6g}")
    return 0


def _cmd_eval(args) -> int:
    segmenter = load_segmenter(args.segmenter)
    pairs = load_pairs(load_manifest(args.manifest), require_masks=True)
    num_classes = args.classes
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    for pair in pairs:
        pred = predict_mask(segmenter, pair.image)
        cm += confusion(pred, pair.mask, num_classes)
    scores = segmentation_metrics(cm)
    payload = {
        "per_class_iou": {str(k): v for k, v in sorted(scores.per_class_iou.items())},
        "mean_iou": scores.mean_iou,
        "pixel_acc": scores.pixel_acc,
    }
    Path(args.out_json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"mean_iou={scores.mean_iou:.4f} pixel_acc={scores.pixel_acc:.4f}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="synstyle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stylize", help="recolor one content image toward one style image")
    p.add_argument("--content", required=True, help="content image (PNG)")
    p.add_argument("--content-mask", default=None, help="content label mask; whole image if omitted")
    p.add_argument("--style", required=True, help="style image (PNG)")
    p.add_argument("--style-mask", default=None, help="style label mask; whole image if omitted")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--no-smooth", action="store_true", help="skip the guided-filter smoothing pass")
    p.add_argument("--seed", type=_seed_arg, default=0, help="reserved; this command draws no randomness")
    p.set_defaults(handler=_cmd_stylize)

    p = sub.add_parser("ds", help="expand a labeled synthetic dataset by iterative stylization")
    p.add_argument("--synthetic-manifest", required=True, help="JSONL manifest of labeled synthetic pairs")
    p.add_argument("--real-manifest", required=True, help="JSONL manifest of real images (masks ignored)")
    p.add_argument("--n", type=_positive_int, default=10, help="style draws per content image")
    p.add_argument("--t", type=_nonneg_int, default=2, help="segmenter feedback rounds")
    p.add_argument("--coarse-map", default=None, help="JSON file mapping class id to coarser id, applied during stylization")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=_seed_arg, default=0)
    p.add_argument("--eval-manifest", default=None, help="labeled pairs to score each round's segmenter on")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker threads; output is identical for any value")
    p.add_argument("--keep-intermediate", action=argparse.BooleanOptionalAction, default=True,
                   help="keep every round's images on disk (default) or drop all but the last")
    p.set_defaults(handler=_cmd_ds)

    p = sub.add_parser("randomize", help="randomize region colors by per-class hue rotation")
    p.add_argument("--manifest", required=True, help="JSONL manifest; every record needs a mask")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=_seed_arg, default=0)
    p.add_argument("--zero-shift", action="store_true",
                   help="test hook: force every class shift to 0 degrees")
    p.set_defaults(handler=_cmd_randomize)

    p = sub.add_parser("fid", help="per-class Frechet distance between two datasets")
    p.add_argument("--a", required=True, help="first manifest (or feature file with --extractor file)")
    p.add_argument("--b", required=True, help="second manifest (or feature file with --extractor file)")
    p.add_argument("--extractor", type=_extractor_arg, default=("color", 2),
                   help="color:<radius> (default color:2), or file to read feature files")
    p.add_argument("--weights-from", choices=("a", "b"), default="b",
                   help="which side's class frequencies weight the average (default: b, the target side)")
    p.add_argument("--out-csv", required=True, help="CSV report path; a .json mirror is written beside it")
    p.set_defaults(handler=_cmd_fid)

    p = sub.add_parser("eval", help="score a segmenter against labeled pairs")
    p.add_argument("--segmenter", required=True, help="segmenter JSON file")
    p.add_argument("--manifest", required=True, help="JSONL manifest of labeled pairs")
    p.add_argument("--classes", type=_positive_int, required=True, help="number of classes K")
    p.add_argument("--out-json", required=True, help="metrics JSON path")
    p.set_defaults(handler=_cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.handler(args)
    except EmptyManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, SynstyleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
