"""Iterative stylize-then-segment refinement over synthetic datasets.

Round 0 stylizes every synthetic image against unlabeled real images using
whole-image (all-ones) masks, which already closes much of the color gap. A
segmenter trained on that output then estimates masks for the real images,
and the next round stylizes class-against-class using those estimates. Each
round tightens the per-class color alignment, which in turn improves the
next segmenter. Real ground-truth masks are never consumed anywhere: the
real side of this function takes bare images only.

On disk a run is laid out as::

    output_root/
      iter_0/ manifest.jsonl  images/  masks/  segmenter.json
      iter_1/ ...
      iter_<last>/ manifest.jsonl  images/  masks/       (no segmenter)
      run_log.json

iter_t holds the dataset the round-t segmenter trained on, plus that
segmenter. With iterations=0 the run stops after training the first
segmenter: only iter_0 is emitted (the configuration used when the stylized
dataset itself, not the segmenter, is the product). Output masks always
carry the original fine ground-truth labels, whatever mask views were used
during stylization.
"""

from __future__ import annotations

import json
import shutil
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dataio import (
    IGNORE_LABEL,
    LabeledPair,
    save_image,
    save_mask,
    validate_image,
    validate_mask,
    write_manifest,
)
from .errors import PipelineError, SynstyleError, ValidationError
from .segmeval import (
    CentroidSegmenter,
    confusion,
    predict_mask,
    save_segmenter,
    segmentation_metrics,
    train_segmenter,
)
from .stylize import StylizeConfig, StylizedRecord, all_ones_mask, stylize_dataset


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for one refinement run.

    iterations is the number of segmenter-feedback rounds; the bootstrap
    dataset and segmenter exist even at 0. coarse_map, when given, relabels
    classes to a coarser set during stylization only (both the synthetic
    ground truth and the estimated real masks pass through it).
    """

    output_root: Path
    iterations: int = 2
    stylize: StylizeConfig = field(default_factory=StylizeConfig)
    coarse_map: dict[int, int] | None = None
    seed: int = 0


@dataclass(frozen=True)
class PipelineRun:
    """What a run produced: manifest paths of every dataset written, the
    segmenter of every round, and the per-round log entries. Datasets other
    than the last may have been deleted if the run did not keep
    intermediates."""

    datasets: list[Path]
    segmenters: list[CentroidSegmenter]
    log: list[dict]


def coarsen_mask(mask: np.ndarray, table: dict[int, int]) -> np.ndarray:
    """Relabel a mask through a class table; IGNORE maps to IGNORE.

    Every non-IGNORE label that occurs in the mask must have an entry.
    """
    validate_mask(mask)
    lut = np.full(256, IGNORE_LABEL, dtype=np.uint8)
    for label, target in table.items():
        if not 0 <= int(label) <= 254 or not 0 <= int(target) <= 254:
            raise ValidationError(f"coarse map entry {label} -> {target} outside [0, 254]")
        lut[int(label)] = int(target)
    present = np.unique(mask)
    for label in present:
        if label != IGNORE_LABEL and int(label) not in table:
            raise ValidationError(f"label {int(label)} occurs in mask but is absent from the coarse map")
    return lut[mask]


def _derived_seed(seed: int, dataset_index: int) -> int:
    """A stable per-dataset seed so every round draws fresh style pairings."""
    return int(np.random.SeedSequence([seed, dataset_index]).generate_state(1, np.uint64)[0])


def _write_dataset(records: list[StylizedRecord], out_dir: Path) -> Path:
    images_dir = out_dir / "images"
    masks_dir = out_dir / "masks"
    images_dir.mkdir(parents=True, exist_ok=True)
    masks_dir.mkdir(parents=True, exist_ok=True)
    rows: list[tuple[str, str | None]] = []
    written_masks: set[int] = set()
    per_content: dict[int, int] = {}
    for rec in records:
        k = per_content.get(rec.content_index, 0)
        per_content[rec.content_index] = k + 1
        image_rel = f"images/{rec.content_index:05d}_{k:03d}.png"
        mask_rel = f"masks/{rec.content_index:05d}.png"
        save_image(rec.image, out_dir / image_rel)
        if rec.content_index not in written_masks:
            save_mask(rec.mask, out_dir / mask_rel)
            written_masks.add(rec.content_index)
        rows.append((image_rel, mask_rel))
    manifest_path = out_dir / "manifest.jsonl"
    write_manifest(manifest_path, rows)
    return manifest_path


def _drop_dataset_files(iter_dir: Path) -> None:
    shutil.rmtree(iter_dir / "images", ignore_errors=True)
    shutil.rmtree(iter_dir / "masks", ignore_errors=True)
    (iter_dir / "manifest.jsonl").unlink(missing_ok=True)


def _evaluate(segmenter: CentroidSegmenter, eval_pairs: list[LabeledPair]) -> tuple[float, float]:
    num_classes = max(segmenter.centroids)
    for pair in eval_pairs:
        labels = pair.mask[pair.mask != IGNORE_LABEL]
        if labels.size:
            num_classes = max(num_classes, int(labels.max()))
    num_classes += 1
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    for pair in eval_pairs:
        pred = predict_mask(segmenter, pair.image)
        cm += confusion(pred, pair.mask, num_classes)
    scores = segmentation_metrics(cm)
    return scores.mean_iou, scores.pixel_acc


def run_pipeline(
    synthetic: list[LabeledPair],
    real_images: list[np.ndarray],
    cfg: PipelineConfig,
    eval_pairs: list[LabeledPair] | None = None,
    jobs: int = 1,
    keep_intermediate: bool = True,
) -> PipelineRun:
    """Run the full refinement loop and materialize every round to disk.

    synthetic pairs must carry ground-truth masks; real_images are bare
    image arrays. When eval_pairs is given, each round's segmenter is scored
    against it and the scores land in the log. The run is deterministic
    under (inputs, cfg.seed) for any jobs value.
    """
    if not synthetic:
        raise ValidationError("synthetic dataset is empty")
    for i, pair in enumerate(synthetic):
        if pair.mask is None:
            raise ValidationError(f"synthetic pair {i} has no ground-truth mask")
    if not real_images:
        raise ValidationError("real image list is empty")
    for i, image in enumerate(real_images):
        validate_image(image, name=f"real image {i}")
    if eval_pairs is not None:
        for i, pair in enumerate(eval_pairs):
            if pair.mask is None:
                raise ValidationError(f"eval pair {i} has no mask")
    if cfg.iterations < 0:
        raise ValidationError(f"iterations must be non-negative, got {cfg.iterations}")

    out_root = Path(cfg.output_root)
    out_root.mkdir(parents=True, exist_ok=True)

    def _stylize_round(contents: list[LabeledPair], styles: list[LabeledPair], index: int):
        round_cfg = replace(cfg.stylize, seed=_derived_seed(cfg.seed, index))
        records = stylize_dataset(contents, styles, round_cfg, jobs=jobs)
        return [replace(r, mask=synthetic[r.content_index].mask) for r in records]

    def _content_views() -> list[LabeledPair]:
        if cfg.coarse_map is None:
            return list(synthetic)
        return [
            LabeledPair(image=p.image, mask=coarsen_mask(p.mask, cfg.coarse_map))
            for p in synthetic
        ]

    try:
        ones_contents = [LabeledPair(image=p.image, mask=all_ones_mask(p.image)) for p in synthetic]
        ones_styles = [LabeledPair(image=im, mask=all_ones_mask(im)) for im in real_images]
        records = _stylize_round(ones_contents, ones_styles, index=0)
    except OSError:
        raise
    except SynstyleError as exc:
        raise PipelineError(f"bootstrap dataset: {exc}") from exc

    datasets = [_write_dataset(records, out_root / "iter_0")]
    segmenters: list[CentroidSegmenter] = []
    log: list[dict] = []

    for t in range(cfg.iterations + 1):
        started = time.perf_counter()
        dataset_size = len(records)
        try:
            segmenter = train_segmenter(records)
            save_segmenter(segmenter, out_root / f"iter_{t}" / "segmenter.json")
            segmenters.append(segmenter)
            mean_iou = pixel_acc = None
            if eval_pairs is not None:
                mean_iou, pixel_acc = _evaluate(segmenter, eval_pairs)
            if cfg.iterations > 0:
                if jobs > 1:
                    with ThreadPoolExecutor(max_workers=jobs) as pool:
                        estimated = list(pool.map(lambda im: predict_mask(segmenter, im), real_images))
                else:
                    estimated = [predict_mask(segmenter, im) for im in real_images]
                if cfg.coarse_map is not None:
                    estimated = [coarsen_mask(m, cfg.coarse_map) for m in estimated]
                styles = [
                    LabeledPair(image=im, mask=m) for im, m in zip(real_images, estimated)
                ]
                records = _stylize_round(_content_views(), styles, index=t + 1)
                datasets.append(_write_dataset(records, out_root / f"iter_{t + 1}"))
                if not keep_intermediate:
                    _drop_dataset_files(out_root / f"iter_{t}")
        except OSError:
            raise
        except SynstyleError as exc:
            raise PipelineError(f"iteration {t}: {exc}") from exc
        log.append(
            {
                "t": t,
                "dataset_size": dataset_size,
                "mean_iou": mean_iou,
                "pixel_acc": pixel_acc,
                "seconds": time.perf_counter() - started,
            }
        )

    (out_root / "run_log.json").write_text(
        json.dumps({"iterations": log}, indent=2) + "\n", encoding="utf-8"
    )
    return PipelineRun(datasets=datasets, segmenters=segmenters, log=log)
