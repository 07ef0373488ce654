"""Nearest-centroid segmentation and its evaluation metrics.

The segmenter is intentionally minimal: one mean RGB color per class,
estimated from lightly blurred training images, and pixels are assigned to
the nearest centroid. It stands in for heavier learned models in the
iterative stylize-and-segment loop while keeping every run exactly
reproducible. Scoring follows the standard confusion-matrix route: per-class
intersection over union, their mean, and pixel accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataio import IGNORE_LABEL, validate_image, validate_mask
from .errors import ValidationError
from .stylize import box_mean

# The 3x3 pre-blur applied before training and prediction.
BLUR_RADIUS = 1


def _blur(image: np.ndarray) -> np.ndarray:
    out = np.empty_like(image, dtype=np.float64)
    for c in range(3):
        out[:, :, c] = box_mean(image[:, :, c].astype(np.float64), BLUR_RADIUS)
    return out


@dataclass
class CentroidSegmenter:
    """Mean-color-per-class pixel classifier."""

    centroids: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def trained(self) -> bool:
        return bool(self.centroids)

    @property
    def num_classes(self) -> int:
        return max(self.centroids) + 1 if self.centroids else 0

    def to_json(self) -> dict:
        return {
            "classes": {
                str(label): [float(v) for v in self.centroids[label]]
                for label in sorted(self.centroids)
            }
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CentroidSegmenter":
        if not isinstance(obj, dict) or not isinstance(obj.get("classes"), dict):
            raise ValidationError("segmenter JSON must be an object with a 'classes' map")
        centroids: dict[int, np.ndarray] = {}
        for key, value in obj["classes"].items():
            try:
                label = int(key)
            except ValueError as exc:
                raise ValidationError(f"segmenter class id {key!r} is not an integer") from exc
            if not 0 <= label <= 254:
                raise ValidationError(f"segmenter class id {label} outside [0, 254]")
            arr = np.asarray(value, dtype=np.float64)
            if arr.shape != (3,) or not np.all(np.isfinite(arr)):
                raise ValidationError(f"centroid for class {label} must be 3 finite numbers")
            centroids[label] = arr
        return cls(centroids=centroids)


def save_segmenter(segmenter: CentroidSegmenter, path: str | Path) -> None:
    Path(path).write_text(json.dumps(segmenter.to_json(), indent=2) + "\n", encoding="utf-8")


def load_segmenter(path: str | Path) -> CentroidSegmenter:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid segmenter JSON ({exc.msg})") from exc
    return CentroidSegmenter.from_json(obj)


def train_segmenter(dataset) -> CentroidSegmenter:
    """Estimate one centroid per class over a labeled dataset.

    Accepts any sequence of objects with image and mask attributes. Images
    are 3x3 box blurred first, the same preprocessing prediction uses;
    IGNORE pixels contribute nothing.
    """
    items = list(dataset)
    if not items:
        raise ValidationError("cannot train on an empty dataset")
    sums = np.zeros((256, 3), dtype=np.float64)
    counts = np.zeros(256, dtype=np.int64)
    for item in items:
        if item.mask is None:
            raise ValidationError("training pairs must carry masks")
        validate_image(item.image)
        validate_mask(item.mask, item.image)
        blurred = _blur(item.image)
        flat_labels = item.mask.reshape(-1)
        counts += np.bincount(flat_labels, minlength=256)
        for c in range(3):
            sums[:, c] += np.bincount(
                flat_labels, weights=blurred[:, :, c].reshape(-1), minlength=256
            )
    counts[IGNORE_LABEL] = 0
    present = np.nonzero(counts)[0]
    if present.size == 0:
        raise ValidationError("dataset contains only IGNORE pixels")
    centroids = {int(label): sums[label] / counts[label] for label in present}
    return CentroidSegmenter(centroids=centroids)


def predict_mask(segmenter: CentroidSegmenter, image: np.ndarray) -> np.ndarray:
    """Assign each pixel of a blurred image to its nearest centroid.

    Distances are squared Euclidean in RGB; exact ties go to the smaller
    class id.
    """
    if not segmenter.trained:
        raise ValidationError("segmenter has no centroids; train or load one first")
    validate_image(image)
    blurred = _blur(image)
    labels = sorted(segmenter.centroids)
    distances = np.empty((len(labels),) + blurred.shape[:2], dtype=np.float64)
    for k, label in enumerate(labels):
        diff = blurred - segmenter.centroids[label]
        distances[k] = np.sum(diff * diff, axis=-1)
    winner = np.argmin(distances, axis=0)
    return np.asarray(labels, dtype=np.uint8)[winner]


def confusion(pred: np.ndarray, truth: np.ndarray, num_classes: int) -> np.ndarray:
    """Confusion counts over non-IGNORE ground-truth pixels.

    Returns a (num_classes, num_classes) int64 matrix with ground truth on
    rows and predictions on columns. Accumulate over a dataset by summing
    the per-pair matrices.
    """
    validate_mask(pred, name="pred")
    validate_mask(truth, name="truth")
    if pred.shape != truth.shape:
        raise ValidationError(f"pred shape {pred.shape} does not match truth shape {truth.shape}")
    if num_classes < 1:
        raise ValidationError(f"num_classes must be positive, got {num_classes}")
    keep = truth != IGNORE_LABEL
    t = truth[keep].astype(np.int64)
    p = pred[keep].astype(np.int64)
    if t.size:
        if int(t.max()) >= num_classes:
            raise ValidationError(f"truth label {int(t.max())} out of range for {num_classes} classes")
        if int(p.max()) >= num_classes:
            raise ValidationError(f"pred label {int(p.max())} out of range for {num_classes} classes")
    binned = np.bincount(t * num_classes + p, minlength=num_classes * num_classes)
    return binned.reshape(num_classes, num_classes).astype(np.int64)


@dataclass(frozen=True)
class SegMetrics:
    """Per-class IoU, its mean over scorable classes, and pixel accuracy."""

    per_class_iou: dict[int, float]
    mean_iou: float
    pixel_acc: float


def segmentation_metrics(cm: np.ndarray) -> SegMetrics:
    """IoU per class, mean IoU, and pixel accuracy from a confusion matrix.

    IoU for class L is cm[L,L] / (row_L + col_L - cm[L,L]); classes whose
    denominator is zero (never seen in truth or prediction) are excluded
    from both the map and the mean.
    """
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValidationError(f"confusion matrix must be square, got shape {cm.shape}")
    if not np.issubdtype(cm.dtype, np.integer) or (cm < 0).any():
        raise ValidationError("confusion matrix must hold non-negative integer counts")
    total = int(cm.sum())
    if total == 0:
        raise ValidationError("empty confusion matrix")
    diag = np.diag(cm).astype(np.float64)
    rows = cm.sum(axis=1).astype(np.float64)
    cols = cm.sum(axis=0).astype(np.float64)
    denom = rows + cols - diag
    per_class = {
        int(label): float(diag[label] / denom[label])
        for label in np.nonzero(denom > 0)[0]
    }
    mean_iou = float(np.mean(list(per_class.values())))
    pixel_acc = float(np.trace(cm) / total)
    return SegMetrics(per_class_iou=per_class, mean_iou=mean_iou, pixel_acc=pixel_acc)
