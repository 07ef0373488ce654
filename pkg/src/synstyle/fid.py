"""Per-class Frechet distances between labeled feature populations.

The distance between two Gaussians (m_a, C_a) and (m_b, C_b) is

    ||m_a - m_b||^2 + Tr(C_a + C_b - 2 (C_a C_b)^(1/2))

computed per class over feature rows sharing that class label, then combined
into a single score as a frequency-weighted average. Features can come from
the built-in windowed color extractor or be ingested from feature files
produced by external networks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataio import IGNORE_LABEL, FeatureSet, validate_image, validate_mask
from .errors import ValidationError
from .linalg import GaussianStats, region_stats, trace_sqrt_product
from .stylize import box_mean

# Grid step between feature-window centers.
FEATURE_STRIDE = 4

# Most negative raw distance accepted as floating-point noise; anything
# lower means the inputs were not valid covariance matrices.
NEGATIVE_TOL = -1e-6


@dataclass(frozen=True)
class ClassFid:
    """Distance for one class plus the sample counts behind it."""

    distance: float
    count_a: int
    count_b: int


@dataclass
class FidReport:
    """Per-class distances, the classes that could not be scored, and
    (once weighted_fid has run) the weights and weighted average."""

    per_class: dict[int, ClassFid] = field(default_factory=dict)
    skipped: list[int] = field(default_factory=list)
    weights: dict[int, float] = field(default_factory=dict)
    weighted_average: float | None = None


@dataclass(frozen=True)
class FeatureExtractor:
    """A named feature map from (image, mask) to labeled vectors."""

    name: str
    dim: int
    extract: Callable[[np.ndarray, np.ndarray], FeatureSet]


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """Frechet distance between two Gaussians, non-negative.

    Both inputs need at least 2 samples behind them. Tiny negative results
    from floating-point cancellation are clamped to 0; anything below -1e-6
    signals broken covariance inputs and raises.
    """
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.count < 2 or b.count < 2:
        raise ValidationError(
            f"need at least 2 samples on each side, got counts {a.count} and {b.count}"
        )
    mean_term = float(np.sum((a.mean - b.mean) ** 2))
    value = mean_term + float(np.trace(a.cov) + np.trace(b.cov)) - 2.0 * trace_sqrt_product(a.cov, b.cov)
    if value < NEGATIVE_TOL:
        raise ValidationError(f"distance {value:.3g} is negative beyond tolerance; inputs are not PSD")
    return max(value, 0.0)


def per_class_fid(a: FeatureSet, b: FeatureSet, min_samples: int | None = None) -> FidReport:
    """Frechet distance per class label shared by two feature sets.

    A class is scored only if both sides have at least min_samples rows for
    it (default: dim + 2, the smallest count that gives the covariance any
    slack). Every label present in either input but not scored is listed in
    the report's skipped field.
    """
    if a.dim != b.dim:
        raise ValidationError(f"feature dimension mismatch: {a.dim} vs {b.dim}")
    if min_samples is None:
        min_samples = a.dim + 2
    if min_samples < 2:
        raise ValidationError(f"min_samples must be at least 2, got {min_samples}")
    report = FidReport()
    universe = sorted(set(a.labels.tolist()) | set(b.labels.tolist()))
    for label in universe:
        rows_a = a.vectors[a.labels == label].astype(np.float64)
        rows_b = b.vectors[b.labels == label].astype(np.float64)
        if len(rows_a) < min_samples or len(rows_b) < min_samples:
            report.skipped.append(int(label))
            continue
        dist = frechet_distance(region_stats(rows_a), region_stats(rows_b))
        report.per_class[int(label)] = ClassFid(
            distance=dist, count_a=len(rows_a), count_b=len(rows_b)
        )
    return report


def weighted_fid(report: FidReport, class_frequencies: dict[int, float]) -> float:
    """Frequency-weighted average of a report's per-class distances.

    Frequencies are restricted to the scored classes and renormalized to sum
    to 1; classes missing from the frequency map weigh 0. The weights used
    and the resulting average are recorded on the report.
    """
    if not report.per_class:
        raise ValidationError("no comparable classes: report has no scored distances")
    raw = {label: max(float(class_frequencies.get(label, 0.0)), 0.0) for label in report.per_class}
    total = sum(raw.values())
    if total <= 0.0:
        raise ValidationError("all scored classes have zero frequency")
    report.weights = {label: value / total for label, value in raw.items()}
    average = sum(report.weights[label] * report.per_class[label].distance for label in report.per_class)
    report.weighted_average = float(average)
    return report.weighted_average


def class_frequencies(masks: list[np.ndarray]) -> dict[int, float]:
    """Fraction of non-IGNORE pixels carrying each class label, over a corpus."""
    if not masks:
        raise ValidationError("no masks given")
    counts = np.zeros(256, dtype=np.int64)
    for mask in masks:
        validate_mask(mask)
        counts += np.bincount(mask.reshape(-1), minlength=256)
    counts[IGNORE_LABEL] = 0
    total = int(counts.sum())
    if total == 0:
        raise ValidationError("all pixels are IGNORE; no class frequencies exist")
    return {int(label): float(counts[label]) / total for label in np.nonzero(counts)[0]}


def color_feature_extractor(radius: int) -> FeatureExtractor:
    """Windowed color statistics on a coarse pixel grid.

    Sample points sit on a stride-4 grid. Each emits a 6-vector: the
    per-channel mean and per-channel standard deviation of the square window
    of the given radius around it (clipped at image borders), labeled by the
    class of the center pixel. Centers whose class is IGNORE emit nothing.
    """
    if radius < 0:
        raise ValidationError(f"radius must be non-negative, got {radius}")

    def extract(image: np.ndarray, mask: np.ndarray) -> FeatureSet:
        validate_image(image)
        validate_mask(mask, image)
        h, w = mask.shape
        rows = np.arange(0, h, FEATURE_STRIDE)
        cols = np.arange(0, w, FEATURE_STRIDE)
        grid_labels = mask[np.ix_(rows, cols)]
        means = np.empty((len(rows), len(cols), 3), dtype=np.float64)
        stds = np.empty_like(means)
        for c in range(3):
            plane = image[:, :, c].astype(np.float64)
            m = box_mean(plane, radius)
            m2 = box_mean(plane * plane, radius)
            var = np.maximum(m2 - m * m, 0.0)
            means[:, :, c] = m[np.ix_(rows, cols)]
            stds[:, :, c] = np.sqrt(var[np.ix_(rows, cols)])
        keep = grid_labels != IGNORE_LABEL
        vectors = np.concatenate([means[keep], stds[keep]], axis=1).astype(np.float32)
        labels = grid_labels[keep].astype(np.uint16)
        return FeatureSet(labels=labels, vectors=vectors)

    return FeatureExtractor(name=f"color:{radius}", dim=6, extract=extract)


def report_to_csv(report: FidReport) -> str:
    """Render a report as CSV rows plus a trailing WEIGHTED line."""
    lines = ["label,distance,count_a,count_b,weight"]
    for label in sorted(report.per_class):
        entry = report.per_class[label]
        weight = report.weights.get(label, 0.0)
        lines.append(f"{label},{entry.distance!r},{entry.count_a},{entry.count_b},{weight!r}")
    if report.weighted_average is not None:
        lines.append(f"WEIGHTED,{report.weighted_average!r}")
    return "\n".join(lines) + "\n"


def report_to_json(report: FidReport) -> dict:
    """Mirror of the CSV content as a JSON-serializable dict."""
    return {
        "per_class": {
            str(label): {
                "distance": report.per_class[label].distance,
                "count_a": report.per_class[label].count_a,
                "count_b": report.per_class[label].count_b,
                "weight": report.weights.get(label, 0.0),
            }
            for label in sorted(report.per_class)
        },
        "skipped": sorted(report.skipped),
        "weighted_average": report.weighted_average,
    }
