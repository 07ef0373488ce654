"""Mask-guided photorealistic color stylization.

A content image is recolored so that, class by class, its pixel statistics
match those of a style image: pixels of class L in the content are whitened
with the content region's color covariance and recolored with the style
region's covariance and mean. Classes the style image does not contain are
left untouched, as are IGNORE pixels. A guided filter keyed on the original
content image then removes blocky artifacts at region boundaries while
following real edges.

All of this happens directly in RGB space on [0, 1] floats. With whole-image
(all-ones) masks the per-class transfer degenerates to a global color
transfer, which is how unlabeled style images are used.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataio import IGNORE_LABEL, LabeledPair, validate_image
from .errors import ValidationError
from .linalg import psd_power, region_stats

# Ridge added to region covariances before matrix powers.
COV_RIDGE = 1e-5

# Floor for the content scale in the small-region fallback.
SIGMA_FLOOR = 1e-4


@dataclass(frozen=True)
class StylizeConfig:
    """Knobs for stylization and dataset expansion.

    num_styles is the number of style images drawn per content image when
    expanding a dataset. Regions smaller than min_region_px (on either side)
    use a mean-and-scale fallback instead of a full covariance transform,
    which would be ill-conditioned there.
    """

    num_styles: int = 10
    smoothing_enabled: bool = True
    smoothing_radius: int = 4
    smoothing_eps: float = 1e-2
    min_region_px: int = 16
    seed: int = 0


@dataclass(frozen=True)
class StylizedRecord:
    """One stylized output: which content and style produced it, plus the
    content's mask carried through unchanged."""

    content_index: int
    style_index: int
    image: np.ndarray
    mask: np.ndarray


def all_ones_mask(image: np.ndarray) -> np.ndarray:
    """A mask assigning every pixel to class 1, matching the image's size."""
    validate_image(image)
    return np.ones(image.shape[:2], dtype=np.uint8)


def _labels_present(mask: np.ndarray) -> np.ndarray:
    labels = np.unique(mask)
    return labels[labels != IGNORE_LABEL]


def _scalar_sigma(pixels: np.ndarray) -> float:
    """Root mean per-channel population variance of a pixel set."""
    return float(np.sqrt(np.mean(np.var(pixels, axis=0))))


def _transfer_region(content_px: np.ndarray, style_px: np.ndarray, min_region_px: int) -> np.ndarray:
    """Map one content region's pixels onto the style region's statistics."""
    mu_c = content_px.mean(axis=0)
    mu_s = style_px.mean(axis=0)
    if len(content_px) < min_region_px or len(style_px) < min_region_px:
        sigma_c = max(_scalar_sigma(content_px), SIGMA_FLOOR)
        sigma_s = _scalar_sigma(style_px)
        return (sigma_s / sigma_c) * (content_px - mu_c) + mu_s
    cov_c = region_stats(content_px).cov + COV_RIDGE * np.eye(3)
    cov_s = region_stats(style_px).cov + COV_RIDGE * np.eye(3)
    transform = psd_power(cov_s, 0.5) @ psd_power(cov_c, -0.5)
    return (content_px - mu_c) @ transform.T + mu_s


def stylize_pair(content: LabeledPair, style: LabeledPair, cfg: StylizeConfig) -> np.ndarray:
    """Recolor a content image toward a style image, class by class.

    Both pairs must carry masks; callers with unlabeled images substitute
    all_ones_mask. Content classes absent from the style mask are copied
    through unchanged, as are IGNORE pixels. The result is clamped to [0, 1]
    and, when enabled, smoothed by a guided filter whose guide is the
    original content image.
    """
    if content.mask is None or style.mask is None:
        raise ValidationError("stylize_pair requires masks on both pairs (use all_ones_mask)")
    out = np.array(content.image, dtype=np.float64, copy=True)
    style_labels = set(_labels_present(style.mask).tolist())
    for label in _labels_present(content.mask):
        if int(label) not in style_labels:
            continue
        region = content.mask == label
        content_px = content.image[region]
        style_px = style.image[style.mask == label]
        out[region] = _transfer_region(content_px, style_px, cfg.min_region_px)
    np.clip(out, 0.0, 1.0, out=out)
    if cfg.smoothing_enabled:
        out = smooth(out, content.image, cfg.smoothing_radius, cfg.smoothing_eps)
    return out


def box_mean(plane: np.ndarray, radius: int) -> np.ndarray:
    """Mean over square windows clipped at the borders, via an integral image."""
    h, w = plane.shape
    integral = np.zeros((h + 1, w + 1), dtype=np.float64)
    integral[1:, 1:] = plane.cumsum(axis=0).cumsum(axis=1)
    rows = np.arange(h)
    cols = np.arange(w)
    lo_i = np.maximum(rows - radius, 0)
    hi_i = np.minimum(rows + radius, h - 1) + 1
    lo_j = np.maximum(cols - radius, 0)
    hi_j = np.minimum(cols + radius, w - 1) + 1
    sums = (
        integral[hi_i[:, None], hi_j[None, :]]
        - integral[lo_i[:, None], hi_j[None, :]]
        - integral[hi_i[:, None], lo_j[None, :]]
        + integral[lo_i[:, None], lo_j[None, :]]
    )
    counts = (hi_i - lo_i)[:, None] * (hi_j - lo_j)[None, :]
    return sums / counts


def smooth(stylized: np.ndarray, guide: np.ndarray, radius: int, eps: float) -> np.ndarray:
    """Edge-preserving guided filter, applied channel by channel.

    In each window the stylized channel is modeled as an affine function of
    the matching guide channel, a = cov(guide, stylized) / (var(guide) + eps)
    and b = mean(stylized) - a * mean(guide); the per-pixel coefficients are
    the averages of a and b over every window covering the pixel. Windows are
    clipped at the image borders. Output is clamped to [0, 1].
    """
    validate_image(guide, "guide")
    if stylized.shape != guide.shape:
        raise ValidationError(f"stylized shape {stylized.shape} does not match guide {guide.shape}")
    h, w = guide.shape[:2]
    if radius < 0:
        raise ValidationError(f"radius must be non-negative, got {radius}")
    if radius >= min(h, w):
        raise ValidationError(f"radius {radius} too large for a {h}x{w} image")
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    out = np.empty_like(stylized, dtype=np.float64)
    for c in range(3):
        i_plane = guide[:, :, c].astype(np.float64)
        p_plane = stylized[:, :, c].astype(np.float64)
        mean_i = box_mean(i_plane, radius)
        mean_p = box_mean(p_plane, radius)
        cov_ip = box_mean(i_plane * p_plane, radius) - mean_i * mean_p
        var_i = box_mean(i_plane * i_plane, radius) - mean_i * mean_i
        a = cov_ip / (var_i + eps)
        b = mean_p - a * mean_i
        out[:, :, c] = box_mean(a, radius) * i_plane + box_mean(b, radius)
    return np.clip(out, 0.0, 1.0)


def stylize_dataset(
    contents: list[LabeledPair],
    styles: list[LabeledPair],
    cfg: StylizeConfig,
    jobs: int = 1,
) -> list[StylizedRecord]:
    """Expand a labeled dataset by stylizing every content image N ways.

    For each content image, num_styles style images are drawn by a PRNG
    seeded with cfg.seed: uniformly without replacement when enough styles
    exist, with replacement otherwise. Every output record keeps its content
    mask bit for bit. All random draws happen up front on one thread, so the
    result is identical for any jobs value; output is ordered by content
    index, then by draw order.
    """
    if not contents:
        raise ValidationError("contents dataset is empty")
    if not styles:
        raise ValidationError("styles dataset is empty")
    if cfg.num_styles < 1:
        raise ValidationError(f"num_styles must be at least 1, got {cfg.num_styles}")
    rng = np.random.default_rng(cfg.seed)
    replace = len(styles) < cfg.num_styles
    draws: list[tuple[int, int]] = []
    for i in range(len(contents)):
        picks = rng.choice(len(styles), size=cfg.num_styles, replace=replace)
        draws.extend((i, int(j)) for j in picks)

    def _one(task: tuple[int, int]) -> StylizedRecord:
        i, j = task
        image = stylize_pair(contents[i], styles[j], cfg)
        return StylizedRecord(content_index=i, style_index=j, image=image, mask=contents[i].mask)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_one, draws))
    return [_one(t) for t in draws]
