"""Per-class color randomization in HSV space.

A cheap label-preserving augmentation baseline: every class region gets its
hue rotated by a class-specific random angle while saturation and value stay
put, so object identity (shape, texture, lightness) survives but color is
scrambled. Hue is an angle in [0, 360), so shifts wrap around the circle.
"""

from __future__ import annotations

import numpy as np

from .dataio import IGNORE_LABEL, LabeledPair
from .errors import ValidationError


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Convert RGB values in [0, 1] to HSV with hue in degrees [0, 360).

    Works on any (..., 3) array. Achromatic pixels (max == min) get hue 0,
    and saturation is 0 wherever value is 0.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    chromatic = delta > 0
    safe_delta = np.where(chromatic, delta, 1.0)
    hue_r = np.mod((g - b) / safe_delta, 6.0)
    hue_g = (b - r) / safe_delta + 2.0
    hue_b = (r - g) / safe_delta + 4.0
    h = 60.0 * np.select(
        [~chromatic, maxc == r, maxc == g],
        [np.zeros_like(maxc), hue_r, hue_g],
        default=hue_b,
    )
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    return np.stack([np.mod(h, 360.0), s, maxc], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Inverse of rgb_to_hsv; round trips agree to within 1e-6 per channel."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    sector = np.mod(h, 360.0) / 60.0
    idx = np.floor(sector).astype(np.int64) % 6
    frac = sector - np.floor(sector)
    p = v * (1.0 - s)
    q = v * (1.0 - s * frac)
    t = v * (1.0 - s * (1.0 - frac))
    r = np.choose(idx, [v, q, p, p, t, v])
    g = np.choose(idx, [t, v, v, q, p, p])
    b = np.choose(idx, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def hue_randomize(
    pair: LabeledPair,
    seed: int,
    shifts: dict[int, float] | None = None,
) -> np.ndarray:
    """Rotate each class region's hue by a random angle; keep S and V.

    The shift for class L is drawn uniformly from [0, 360) by a PRNG keyed
    on (seed, L), so a class sees the same shift in every image processed
    with the same seed. ``shifts`` overrides the draw for the listed classes
    (a test hook; {label: degrees}). IGNORE pixels are copied through
    bit for bit.
    """
    if pair.mask is None:
        raise ValidationError("hue_randomize requires a mask")
    hsv = rgb_to_hsv(pair.image)
    labels = np.unique(pair.mask)
    for label in labels[labels != IGNORE_LABEL]:
        key = int(label)
        if shifts is not None and key in shifts:
            delta = float(shifts[key])
        else:
            delta = float(np.random.default_rng([seed, key]).uniform(0.0, 360.0))
        region = pair.mask == label
        hsv[region, 0] = np.mod(hsv[region, 0] + delta, 360.0)
    out = np.clip(hsv_to_rgb(hsv), 0.0, 1.0)
    ignore = pair.mask == IGNORE_LABEL
    out[ignore] = pair.image[ignore]
    return out
