"""Paired test corpus: 3-class scenes in two color domains.

The "real" domain draws each class's pixels from its own Gaussian color
distribution. The "synthetic" domain shows the same scenes pushed through a
single global affine color distortion, so per-class color transfer has
something meaningful to undo. Scene geometry is three horizontal bands with
randomized cut rows, which makes class proportions vary image to image and
keeps whole-image statistics from being a sufficient description.

Everything is written as PNGs and read back, so in-memory arrays carry
exactly the 8-bit values that any manifest-driven code path will see.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from synstyle.dataio import (
    LabeledPair,
    load_manifest,
    load_pairs,
    save_image,
    save_mask,
    write_manifest,
)

SIZE = 48
NUM_CLASSES = 3

# per-class mean colors of the real domain; classes 1 and 2 sit close
# together so centroid placement actually decides pixels between them
REAL_PALETTE = np.array(
    [
        [0.25, 0.35, 0.65],
        [0.55, 0.48, 0.32],
        [0.46, 0.58, 0.30],
    ]
)

# global color distortion defining the synthetic domain
AFFINE_M = np.array(
    [
        [0.75, 0.15, 0.10],
        [0.10, 0.70, 0.15],
        [0.15, 0.10, 0.65],
    ]
)
AFFINE_B = np.array([0.12, 0.08, 0.15])

PIXEL_SIGMA = 0.04  # per-pixel color noise
JITTER_SIGMA = 0.02  # per-image, per-class mean wobble


def scene_mask(rng: np.random.Generator, h: int = SIZE, w: int = SIZE) -> np.ndarray:
    cut1 = int(rng.integers(h * 3 // 24, h * 13 // 24))
    cut2 = int(rng.integers(h * 14 // 24, h * 22 // 24))
    mask = np.full((h, w), 2, np.uint8)
    mask[:cut1] = 0
    mask[cut1:cut2] = 1
    return mask


def real_image(rng: np.random.Generator, mask: np.ndarray) -> np.ndarray:
    image = np.zeros(mask.shape + (3,))
    for label in range(NUM_CLASSES):
        sel = mask == label
        center = REAL_PALETTE[label] + rng.normal(0.0, JITTER_SIGMA, 3)
        image[sel] = rng.normal(center, PIXEL_SIGMA, size=(int(sel.sum()), 3))
    return np.clip(image, 0.0, 1.0)


def synthetic_from_real(real: np.ndarray) -> np.ndarray:
    return np.clip(real @ AFFINE_M.T + AFFINE_B, 0.0, 1.0)


def build_scene_pairs(
    seed: int, count: int, h: int = SIZE, w: int = SIZE
) -> tuple[list[LabeledPair], list[LabeledPair]]:
    """count scenes rendered in both domains: (synthetic pairs, real pairs)."""
    rng = np.random.default_rng(seed)
    synth, real = [], []
    for _ in range(count):
        mask = scene_mask(rng, h, w)
        r = real_image(rng, mask)
        real.append(LabeledPair(image=r, mask=mask))
        synth.append(LabeledPair(image=synthetic_from_real(r), mask=mask))
    return synth, real


def build_real_pairs(seed: int, count: int, h: int = SIZE, w: int = SIZE) -> list[LabeledPair]:
    """count fresh real-domain scenes (for held-out evaluation)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        mask = scene_mask(rng, h, w)
        out.append(LabeledPair(image=real_image(rng, mask), mask=mask))
    return out


@dataclass(frozen=True)
class Corpus:
    """On-disk corpus plus the same data read back into memory."""

    synth_manifest: Path  # images + masks
    real_train_manifest: Path  # images only
    real_labeled_manifest: Path  # the same real images, with masks
    eval_manifest: Path  # held-out real images + masks
    synth: list[LabeledPair]
    real: list[LabeledPair]
    eval_pairs: list[LabeledPair]


def _write_split(root: Path, name: str, pairs: list[LabeledPair], with_masks: bool) -> Path:
    (root / name / "images").mkdir(parents=True, exist_ok=True)
    if with_masks:
        (root / name / "masks").mkdir(parents=True, exist_ok=True)
    rows = []
    for i, pair in enumerate(pairs):
        image_rel = f"{name}/images/{i:05d}.png"
        save_image(pair.image, root / image_rel)
        mask_rel = None
        if with_masks:
            mask_rel = f"{name}/masks/{i:05d}.png"
            save_mask(pair.mask, root / mask_rel)
        rows.append((image_rel, mask_rel))
    manifest = root / f"{name}.jsonl"
    write_manifest(manifest, rows)
    return manifest


def _reload(manifest: Path, with_masks: bool) -> list[LabeledPair]:
    pairs = load_pairs(load_manifest(manifest), require_masks=with_masks)
    return list(pairs)


def build_corpus(
    root: Path, seed: int = 0, train_scenes: int = 20, eval_scenes: int = 8
) -> Corpus:
    root = Path(root)
    synth, real = build_scene_pairs(seed, train_scenes)
    eval_pairs = build_real_pairs(seed + 1_000_003, eval_scenes)
    synth_manifest = _write_split(root, "synth", synth, with_masks=True)
    real_labeled = _write_split(root, "real_labeled", real, with_masks=True)
    eval_manifest = _write_split(root, "eval", eval_pairs, with_masks=True)
    # the unlabeled training view points at the same real images, no mask key
    rows = [(f"real_labeled/images/{i:05d}.png", None) for i in range(len(real))]
    real_train = root / "real_train.jsonl"
    write_manifest(real_train, rows)
    return Corpus(
        synth_manifest=synth_manifest,
        real_train_manifest=real_train,
        real_labeled_manifest=real_labeled,
        eval_manifest=eval_manifest,
        synth=_reload(synth_manifest, True),
        real=_reload(real_labeled, True),
        eval_pairs=_reload(eval_manifest, True),
    )
