"""Dataset I/O: PNG images and label masks, JSONL manifests, feature files.

Conventions used throughout the package:

* Images are float arrays of shape (H, W, 3) with values in [0, 1], RGB
  channel order. On disk they are 8-bit or 16-bit RGB(A) PNGs; alpha is
  dropped on load and 8-bit RGB is written on save.
* Label masks are uint8 arrays of shape (H, W). The pixel value is the class
  id; the value 255 is reserved as IGNORE and is excluded from statistics,
  training and scoring everywhere.
* A dataset manifest is a JSON Lines file, one record per line:
  ``{"image": "relative/or/absolute.png", "mask": "path.png" | null}``.
  Relative paths resolve against the manifest's own directory.
* Feature files hold rows of (class label, float32 vector) in a little-endian
  binary layout: magic ``DSFT``, u32 version = 1, u32 row count, u32 vector
  dimension, then per row a u16 label followed by dim float32 values.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .errors import (
    EmptyManifestError,
    FeatureFormatError,
    ImageFormatError,
    ManifestError,
    ValidationError,
)

IGNORE_LABEL = 255

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_FEATURE_MAGIC = b"DSFT"
_FEATURE_VERSION = 1

_COLOR_TYPE_NAMES = {
    0: "grayscale",
    2: "RGB",
    3: "palette",
    4: "grayscale+alpha",
    6: "RGBA",
}


def _read_png_header(path: Path) -> tuple[int, int, int, int]:
    """Return (width, height, bit_depth, color_type) from a PNG's IHDR chunk."""
    with open(path, "rb") as fh:
        head = fh.read(33)
    if len(head) < 33 or head[:8] != _PNG_SIGNATURE:
        raise ImageFormatError(f"{path}: not a PNG file")
    length, tag = struct.unpack(">I4s", head[8:16])
    if tag != b"IHDR" or length != 13:
        raise ImageFormatError(f"{path}: malformed PNG header")
    width, height = struct.unpack(">II", head[16:24])
    bit_depth, color_type = head[24], head[25]
    return width, height, bit_depth, color_type


def load_image(path: str | Path) -> np.ndarray:
    """Load an 8-bit or 16-bit RGB(A) PNG as a float (H, W, 3) array in [0, 1].

    Alpha channels are dropped. Grayscale and palette PNGs are rejected:
    images and label masks use deliberately distinct on-disk flavors so the
    two cannot be confused.
    """
    path = Path(path)
    width, height, bit_depth, color_type = _read_png_header(path)
    if width == 0 or height == 0:
        raise ImageFormatError(f"{path}: zero-dimension image ({width}x{height})")
    if color_type not in (2, 6):
        name = _COLOR_TYPE_NAMES.get(color_type, f"type {color_type}")
        raise ImageFormatError(f"{path}: unsupported color type ({name}); expected RGB or RGBA")
    if bit_depth not in (8, 16):
        raise ImageFormatError(f"{path}: unsupported bit depth {bit_depth}; expected 8 or 16")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageFormatError(f"{path}: PNG could not be decoded")
    if raw.ndim != 3 or raw.shape[2] not in (3, 4):
        raise ImageFormatError(f"{path}: expected 3 or 4 channels, got shape {raw.shape}")
    rgb = raw[:, :, 2::-1]  # BGR(A) -> RGB, alpha dropped
    scale = 65535.0 if raw.dtype == np.uint16 else 255.0
    return rgb.astype(np.float64) / scale


def load_mask(path: str | Path) -> np.ndarray:
    """Load an 8-bit grayscale PNG as a uint8 (H, W) label mask."""
    path = Path(path)
    width, height, bit_depth, color_type = _read_png_header(path)
    if width == 0 or height == 0:
        raise ImageFormatError(f"{path}: zero-dimension mask ({width}x{height})")
    if color_type != 0:
        name = _COLOR_TYPE_NAMES.get(color_type, f"type {color_type}")
        raise ImageFormatError(f"{path}: multi-channel input ({name}); masks are single-channel grayscale")
    if bit_depth != 8:
        raise ImageFormatError(f"{path}: unsupported mask bit depth {bit_depth}; expected 8")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageFormatError(f"{path}: PNG could not be decoded")
    if raw.ndim != 2:
        raise ImageFormatError(f"{path}: expected a single channel, got shape {raw.shape}")
    return raw.astype(np.uint8)


def save_image(image: np.ndarray, path: str | Path) -> None:
    """Write an image as an 8-bit RGB PNG.

    Values are quantized as round(v * 255) with halves rounding up, so a
    round trip through disk moves any channel by at most 1/510.
    """
    validate_image(image)
    path = Path(path)
    bytes_ = np.floor(np.asarray(image, dtype=np.float64) * 255.0 + 0.5).astype(np.uint8)
    bgr = np.ascontiguousarray(bytes_[:, :, ::-1])
    if not cv2.imwrite(str(path), bgr):
        raise OSError(f"could not write image to {path}")


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    """Write a label mask as an 8-bit grayscale PNG."""
    validate_mask(mask)
    path = Path(path)
    if not cv2.imwrite(str(path), np.ascontiguousarray(mask)):
        raise OSError(f"could not write mask to {path}")


def validate_image(image: np.ndarray, name: str = "image") -> np.ndarray:
    """Check the in-memory image contract; returns the array unchanged."""
    if not isinstance(image, np.ndarray):
        raise ValidationError(f"{name}: expected a numpy array, got {type(image).__name__}")
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValidationError(f"{name}: expected shape (H, W, 3), got {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ValidationError(f"{name}: empty image {image.shape}")
    if not np.issubdtype(image.dtype, np.floating):
        raise ValidationError(f"{name}: expected float dtype, got {image.dtype}")
    if not np.all(np.isfinite(image)):
        raise ValidationError(f"{name}: contains non-finite values")
    lo, hi = float(image.min()), float(image.max())
    if lo < 0.0 or hi > 1.0:
        raise ValidationError(f"{name}: values outside [0, 1] (min {lo:.6g}, max {hi:.6g})")
    return image


def validate_mask(mask: np.ndarray, image: np.ndarray | None = None, name: str = "mask") -> np.ndarray:
    """Check the label-mask contract, optionally against a companion image."""
    if not isinstance(mask, np.ndarray):
        raise ValidationError(f"{name}: expected a numpy array, got {type(mask).__name__}")
    if mask.dtype != np.uint8:
        raise ValidationError(f"{name}: expected uint8, got {mask.dtype}")
    if mask.ndim != 2:
        raise ValidationError(f"{name}: expected shape (H, W), got {mask.shape}")
    if image is not None and mask.shape != image.shape[:2]:
        raise ValidationError(
            f"{name}: shape {mask.shape} does not match image shape {image.shape[:2]}"
        )
    return mask


def _frozen_view(arr: np.ndarray) -> np.ndarray:
    view = arr.view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True)
class LabeledPair:
    """An image with an optional label mask of matching height and width."""

    image: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        validate_image(self.image)
        object.__setattr__(self, "image", _frozen_view(self.image))
        if self.mask is not None:
            validate_mask(self.mask, self.image)
            object.__setattr__(self, "mask", _frozen_view(self.mask))


@dataclass(frozen=True)
class ManifestRecord:
    """Resolved absolute paths for one dataset record."""

    image: Path
    mask: Path | None


@dataclass(frozen=True)
class DatasetManifest:
    """An ordered list of records plus the directory they resolve against."""

    root: Path
    records: tuple[ManifestRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse a JSONL manifest and resolve every referenced path.

    Record order is preserved. Blank lines are ignored. Any malformed line is
    reported with its 1-based line number; referenced files must exist at
    load time. A manifest with zero records raises EmptyManifestError.
    """
    path = Path(path)
    root = path.parent
    records: list[ManifestRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ManifestError(f"{path}: line {lineno}: expected a JSON object")
            image_rel = obj.get("image")
            if not isinstance(image_rel, str) or not image_rel:
                raise ManifestError(f"{path}: line {lineno}: missing or invalid 'image' field")
            mask_rel = obj.get("mask")
            if mask_rel is not None and not isinstance(mask_rel, str):
                raise ManifestError(f"{path}: line {lineno}: 'mask' must be a path or null")
            image_path = root / image_rel
            if not image_path.is_file():
                raise ManifestError(f"{path}: line {lineno}: image file not found: {image_path}")
            mask_path: Path | None = None
            if mask_rel is not None:
                mask_path = root / mask_rel
                if not mask_path.is_file():
                    raise ManifestError(f"{path}: line {lineno}: mask file not found: {mask_path}")
            records.append(ManifestRecord(image=image_path, mask=mask_path))
    if not records:
        raise EmptyManifestError(f"{path}: manifest contains no records")
    return DatasetManifest(root=root, records=tuple(records))


def write_manifest(path: str | Path, records: list[tuple[str, str | None]]) -> None:
    """Write a JSONL manifest of (image, mask) paths relative to its directory."""
    path = Path(path)
    lines = []
    for image_rel, mask_rel in records:
        lines.append(json.dumps({"image": image_rel, "mask": mask_rel}))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_pairs(
    manifest: DatasetManifest,
    *,
    require_masks: bool = False,
    load_masks: bool = True,
) -> list[LabeledPair]:
    """Load every record of a manifest into memory.

    With ``load_masks=False`` mask files are never opened, whatever the
    manifest lists. With ``require_masks=True`` a record without a mask path
    is a validation error.
    """
    pairs: list[LabeledPair] = []
    for i, rec in enumerate(manifest.records):
        mask = None
        if load_masks and rec.mask is not None:
            mask = load_mask(rec.mask)
        if require_masks and mask is None:
            raise ValidationError(f"record {i} ({rec.image}): mask required but not provided")
        pairs.append(LabeledPair(image=load_image(rec.image), mask=mask))
    return pairs


@dataclass(frozen=True)
class FeatureSet:
    """Labeled feature vectors: (n,) uint16 labels and (n, dim) float32 rows."""

    labels: np.ndarray
    vectors: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.uint16)
        vectors = np.asarray(self.vectors, dtype=np.float32)
        if labels.ndim != 1:
            raise ValidationError(f"labels: expected shape (n,), got {labels.shape}")
        if vectors.ndim != 2:
            raise ValidationError(f"vectors: expected shape (n, dim), got {vectors.shape}")
        if vectors.shape[0] != labels.shape[0]:
            raise ValidationError(
                f"row count mismatch: {labels.shape[0]} labels vs {vectors.shape[0]} vectors"
            )
        if vectors.shape[1] < 1:
            raise ValidationError("vectors: dimension must be positive")
        if labels.size and int(labels.max()) > 254:
            raise ValidationError("labels must lie in [0, 254]; 255 is reserved")
        object.__setattr__(self, "labels", _frozen_view(labels))
        object.__setattr__(self, "vectors", _frozen_view(vectors))

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return int(self.labels.shape[0])


def _row_dtype(dim: int) -> np.dtype:
    return np.dtype([("label", "<u2"), ("vec", "<f4", (dim,))])


def write_features(features: FeatureSet, path: str | Path) -> None:
    """Serialize a FeatureSet to the binary feature-file layout."""
    path = Path(path)
    n, dim = len(features), features.dim
    rows = np.empty(n, dtype=_row_dtype(dim))
    rows["label"] = features.labels
    rows["vec"] = features.vectors
    header = _FEATURE_MAGIC + struct.pack("<III", _FEATURE_VERSION, n, dim)
    path.write_bytes(header + rows.tobytes())


def read_features(path: str | Path) -> FeatureSet:
    """Read a binary feature file back into a FeatureSet."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 16:
        raise FeatureFormatError(f"{path}: truncated file (no header)")
    if data[:4] != _FEATURE_MAGIC:
        raise FeatureFormatError(f"{path}: bad magic {data[:4]!r}")
    version, n, dim = struct.unpack("<III", data[4:16])
    if version != _FEATURE_VERSION:
        raise FeatureFormatError(f"{path}: unsupported version {version}")
    if dim == 0:
        raise FeatureFormatError(f"{path}: vector dimension is zero")
    expected = 16 + n * (2 + 4 * dim)
    if len(data) != expected:
        raise FeatureFormatError(
            f"{path}: truncated or oversized body ({len(data)} bytes, expected {expected})"
        )
    rows = np.frombuffer(data, dtype=_row_dtype(dim), count=n, offset=16)
    labels = rows["label"].copy()
    vectors = rows["vec"].copy().reshape(n, dim)
    if labels.size and int(labels.max()) > 254:
        raise FeatureFormatError(f"{path}: label {int(labels.max())} outside [0, 254]")
    return FeatureSet(labels=labels, vectors=vectors)
