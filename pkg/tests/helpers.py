"""Shared test utilities.

PNG fixtures are written with PIL or by hand (raw zlib chunks), never with
the library's own codec, so encode/decode bugs cannot cancel out.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np
from PIL import Image as PILImage


def write_rgb_png(path: Path, arr: np.ndarray) -> None:
    assert arr.dtype == np.uint8 and arr.ndim == 3 and arr.shape[2] == 3
    PILImage.fromarray(arr, "RGB").save(path)


def write_rgba_png(path: Path, arr: np.ndarray) -> None:
    assert arr.dtype == np.uint8 and arr.ndim == 3 and arr.shape[2] == 4
    PILImage.fromarray(arr, "RGBA").save(path)


def write_gray_png(path: Path, arr: np.ndarray) -> None:
    assert arr.dtype == np.uint8 and arr.ndim == 2
    PILImage.fromarray(arr, "L").save(path)


def read_rgb_png(path: Path) -> np.ndarray:
    return np.asarray(PILImage.open(path).convert("RGB"))


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def write_rgb16_png(path: Path, arr: np.ndarray) -> None:
    """Hand-rolled 16-bit RGB PNG writer (big-endian samples, filter 0)."""
    assert arr.dtype == np.uint16 and arr.ndim == 3 and arr.shape[2] == 3
    h, w = arr.shape[:2]
    ihdr = struct.pack(">IIBBBBB", w, h, 16, 2, 0, 0, 0)
    raw = b""
    be = arr.astype(">u2")
    for row in range(h):
        raw += b"\x00" + be[row].tobytes()
    data = (
        b"\x89PNG\r\n\x1a\n"
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(raw))
        + _chunk(b"IEND", b"")
    )
    Path(path).write_bytes(data)


def rand_image(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=(h, w, 3))


def rand_interior_image(rng: np.random.Generator, h: int, w: int, lo=0.2, hi=0.8) -> np.ndarray:
    return rng.uniform(lo, hi, size=(h, w, 3))


def write_manifest_lines(path: Path, rows: list[dict]) -> None:
    import json

    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")


def random_psd(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """A random strictly PSD matrix (Wishart-style, well conditioned enough)."""
    a = rng.normal(size=(dim, dim + 2)) * scale
    m = a @ a.T / (dim + 2)
    return (m + m.T) / 2.0


def tree_digest(root: Path, exclude: set[str] | None = None) -> dict[str, str]:
    """Relative path -> sha256 of every file under root."""
    import hashlib

    exclude = exclude or set()
    out = {}
    for p in sorted(Path(root).rglob("*")):
        if p.is_file():
            rel = p.relative_to(root).as_posix()
            if rel in exclude:
                continue
            out[rel] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out
