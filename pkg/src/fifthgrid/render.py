"""Grayscale raster output: PPM always, PNG through Pillow when it is installed."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .dsp import HeatSequence
from .lattice import Interpretation


def to_gray(values: np.ndarray, invert: bool = True) -> np.ndarray:
    """Scale to 0..255 by the array max; by default larger values are darker."""
    v = np.asarray(values, dtype=float)
    peak = v.max() if v.size else 0.0
    norm = v / peak if peak > 0 else np.zeros_like(v)
    if invert:
        norm = 1.0 - norm
    return np.round(255 * norm).astype(np.uint8)


def upscale(img: np.ndarray, factor: int) -> np.ndarray:
    if factor < 1:
        raise ValueError("scale factor must be at least 1")
    return np.kron(img, np.ones((factor, factor), dtype=img.dtype)) if factor > 1 else img


def write_ppm(path: str | Path, img: np.ndarray) -> None:
    """Binary PGM for 2D arrays, PPM for H x W x 3."""
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim == 2:
        magic = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"cannot write image of shape {img.shape}")
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + f"\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    magic, w, h, maxval, raster = parts[0], int(parts[1]), int(parts[2]), int(parts[3]), parts[4]
    if maxval != 255 or magic not in (b"P5", b"P6"):
        raise ValueError(f"{path}: unsupported PNM variant")
    shape = (h, w) if magic == b"P5" else (h, w, 3)
    return np.frombuffer(raster[: int(np.prod(shape))], dtype=np.uint8).reshape(shape)


def save_image(path: str | Path, img: np.ndarray) -> None:
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pgm", ".pnm"):
        write_ppm(path, img)
        return
    if path.suffix.lower() == ".png":
        try:
            from PIL import Image
        except ImportError as exc:
            raise RuntimeError("PNG output needs Pillow; write .ppm instead") from exc
        Image.fromarray(np.asarray(img, dtype=np.uint8)).save(path)
        return
    raise ValueError(f"unsupported image extension {path.suffix!r}; use .ppm or .png")


def heatmap_image(grid: Interpretation | np.ndarray, scale: int = 16) -> np.ndarray:
    """Chroma (fifths order) across, octave up the page."""
    g = grid.grid if isinstance(grid, Interpretation) else np.asarray(grid)
    return upscale(to_gray(g.T[::-1].astype(float)), scale)


def pianoroll_image(seq: HeatSequence, scale: int = 4) -> np.ndarray:
    """Chromatic bins up the page, frames across."""
    return upscale(to_gray(seq.matrix()[::-1]), scale)
