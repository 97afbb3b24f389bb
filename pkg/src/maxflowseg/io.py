"""Grayscale image input and binary mask output.

Reads 8-bit PGM (plain ``P2`` and raw ``P5``) and 8-bit grayscale or RGB
PNG. Masks are written as 8-bit grayscale PNG with values 0 and 255.
"""

import os
import re

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptFile, IoFailure, UnsupportedFormat

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
LUMA = np.array([0.2126, 0.7152, 0.0722])

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _pgm_header(data):
    """Parse magic, width, height, maxval; returns them plus the raster offset."""
    values = []
    pos = 0
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise CorruptFile("truncated PGM header", offset=pos)
        values.append((m.group(1), m.start(1)))
        pos = m.end(1)
    magic = values[0][0]
    try:
        width, height, maxval = (int(v) for v, _ in values[1:])
    except ValueError:
        bad = next(off for v, off in values[1:] if not v.isdigit())
        raise CorruptFile("non-numeric PGM header field", offset=bad) from None
    if width < 1 or height < 1:
        raise CorruptFile(f"invalid PGM dimensions {width}x{height}", offset=values[1][1])
    if not 0 < maxval < 65536:
        raise CorruptFile(f"invalid PGM maxval {maxval}", offset=values[3][1])
    if maxval > 255:
        raise UnsupportedFormat(f"16-bit PGM (maxval {maxval}) is not supported")
    return magic, width, height, maxval, pos


def read_pgm(data):
    magic, width, height, maxval, pos = _pgm_header(data)
    n = width * height
    if magic == b"P5":
        start = pos + 1  # exactly one whitespace byte ends the header
        raster = data[start:start + n]
        if len(raster) < n:
            raise CorruptFile(f"P5 raster needs {n} bytes, found {len(raster)}", offset=start)
        pixels = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    else:
        tokens = data[pos:].split()
        if len(tokens) < n:
            raise CorruptFile(f"P2 raster needs {n} samples, found {len(tokens)}", offset=pos)
        try:
            pixels = np.array([int(t) for t in tokens[:n]], dtype=np.float64)
        except ValueError:
            raise CorruptFile("non-numeric P2 sample", offset=pos) from None
    if pixels.max(initial=0) > maxval:
        raise CorruptFile(f"sample exceeds maxval {maxval}")
    return (pixels / maxval).reshape(height, width)


def read_png(path):
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.asarray(im)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise CorruptFile(f"cannot decode PNG {path}: {exc}") from exc
    if mode == "L":
        return arr.astype(np.float64) / 255.0
    if mode == "RGB":
        return arr.astype(np.float64) @ LUMA / 255.0
    raise UnsupportedFormat(f"PNG mode {mode!r} not supported (need 8-bit L or RGB)")


def load_image(path):
    """Load a grayscale image scaled to [0, 1]."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if data.startswith(PNG_MAGIC):
        return read_png(path)
    if data[:2] in (b"P2", b"P5"):
        return read_pgm(data)
    if data[:2] in (b"P1", b"P3", b"P4", b"P6"):
        raise UnsupportedFormat(f"{path}: only grayscale PGM (P2/P5) is supported")
    raise UnsupportedFormat(f"{path}: unrecognised image format")


def _to_uint8(values):
    return np.clip(np.rint(np.asarray(values, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def save_mask(mask, path):
    """Write a binary mask as an 8-bit PNG (0 -> 0, 1 -> 255)."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    if not np.isin(mask, (0, 1)).all():
        raise ValueError("mask values must be 0 or 1")
    _write_png(np.where(mask.astype(bool), 255, 0).astype(np.uint8), path)


def save_image(image, path):
    """Write an intensity field in [0, 1] as an 8-bit grayscale PNG."""
    _write_png(_to_uint8(image), path)


def load_mask(path):
    """Load a mask written by :func:`save_mask` (any pixel >= 0.5 counts as 1)."""
    return (load_image(path) >= 0.5).astype(np.uint8)


def _write_png(arr, path):
    try:
        parent = os.path.dirname(os.fspath(path))
        if parent:
            os.makedirs(parent, exist_ok=True)
        Image.fromarray(arr).save(path, format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
