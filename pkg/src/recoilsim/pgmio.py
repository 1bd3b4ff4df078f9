"""Binary PGM (P5) reading and writing.

Output is always 16-bit big-endian with maxval 65535, per the interchange
format used by the rest of the toolchain; input accepts 8-bit or 16-bit
raw PGM.  A small text sidecar carries physical metadata (pixel pitch,
axis labels) that PGM itself cannot.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

_HEADER = re.compile(
    rb"^P5\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s")


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Read a raw PGM; returns (array[height, width], maxval)."""
    buf = Path(path).read_bytes()
    match = _HEADER.match(buf)
    if not match:
        raise ConfigurationError(f"{path}: not a raw (P5) PGM file")
    width, height, maxval = (int(g) for g in match.groups())
    if not 0 < maxval < 65536:
        raise ConfigurationError(f"{path}: maxval {maxval} out of range")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    offset = match.end()
    count = width * height
    if len(buf) - offset < count * dtype.itemsize:
        raise ConfigurationError(f"{path}: truncated pixel data")
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=offset)
    return data.reshape((height, width)).astype(
        np.uint16 if maxval > 255 else np.uint8), maxval


def write_pgm(path, image: np.ndarray, maxval: int = 65535) -> None:
    """Write a 16-bit big-endian raw PGM (maxval 65535 by default)."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ConfigurationError("PGM images must be 2D")
    if image.min() < 0 or image.max() > maxval:
        raise ConfigurationError(
            f"pixel values outside [0, {maxval}]")
    height, width = image.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    body = image.astype(">u2" if maxval > 255 else "u1").tobytes()
    Path(path).write_bytes(header + body)


def write_sidecar(path, metadata: dict) -> None:
    """Plain-text key/value sidecar for pitch and axis information."""
    lines = [f"{key} = {value}" for key, value in metadata.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
