"""Binary and ASCII Netpbm (P2/P3/P5/P6) reading, P5/P6 writing."""
from __future__ import annotations

from pathlib import Path

import numpy as np


class NetpbmError(ValueError):
    pass


_CHANNELS = {b"P2": 1, b"P3": 3, b"P5": 1, b"P6": 3}


def _header(buf: bytes, path) -> tuple[bytes, int, int, int, int]:
    """Parse magic, width, height, maxval; returns them with the payload offset."""
    magic = buf[:2]
    if magic not in _CHANNELS:
        raise NetpbmError(f"{path}: byte 0: unsupported magic {magic!r}")
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(buf):
            raise NetpbmError(f"{path}: byte {pos}: header truncated")
        if buf[pos:pos + 1] == b"#":
            end = buf.find(b"\n", pos)
            pos = len(buf) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(buf) and buf[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise NetpbmError(f"{path}: byte {start}: expected a decimal header field")
        fields.append(int(buf[start:pos]))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise NetpbmError(f"{path}: byte {pos}: empty image {width}x{height}")
    if not 1 <= maxval <= 255:
        raise NetpbmError(f"{path}: byte {pos}: maxval {maxval} outside 1..255")
    # exactly one whitespace byte separates the header from a binary raster
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise NetpbmError(f"{path}: byte {pos}: missing whitespace after header")
    return magic, width, height, maxval, pos + 1


def read_netpbm(path) -> np.ndarray:
    """Pixel values scaled to [0, 1]; shape (h, w) for graymaps, (3, h, w) for pixmaps."""
    buf = Path(path).read_bytes()
    magic, width, height, maxval, offset = _header(buf, path)
    channels = _CHANNELS[magic]
    count = width * height * channels
    if magic in (b"P5", b"P6"):
        if len(buf) - offset < count:
            raise NetpbmError(f"{path}: byte {len(buf)}: payload truncated, expected {count} bytes from byte {offset}")
        raw = np.frombuffer(buf, dtype=np.uint8, count=count, offset=offset)
    else:
        tokens = buf[offset:].split()
        if len(tokens) < count:
            raise NetpbmError(f"{path}: byte {len(buf)}: payload truncated, {len(tokens)} of {count} samples")
        raw = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
    if raw.max(initial=0) > maxval:
        raise NetpbmError(f"{path}: byte {offset}: sample exceeds maxval {maxval}")
    values = raw.astype(np.float64) / maxval
    if channels == 1:
        return values.reshape(height, width)
    return values.reshape(height, width, 3).transpose(2, 0, 1).copy()


def read_image(path) -> np.ndarray:
    img = read_netpbm(path)
    if img.ndim != 3:
        raise NetpbmError(f"{path}: expected a colour pixmap (P3/P6)")
    return img


def read_mask(path) -> np.ndarray:
    """Graymap binarised at 128/255, shape (1, h, w)."""
    buf = Path(path).read_bytes()
    magic, _, _, maxval, _ = _header(buf, path)
    if _CHANNELS[magic] != 1:
        raise NetpbmError(f"{path}: expected a graymap (P2/P5)")
    gray = read_netpbm(path)
    return (np.rint(gray * maxval) * (255.0 / maxval) >= 128).astype(np.float64)[None]


def quantize(values: np.ndarray) -> np.ndarray:
    """[0, 1] -> uint8 with round-half-up."""
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < 0.0 or values.max() > 1.0 or not np.isfinite(values).all()):
        raise ValueError("pixel values must lie in [0, 1]")
    return np.floor(values * 255.0 + 0.5).astype(np.uint8)


def write_pgm(values: np.ndarray, path) -> None:
    """Write a (h, w) map of values in [0, 1] as binary P5."""
    values = np.asarray(values)
    if values.ndim == 3 and values.shape[0] == 1:
        values = values[0]
    if values.ndim != 2:
        raise ValueError(f"write_pgm: expected a 2-D map, got shape {values.shape}")
    h, w = values.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + quantize(values).tobytes())


def write_ppm(image: np.ndarray, path) -> None:
    """Write a (3, h, w) image of values in [0, 1] as binary P6."""
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValueError(f"write_ppm: expected shape (3, h, w), got {image.shape}")
    _, h, w = image.shape
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + quantize(image.transpose(1, 2, 0)).tobytes())
