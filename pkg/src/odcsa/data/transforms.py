from __future__ import annotations

import numpy as np

from ..autograd import Prng
from ..autograd.functional import resize_matrix
from .sample import Sample

SCALES = (0.75, 1.0, 1.25)


def resize_image(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a (c, h, w) array, half-pixel centres."""
    _, h, w = image.shape
    if (h, w) == (out_h, out_w):
        return image.copy()
    return np.einsum("ih,chw,jw->cij", resize_matrix(h, out_h), image, resize_matrix(w, out_w), optimize=True)


def resize_nearest(mask: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    _, h, w = mask.shape
    rows = np.minimum(((np.arange(out_h) + 0.5) * h / out_h).astype(np.int64), h - 1)
    cols = np.minimum(((np.arange(out_w) + 0.5) * w / out_w).astype(np.int64), w - 1)
    return mask[:, rows][:, :, cols]


def resize_sample(sample: Sample, size) -> Sample:
    out_h, out_w = (size, size) if np.isscalar(size) else size
    return Sample(
        image=np.clip(resize_image(sample.image, out_h, out_w), 0.0, 1.0),
        mask=resize_nearest(sample.mask, out_h, out_w),
        id=sample.id,
    )


def snap32(value: float) -> int:
    """Nearest positive multiple of 32; exact ties go down."""
    lower = int(np.floor(value / 32.0)) * 32
    upper = lower + 32
    snapped = upper if value - lower > upper - value else lower
    return max(snapped, 32)


def multiscale_pick(prng: Prng, base: int, scales=SCALES) -> int:
    s = scales[prng.randint(len(scales))]
    return snap32(round(base * s))
