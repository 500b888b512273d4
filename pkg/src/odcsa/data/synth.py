"""Synthetic polyp-like images: textured background with rotated ellipses.

Scale varies through a log-uniform ellipse area (the first ellipse of each
image is stratified across the set so every scale band is represented) and direction
through a uniform orientation; every sample also has an exact 90 degree
rotated twin for direction-consistency checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..autograd import Prng
from .sample import Sample


@dataclass(frozen=True)
class SynthConfig:
    count: int = 16
    size: int = 64
    seed: int = 0
    min_ellipses: int = 1
    max_ellipses: int = 3
    axis_range: tuple[float, float] = (0.06, 0.45)
    min_aspect: float = 0.3
    # how far (in minor semi-axes) a centre may sit outside the frame
    overhang: float = 0.8
    max_reach: float = 0.1
    solo_quantile: float = 0.1
    blur_radius: float = 1.5
    noise: float = 0.06

    def __post_init__(self):
        if self.size % 32:
            raise ValueError(f"SynthConfig.size must be a multiple of 32, got {self.size}")
        if not 1 <= self.min_ellipses <= self.max_ellipses:
            raise ValueError("SynthConfig: need 1 <= min_ellipses <= max_ellipses")


@dataclass
class SynthDataset:
    samples: list[Sample] = field(default_factory=list)
    rotated: list[Sample] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def _ellipse_field(size, a, b, theta, cx, cy):
    """Normalised radius: < 1 inside the ellipse."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dx, dy = xx - cx, yy - cy
    c, s = np.cos(theta), np.sin(theta)
    u = (dx * c + dy * s) / a
    v = (-dx * s + dy * c) / b
    return np.sqrt(u * u + v * v)


def _background(prng: Prng, size: int, noise: float) -> np.ndarray:
    u = prng.uniform(9)
    base = np.array([0.55, 0.32, 0.28]) + 0.1 * (u[:3] - 0.5)
    gx, gy = 0.25 * (u[3] - 0.5), 0.25 * (u[4] - 0.5)
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1.0)
    ramp = gx * (xx - 0.5) + gy * (yy - 0.5)
    img = base[:, None, None] + ramp[None]
    grain = prng.uniform(3 * size * size).reshape(3, size, size) - 0.5
    grain = ndimage.gaussian_filter(grain, sigma=(0, 1.2, 1.2), mode="reflect")
    grain /= max(np.abs(grain).max(), 1e-12)
    return img + noise * grain


def _primary_axes(cfg: SynthConfig, quantile: float, u_aspect: float) -> tuple[float, float]:
    """Major/minor semi-axes whose area sits at ``quantile`` of the log-area range."""
    lo_ax, hi_ax = cfg.axis_range[0] * cfg.size, cfg.axis_range[1] * cfg.size
    lo, hi = np.log(lo_ax * lo_ax * cfg.min_aspect), np.log(hi_ax * hi_ax)
    ab = np.exp(lo + (hi - lo) * quantile)
    # aspect range that keeps the major semi-axis inside the axis range
    r_lo = max(cfg.min_aspect, ab / (hi_ax * hi_ax))
    r_hi = min(1.0, ab / (lo_ax * lo_ax))
    ratio = r_lo + (max(r_hi, r_lo) - r_lo) * u_aspect
    a = np.sqrt(ab / ratio)
    return a, a * ratio


def _one_sample(prng: Prng, cfg: SynthConfig, quantile: float, idx: int) -> Sample:
    size = cfg.size
    img = _background(prng, size, cfg.noise)
    n = cfg.min_ellipses + prng.randint(cfg.max_ellipses - cfg.min_ellipses + 1)
    if quantile < cfg.solo_quantile:
        # the tiniest polyps appear alone
        n = cfg.min_ellipses
    mask = np.zeros((size, size), dtype=bool)
    soft = np.zeros((size, size))
    for k in range(n):
        while True:
            u = prng.uniform(6)
            # companions never outgrow the primary ellipse
            q = quantile if k == 0 else quantile * u[0]
            a, b = _primary_axes(cfg, q, u[1])
            # full axes at least 2 px
            a, b = max(a, 1.0), max(b, 1.0)
            theta = np.pi * u[2]
            reach = min(cfg.overhang * b, cfg.max_reach * size)
            cx = -reach + u[3] * (size - 1 + 2 * reach)
            cy = -reach + u[4] * (size - 1 + 2 * reach)
            radius = _ellipse_field(size, a, b, theta, cx, cy)
            inside = radius <= 1.0
            if inside.any():
                break
        mask |= inside
        # signed distance to the border in pixels (approximate), blurred edge
        dist = (radius - 1.0) * b
        soft = np.maximum(soft, 0.5 * (1.0 - np.tanh(dist / cfg.blur_radius)))
    tint = np.array([0.28, 0.12, 0.02])
    img = img + soft[None] * tint[:, None, None]
    img = np.clip(img, 0.0, 1.0)
    return Sample(image=img, mask=mask[None].astype(np.float64), id=f"synth_{idx:04d}")


def rot90_sample(sample: Sample) -> Sample:
    """Clockwise quarter turn of image and mask."""
    return Sample(
        image=np.ascontiguousarray(np.rot90(sample.image, k=-1, axes=(1, 2))),
        mask=np.ascontiguousarray(np.rot90(sample.mask, k=-1, axes=(1, 2))),
        id=sample.id + "_r90",
    )


def synth_generate(cfg: SynthConfig) -> SynthDataset:
    prng = Prng(cfg.seed)
    ds = SynthDataset()
    for i in range(cfg.count):
        quantile = (i + prng.uniform(1)[0]) / cfg.count
        s = _one_sample(prng.spawn(), cfg, quantile, i)
        ds.samples.append(s)
        ds.rotated.append(rot90_sample(s))
    return ds
