"""Boundary-weighted BCE + IoU loss with deep supervision over two heads."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autograd import Tensor
from .autograd import functional as F

PROB_CLAMP = 1e-7


def _box_sum(mask: np.ndarray, window: int) -> np.ndarray:
    """Sum over a window x window neighbourhood with zero padding (exact for integer masks)."""
    r = window // 2
    h, w = mask.shape[-2:]
    padded = np.pad(mask.astype(np.int64), [(0, 0)] * (mask.ndim - 2) + [(r + 1, r), (r + 1, r)])
    integral = padded.cumsum(axis=-2).cumsum(axis=-1)
    return (integral[..., window:window + h, window:window + w]
            - integral[..., :h, window:window + w]
            - integral[..., window:window + h, :w]
            + integral[..., :h, :w])


def weight_map(gt: np.ndarray, amp: float = 5.0, window: int = 31) -> np.ndarray:
    """Per-pixel weights ``1 + amp * |local_mean(G) - G|`` over a zero-padded window."""
    gt = np.asarray(gt)
    if not np.isin(gt, (0, 1)).all():
        raise ValueError("weight_map: mask must be binary (values 0 and 1 only)")
    if window < 1 or window % 2 == 0:
        raise ValueError(f"weight_map: window must be a positive odd size, got {window}")
    local = _box_sum(gt, window) / float(window * window)
    return 1.0 + amp * np.abs(local - gt)


def _check(logits: Tensor, gt: np.ndarray, w: np.ndarray, name: str) -> None:
    if logits.shape != gt.shape or gt.shape != w.shape:
        raise ValueError(f"{name}: shapes differ (logits {logits.shape}, mask {gt.shape}, weights {w.shape})")


def _per_image_sum(x: Tensor) -> Tensor:
    return F.sum(x, axis=(1, 2, 3))


def weighted_bce(logits: Tensor, gt: np.ndarray, w: np.ndarray) -> Tensor:
    _check(logits, gt, w, "weighted_bce")
    p = F.clip(F.sigmoid(logits), PROB_CLAMP, 1.0 - PROB_CLAMP)
    bce = -(gt * F.log(p) + (1.0 - gt) * F.log(1.0 - p))
    per_image = _per_image_sum(bce * w) / w.sum(axis=(1, 2, 3))
    return F.reshape(F.mean(per_image), (1, 1, 1, 1))


def weighted_iou(logits: Tensor, gt: np.ndarray, w: np.ndarray) -> Tensor:
    _check(logits, gt, w, "weighted_iou")
    p = F.sigmoid(logits)
    inter = _per_image_sum(p * (gt * w))
    union = _per_image_sum((p + gt) * w)
    per_image = 1.0 - (inter + 1.0) / (union - inter + 1.0)
    return F.reshape(F.mean(per_image), (1, 1, 1, 1))


def structure_loss(logits: Tensor, gt: np.ndarray, w: np.ndarray) -> tuple[Tensor, Tensor]:
    return weighted_bce(logits, gt, w), weighted_iou(logits, gt, w)


@dataclass
class LossReport:
    bce_w: float
    iou_w: float
    total: float
    heads: dict[str, dict[str, float]] = field(default_factory=dict)


def total_loss(z_full: Tensor, p_full: Tensor, gt: np.ndarray, amp: float = 5.0,
               window: int = 31) -> tuple[Tensor, LossReport]:
    """Sum of the weighted loss on the final head and the upsampled intermediate head."""
    w = weight_map(gt, amp, window)
    heads = {}
    total = None
    for name, logits in (("p", p_full), ("z", z_full)):
        bce, iou = structure_loss(logits, gt, w)
        heads[name] = {"bce_w": bce.item(), "iou_w": iou.item()}
        term = bce + iou
        total = term if total is None else total + term
    report = LossReport(
        bce_w=heads["p"]["bce_w"] + heads["z"]["bce_w"],
        iou_w=heads["p"]["iou_w"] + heads["z"]["iou_w"],
        total=total.item(),
        heads=heads,
    )
    return total, report
