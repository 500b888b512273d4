"""Per-image segmentation measures for a prediction in [0, 1] against a binary mask."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy import ndimage

from .edt import distance_transform

EPS = np.finfo(np.float64).eps
THRESHOLDS = np.arange(1, 256) / 255.0


def _pair(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"prediction shape {pred.shape} does not match ground truth {gt.shape}")
    if pred.ndim != 2:
        raise ValueError(f"expected 2-D maps, got shape {pred.shape}")
    return pred, gt.astype(bool)


def _counts_above(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Number of ``values >= t`` for each threshold."""
    return values.size - np.searchsorted(np.sort(values), thresholds, side="left")


def _sweep_counts(pred, gt, thresholds=THRESHOLDS):
    tp = _counts_above(pred[gt], thresholds)
    fp = _counts_above(pred[~gt], thresholds)
    return tp, fp, int(gt.sum())


def dice_iou_curves(pred, gt, thresholds=THRESHOLDS) -> tuple[np.ndarray, np.ndarray]:
    pred, gt = _pair(pred, gt)
    tp, fp, n_gt = _sweep_counts(pred, gt, thresholds)
    n_pred = tp + fp
    both_empty = (n_pred == 0) & (n_gt == 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        dice = np.where(both_empty, 1.0, 2.0 * tp / (n_pred + n_gt))
        iou = np.where(both_empty, 1.0, tp / (n_pred + n_gt - tp))
    return dice, iou


def _exact_mean(num: np.ndarray, den: np.ndarray, empty: np.ndarray) -> float:
    """Mean of integer ratios, correctly rounded (a constant curve returns its value exactly)."""
    total = sum(Fraction(1) if e else Fraction(int(n), int(d)) for n, d, e in zip(num, den, empty))
    return float(total / len(num))


def dice_iou(pred, gt) -> tuple[float, float]:
    """Dice and IoU averaged over the thresholds 1/255 ... 255/255."""
    pred, gt = _pair(pred, gt)
    tp, fp, n_gt = _sweep_counts(pred, gt)
    n_pred = tp + fp
    empty = (n_pred == 0) & (n_gt == 0)
    return _exact_mean(2 * tp, n_pred + n_gt, empty), _exact_mean(tp, n_pred + n_gt - tp, empty)


def dice_at(pred, gt, threshold: float = 0.5) -> float:
    dice, _ = dice_iou_curves(pred, gt, np.array([threshold]))
    return float(dice[0])


def mae(pred, gt) -> float:
    pred, gt = _pair(pred, gt)
    return float(np.abs(pred - gt).mean())


def gaussian_kernel(size: int = 7, sigma: float = 5.0) -> np.ndarray:
    r = size // 2
    y, x = np.mgrid[-r:r + 1, -r:r + 1].astype(np.float64)
    k = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    return k / k.sum()


def weighted_fbeta(pred, gt, beta: float = 1.0, window: int = 7, sigma: float = 5.0,
                   decay: float = 5.0, return_flag: bool = False):
    """Weighted F-measure with distance-dependent error weighting.

    An empty ground truth returns 0 (flagged when ``return_flag``).
    """
    pred, gt = _pair(pred, gt)
    if not gt.any():
        return (0.0, True) if return_flag else 0.0
    err = np.abs(pred - gt)
    dist, (near_r, near_c) = distance_transform(gt)
    # background pixels inherit the error of their nearest foreground pixel
    err_t = err.copy()
    bg = ~gt
    err_t[bg] = err[near_r[bg], near_c[bg]]
    smoothed = ndimage.correlate(err_t, gaussian_kernel(window, sigma), mode="constant", cval=0.0)
    min_err = err.copy()
    lower = gt & (smoothed < err)
    min_err[lower] = smoothed[lower]
    importance = np.ones_like(err)
    importance[bg] = 2.0 - np.exp(np.log(0.5) / decay * dist[bg])
    ew = min_err * importance
    tp_w = gt.sum() - ew[gt].sum()
    fp_w = ew[bg].sum()
    recall = 1.0 - ew[gt].mean()
    precision = tp_w / (EPS + tp_w + fp_w)
    b2 = beta * beta
    score = float((1.0 + b2) * recall * precision / (EPS + recall + b2 * precision))
    return (score, False) if return_flag else score


def _ssim(pred: np.ndarray, gt: np.ndarray) -> float:
    n = pred.size
    if n == 0:
        return 0.0
    x, y = pred.mean(), gt.mean()
    denom = max(n - 1, 1)
    sx = ((pred - x) ** 2).sum() / denom
    sy = ((gt - y) ** 2).sum() / denom
    sxy = ((pred - x) * (gt - y)).sum() / denom
    alpha = 4.0 * x * y * sxy
    beta = (x * x + y * y) * (sx + sy)
    if alpha != 0:
        return alpha / (beta + EPS)
    return 1.0 if beta == 0 else 0.0


def _s_object_part(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    x = values.mean()
    sigma = values.std(ddof=1) if values.size > 1 else 0.0
    return 2.0 * x / (x * x + 1.0 + sigma + EPS)


def _s_object(pred, gt) -> float:
    fg = pred * gt
    bg = (1.0 - pred) * (~gt)
    u = gt.mean()
    return u * _s_object_part(fg[gt]) + (1.0 - u) * _s_object_part(bg[~gt])


def _centroid(gt) -> tuple[int, int]:
    """1-based centroid column and row, rounded half away from zero."""
    h, w = gt.shape
    if not gt.any():
        return int(np.floor(w / 2 + 0.5)), int(np.floor(h / 2 + 0.5))
    rows, cols = np.nonzero(gt)
    return int(np.floor(cols.mean() + 1.5)), int(np.floor(rows.mean() + 1.5))


def _s_region(pred, gt) -> float:
    h, w = gt.shape
    x, y = _centroid(gt)
    x, y = min(x, w), min(y, h)
    g = gt.astype(np.float64)
    area = float(h * w)
    parts = [
        (x * y / area, pred[:y, :x], g[:y, :x]),
        (y * (w - x) / area, pred[:y, x:], g[:y, x:]),
        ((h - y) * x / area, pred[y:, :x], g[y:, :x]),
    ]
    w4 = 1.0 - sum(p[0] for p in parts)
    parts.append((w4, pred[y:, x:], g[y:, x:]))
    return float(sum(weight * _ssim(p, q) for weight, p, q in parts if p.size))


def s_measure(pred, gt, alpha: float = 0.5) -> float:
    """Structure measure blending object-aware and region-aware similarity."""
    pred, gt = _pair(pred, gt)
    y = gt.mean()
    if y == 0:
        score = 1.0 - pred.mean()
    elif y == 1:
        score = pred.mean()
    else:
        score = alpha * _s_object(pred, gt) + (1.0 - alpha) * _s_region(pred, gt)
    return float(min(max(score, 0.0), 1.0))


def e_measure_curve(pred, gt, thresholds=THRESHOLDS, eps: float = EPS) -> np.ndarray:
    """Enhanced-alignment score for each threshold.

    A binarised map and a binary mask produce only four distinct pixel
    classes, so each score is a count-weighted sum over those classes.
    """
    pred, gt = _pair(pred, gt)
    n = gt.size
    tp, fp, n_gt = _sweep_counts(pred, gt, thresholds)
    n_pred = tp + fp
    if n_gt == 0 or n_gt == n:
        # degenerate mask: fraction of agreeing pixels
        agree = (n - n_pred) if n_gt == 0 else n_pred
        return agree / n
    mu_g = n_gt / n
    mu_p = n_pred / n
    fn = n_gt - tp
    tn = n - n_gt - fp
    total = np.zeros(len(thresholds))
    for count, p_val, g_val in ((tp, 1.0, 1.0), (fp, 1.0, 0.0), (fn, 0.0, 1.0), (tn, 0.0, 0.0)):
        fp_c = p_val - mu_p
        fg_c = g_val - mu_g
        align = 2.0 * fp_c * fg_c / (fp_c * fp_c + fg_c * fg_c + eps)
        total += count * (align + 1.0) ** 2 / 4.0
    return total / n


def e_measure_max(pred, gt) -> float:
    return float(np.clip(e_measure_curve(pred, gt).max(), 0.0, 1.0))
