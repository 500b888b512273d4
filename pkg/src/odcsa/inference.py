"""Probability maps from a trained network and dataset-level evaluation."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .autograd import Tensor, no_grad
from .autograd import functional as F
from .data import Sample, read_netpbm, resize_image, snap32
from .metrics import MetricReport, evaluate_dataset


def predict_prob(model, image: np.ndarray) -> np.ndarray:
    """Sigmoid of the final head for one (3, h, w) image, returned at (h, w).

    Inputs whose sides are not multiples of 32 are resized to the nearest
    valid size and the map is resized back.
    """
    _, h, w = image.shape
    sh, sw = snap32(h), snap32(w)
    x = image if (sh, sw) == (h, w) else resize_image(image, sh, sw)
    with no_grad():
        p = F.sigmoid(model(Tensor(x[None]))["p"]).data[0]
    if (sh, sw) != (h, w):
        p = resize_image(p, h, w)
    return np.clip(p[0], 0.0, 1.0)


def evaluate_model(model, samples: list[Sample]) -> MetricReport:
    return evaluate_dataset((predict_prob(model, s.image), s.mask[0]) for s in samples)


def evaluate_pred_dir(pred_dir, samples: list[Sample]) -> MetricReport:
    """Score precomputed maps stored as ``<pred_dir>/<id>.pgm`` (grey level / 255)."""
    pairs = []
    for s in samples:
        path = Path(pred_dir) / f"{s.id}.pgm"
        if not path.exists():
            raise FileNotFoundError(f"{path}: no prediction for id {s.id!r}")
        pred = read_netpbm(path)
        if pred.ndim != 2:
            raise ValueError(f"{path}: prediction must be a greyscale map")
        pairs.append((pred, s.mask[0]))
    return evaluate_dataset(pairs)

