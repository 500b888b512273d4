from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .measures import dice_iou, e_measure_max, mae, s_measure, weighted_fbeta

CSV_HEADER = ["dataset", "mdice", "miou", "fbw", "salpha", "ephimax", "mae", "n"]
FIELDS = ("mdice", "miou", "fbw", "s_alpha", "e_phi_max", "mae")


@dataclass
class MetricReport:
    mdice: float
    miou: float
    fbw: float
    s_alpha: float
    e_phi_max: float
    mae: float
    n_images: int

    def values(self) -> list[float]:
        return [getattr(self, f) for f in FIELDS]

    def csv_row(self, dataset: str) -> list[str]:
        return [dataset] + [f"{v:.6f}" for v in self.values()] + [str(self.n_images)]


def image_metrics(pred, gt) -> dict[str, float]:
    d, i = dice_iou(pred, gt)
    return {
        "mdice": d,
        "miou": i,
        "fbw": weighted_fbeta(pred, gt),
        "s_alpha": s_measure(pred, gt),
        "e_phi_max": e_measure_max(pred, gt),
        "mae": mae(pred, gt),
    }


def evaluate_dataset(pairs) -> MetricReport:
    """Arithmetic mean of every per-image measure over ``(pred, gt)`` pairs."""
    rows = [image_metrics(p, g) for p, g in pairs]
    if not rows:
        raise ValueError("evaluate_dataset: no prediction/ground-truth pairs given")
    means = {f: float(np.mean([r[f] for r in rows])) for f in FIELDS}
    return MetricReport(**means, n_images=len(rows))


def write_report_csv(reports: dict[str, MetricReport], path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for name, rep in reports.items():
            writer.writerow(rep.csv_row(name))
