from .edt import distance_transform
from .measures import (
    THRESHOLDS,
    dice_at,
    dice_iou,
    dice_iou_curves,
    e_measure_curve,
    e_measure_max,
    gaussian_kernel,
    mae,
    s_measure,
    weighted_fbeta,
)
from .report import CSV_HEADER, MetricReport, evaluate_dataset, image_metrics, write_report_csv

__all__ = [
    "CSV_HEADER",
    "MetricReport",
    "THRESHOLDS",
    "dice_at",
    "dice_iou",
    "dice_iou_curves",
    "distance_transform",
    "e_measure_curve",
    "e_measure_max",
    "evaluate_dataset",
    "gaussian_kernel",
    "image_metrics",
    "mae",
    "s_measure",
    "weighted_fbeta",
    "write_report_csv",
]
