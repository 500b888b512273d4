"""Deterministic training loop with a per-step CSV run log."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .autograd import Prng, Tensor
from .config import Config
from .data import Sample, load_dataset, multiscale_pick, resize_sample
from .loss import total_loss
from .nn import OdcSaNet, save_model
from .optim import Adam, lr_at

RUNLOG_HEADER = "epoch,step,lr,bce_w,iou_w,total\n"
# offset that separates the data-order stream from the weight-init stream
DATA_STREAM = 0x5DEECE66D


@dataclass
class TrainResult:
    model: OdcSaNet
    rows: list[tuple[int, int, float, float, float, float]] = field(default_factory=list)

    @property
    def losses(self) -> np.ndarray:
        return np.array([r[5] for r in self.rows])


def format_row(row) -> str:
    epoch, step, lr, bce, iou, total = row
    return f"{epoch},{step},{lr:.6e},{bce:.10e},{iou:.10e},{total:.10e}\n"


def stack_batch(samples: list[Sample]) -> tuple[Tensor, np.ndarray]:
    return Tensor(np.stack([s.image for s in samples])), np.stack([s.mask for s in samples])


def train(cfg: Config, samples: list[Sample] | None = None, log_path=None, ckpt_path=None,
          progress=None) -> TrainResult:
    """Train from ``cfg``; ``samples`` overrides ``cfg.data_dir``.

    Paths default to the config values; pass ``False`` to skip writing.  The
    run log is flushed at the end of each epoch and the checkpoint written
    once training stops.
    """
    if samples is None:
        samples = load_dataset(cfg.data_dir)
    if not samples:
        raise ValueError("train: empty training set")
    log_path = cfg.log_path if log_path is None else log_path
    ckpt_path = cfg.ckpt_path if ckpt_path is None else ckpt_path

    model = OdcSaNet(seed=cfg.seed, ablation=cfg.ablation)
    opt = Adam(model.parameters(), lr=cfg.lr)
    prng = Prng(cfg.seed + DATA_STREAM)
    result = TrainResult(model)
    log = Path(log_path).open("w", newline="") if log_path else io.StringIO()
    step = 0
    try:
        log.write(RUNLOG_HEADER)
        for epoch in range(cfg.epochs):
            lr = lr_at(epoch, cfg.lr, cfg.lr_decay_every, cfg.lr_decay)
            order = np.argsort(prng.uniform(len(samples)), kind="stable")
            for start in range(0, len(samples), cfg.batch):
                size = multiscale_pick(prng, cfg.size, cfg.scales)
                batch = [resize_sample(samples[i], size) for i in order[start:start + cfg.batch]]
                x, gt = stack_batch(batch)
                out = model(x)
                loss, rep = total_loss(out["z"], out["p"], gt, cfg.weight_amp, cfg.weight_window)
                opt.zero_grad()
                loss.backward()
                opt.step(lr)
                step += 1
                row = (epoch, step, lr, rep.bce_w, rep.iou_w, rep.total)
                result.rows.append(row)
                log.write(format_row(row))
                if progress is not None:
                    progress(row)
                if cfg.max_steps and step >= cfg.max_steps:
                    break
            log.flush()
            if cfg.max_steps and step >= cfg.max_steps:
                break
    finally:
        log.close()
    if ckpt_path:
        save_model(model, ckpt_path)
    return result
