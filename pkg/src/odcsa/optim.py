"""Optimizers and the step learning-rate schedule."""
from __future__ import annotations

import numpy as np

from .autograd import Tensor


def lr_at(epoch: int, base_lr: float = 1e-4, every: int = 30, decay: float = 0.1) -> float:
    """Learning rate after ``epoch`` full epochs: ``base_lr * decay ** (epoch // every)``."""
    return base_lr * decay ** (epoch // every)


class Optimizer:
    """Minimal interface: ``step`` consumes ``.grad`` of every parameter."""

    def __init__(self, params: list[Tensor], lr: float):
        self.params = list(params)
        self.lr = lr

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self, lr: float | None = None) -> None:
        raise NotImplementedError


class Adam(Optimizer):
    def __init__(self, params, lr: float = 1e-4, betas=(0.9, 0.999), eps: float = 1e-8):
        super().__init__(params, lr)
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self, lr: float | None = None) -> None:
        if all(p.grad is None for p in self.params):
            raise RuntimeError("Adam.step: no parameter has a gradient; call backward() first")
        lr = self.lr if lr is None else lr
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            if p.grad is None:
                continue
            g = p.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p.data -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
