"""Finite-difference gradient suite over every differentiable building block.

Each case builds a small double-precision instance (1 x C x 8 x 8 inputs),
projects the block output onto a fixed random direction to get a scalar and
compares tape gradients against central differences for the inputs and all
parameters.  Biases are randomised so no pre-activation sits on a relu kink.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .autograd import Prng, Tensor, finite_diff_check
from .autograd import functional as F
from .loss import total_loss
from .nn import CSA, ERA, ODC, RFA, RFB, S2E, SRA

TOLERANCE = 1e-4
CH = 4
SIDE = 8

# A bias that only shifts the logits of a spatial softmax has an identically
# zero gradient; the relative error would compare roundoff with roundoff.
# These parameters are instead required to have a vanishing tape gradient.
SOFTMAX_INVARIANT = {"rfa": ("conv_block.4.bias",)}


@dataclass
class GradResult:
    name: str
    max_rel_err: float
    seconds: float
    invariant_grad: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_rel_err < TOLERANCE and self.invariant_grad <= 1e-12

    def line(self) -> str:
        return f"{self.name}: max_rel_err {self.max_rel_err:.1e} {'PASS' if self.passed else 'FAIL'}"


class _Case:
    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)
        self.prng = Prng(seed)

    def tensor(self, *shape) -> Tensor:
        return Tensor(self.rng.standard_normal(shape))

    def jitter_biases(self, module):
        for name, p in module.named_parameters():
            if name.endswith("bias"):
                p.data[...] = 0.1 * self.rng.standard_normal(p.shape)
        return module

    def check(self, out_fn: Callable[[], Tensor], inputs, module=None, skip=(), max_coords=24) -> tuple[float, float]:
        direction = self.rng.standard_normal(out_fn().shape)
        tensors = list(inputs)
        skipped = []
        if module is not None:
            for name, p in module.named_parameters():
                (skipped if name in skip else tensors).append(p)
        err = finite_diff_check(lambda: F.sum(out_fn() * direction), tensors, max_coords=max_coords)
        invariant = 0.0
        if skipped:
            for p in skipped:
                p.grad = None
                p.requires_grad = True
            F.sum(out_fn() * direction).backward()
            invariant = max(float(np.abs(p.grad).max()) if p.grad is not None else 0.0 for p in skipped)
        return err, invariant


def _conv2d(c: _Case):
    x, w, b = c.tensor(1, CH, SIDE, SIDE), c.tensor(3, CH, 3, 3), c.tensor(3)
    e1, _ = c.check(lambda: F.conv2d(x, w, b, stride=1, pad=(1, 1)), [x, w, b])
    e2, _ = c.check(lambda: F.conv2d(x, w, b, stride=2, pad=(2, 2), dilation=2), [x, w, b])
    return max(e1, e2), 0.0


def _pooling(c: _Case):
    x = c.tensor(1, CH, SIDE, SIDE)
    odd = c.tensor(1, CH, 7, 7)
    errs = [
        c.check(lambda: F.avg_pool2x2(x), [x])[0],
        c.check(lambda: F.avg_pool2x2(odd), [odd])[0],
        c.check(lambda: F.global_avg_pool(x), [x])[0],
        c.check(lambda: F.global_max_pool(x), [x])[0],
        c.check(lambda: F.channel_max(x), [x])[0],
        c.check(lambda: F.channel_mean(x), [x])[0],
    ]
    return max(errs), 0.0


def _resize(c: _Case):
    x = c.tensor(1, CH, SIDE, SIDE)
    up = c.check(lambda: F.bilinear_resize(x, 2 * SIDE, 2 * SIDE), [x])[0]
    down = c.check(lambda: F.bilinear_resize(x, 3, 5), [x])[0]
    return max(up, down), 0.0


def _softmax(c: _Case):
    x = c.tensor(1, CH, SIDE, SIDE)
    return c.check(lambda: F.softmax_spatial(x), [x])[0], 0.0


def _odc(c: _Case):
    x, m = c.tensor(1, CH, SIDE, SIDE), c.jitter_biases(ODC(c.prng, CH))
    return c.check(lambda: m(x), [x], m)


def _rfb(c: _Case):
    # reduced width and a 6x6 map keep the dilated branches cheap
    x, m = c.tensor(1, 8, 6, 6), c.jitter_biases(RFB(c.prng, 8, 8))
    return c.check(lambda: m(x), [x], m, max_coords=12)


def _s2e(c: _Case):
    x, m = c.tensor(1, CH, SIDE, SIDE), c.jitter_biases(S2E(c.prng, CH))
    return c.check(lambda: m(x), [x], m)


def _csa(c: _Case):
    s, v = c.tensor(1, CH, SIDE, SIDE), c.tensor(1, CH, SIDE, SIDE)
    m = c.jitter_biases(CSA(c.prng, CH))
    return c.check(lambda: m(s, v)[1], [s, v], m)


def _rfa(c: _Case):
    d, f3 = c.tensor(1, CH, SIDE // 2, SIDE // 2), c.tensor(1, CH, SIDE, SIDE)
    m = c.jitter_biases(RFA(c.prng, CH))
    return c.check(lambda: m(d, f3), [d, f3], m, skip=SOFTMAX_INVARIANT["rfa"])


def _era(c: _Case):
    x, m = c.tensor(1, CH, SIDE, SIDE), c.jitter_biases(ERA(c.prng, CH))
    return c.check(lambda: m(x), [x], m)


def _sra(c: _Case):
    z, f1 = c.tensor(1, 1, SIDE // 4, SIDE // 4), c.tensor(1, CH, SIDE, SIDE)
    m = c.jitter_biases(SRA(c.prng, CH))
    return c.check(lambda: m(z, f1)[1], [z, f1], m)


def _loss(c: _Case):
    z, p = c.tensor(1, 1, SIDE, SIDE), c.tensor(1, 1, SIDE, SIDE)
    gt = (c.rng.random((1, 1, SIDE, SIDE)) > 0.5).astype(np.float64)
    return finite_diff_check(lambda: total_loss(z, p, gt)[0], [z, p]), 0.0


BLOCKS: dict[str, Callable[[_Case], tuple[float, float]]] = {
    "conv2d": _conv2d,
    "pooling": _pooling,
    "resize": _resize,
    "softmax": _softmax,
    "odc": _odc,
    "rfb": _rfb,
    "s2e": _s2e,
    "csa": _csa,
    "rfa": _rfa,
    "era": _era,
    "sra": _sra,
    "loss": _loss,
}


def run_block(name: str, seed: int = 0) -> GradResult:
    if name not in BLOCKS:
        raise KeyError(f"unknown block {name!r}; choose from {', '.join(BLOCKS)} or all")
    t0 = time.perf_counter()
    err, invariant = BLOCKS[name](_Case(seed))
    return GradResult(name, err, time.perf_counter() - t0, invariant)


def run_suite(names=None, seed: int = 0) -> list[GradResult]:
    return [run_block(n, seed) for n in (names or list(BLOCKS))]
