"""Parameter and multiply-accumulate accounting."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autograd import Tensor, no_grad
from ..autograd import functional as F
from .layers import Module


def rect_branch_weights(ch: int) -> int:
    """Weights of the two three-layer rectangular branches (1x3 and 3x1): 18 C^2."""
    return 2 * 3 * (3 * ch * ch)


def dense_branch_weights(ch: int) -> int:
    """Weights of a three-layer dense 3x3 stack at the same width: 27 C^2."""
    return 3 * (9 * ch * ch)


@dataclass
class Accounting:
    size: int
    params: dict[str, int] = field(default_factory=dict)
    macs: dict[str, int] = field(default_factory=dict)
    odc_rect_weights: int = 0
    odc_dense_weights: int = 0
    odc_rect_macs: int = 0
    odc_dense_macs: int = 0

    @property
    def ratio(self) -> float:
        return self.odc_rect_weights / self.odc_dense_weights

    @property
    def total_params(self) -> int:
        return sum(self.params.values())

    @property
    def total_macs(self) -> int:
        return sum(self.macs.values())

    def lines(self) -> list[str]:
        out = [f"input {self.size}x{self.size}", f"{'block':<10}{'params':>14}{'MACs':>18}"]
        for name in self.params:
            out.append(f"{name:<10}{self.params[name]:>14,}{self.macs.get(name, 0):>18,}")
        out.append(f"{'total':<10}{self.total_params:>14,}{self.total_macs:>18,}")
        out.append(f"odc rectangular branches: {self.odc_rect_weights:,} weights, {self.odc_rect_macs:,} MACs")
        out.append(f"dense 3x3 three-layer baseline: {self.odc_dense_weights:,} weights, {self.odc_dense_macs:,} MACs")
        out.append(f"ratio odc/dense: {self.ratio:.4f}")
        return out


def block_params(model: Module) -> dict[str, int]:
    """Parameter counts grouped by top-level child (rfb1/rfb3/rfb4 merged as ``rfb``)."""
    groups: dict[str, int] = {}
    for name, child in model.named_children():
        key = "rfb" if name.startswith("rfb") else name.replace("_bypass", "")
        groups[key] = groups.get(key, 0) + child.num_params()
    return groups


def count_params_flops(model, size: int, batch: int = 1) -> Accounting:
    """Exact counts for one forward pass of ``model`` at ``size`` x ``size``."""
    profile: dict[str, int] = {}
    with no_grad():
        model.forward(Tensor(np.zeros((batch, 3, size, size))), profile=profile)
    acc = Accounting(size=size, params=block_params(model))
    acc.macs = {k: profile.get(k, 0) for k in acc.params}
    ch = model.ch
    h4 = size // 32
    acc.odc_rect_weights = rect_branch_weights(ch)
    acc.odc_dense_weights = dense_branch_weights(ch)
    acc.odc_rect_macs = batch * acc.odc_rect_weights * h4 * h4
    acc.odc_dense_macs = batch * acc.odc_dense_weights * h4 * h4
    return acc


def conv_macs(fn, *args) -> int:
    """MACs issued by conv2d calls while evaluating ``fn(*args)``."""
    with no_grad(), F.count_macs() as counter:
        fn(*args)
    return counter["macs"]
