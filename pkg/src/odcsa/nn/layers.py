from __future__ import annotations

from typing import Iterator

import numpy as np

from ..autograd import Prng, Tensor, he_uniform_init
from ..autograd import functional as F


class Module:
    """Parameter container; parameters and children are discovered from attributes."""

    def named_children(self) -> Iterator[tuple[str, "Module"]]:
        for name, value in vars(self).items():
            if isinstance(value, Module):
                yield name, value

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                yield prefix + name, value
        for name, child in self.named_children():
            yield from child.named_parameters(prefix + name + ".")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def num_params(self) -> int:
        return int(sum(p.data.size for p in self.parameters()))

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError


class Conv2d(Module):
    """Convolution layer with He-uniform weights, zero bias and optional relu.

    ``pad`` defaults to the "same" padding of an odd kernel at the given
    dilation.
    """

    def __init__(self, prng: Prng, c_in: int, c_out: int, kernel=(3, 3), stride: int = 1,
                 pad=None, dilation: int = 1, relu: bool = False):
        kh, kw = (kernel, kernel) if np.isscalar(kernel) else kernel
        if pad is None:
            pad = ((kh - 1) // 2 * dilation, (kw - 1) // 2 * dilation)
        self.stride = stride
        self.pad = (pad, pad) if np.isscalar(pad) else tuple(pad)
        self.dilation = dilation
        self.relu = relu
        fan_in = c_in * kh * kw
        self.weight = Tensor(he_uniform_init(prng, fan_in, (c_out, c_in, kh, kw)), requires_grad=True)
        self.bias = Tensor(np.zeros(c_out), requires_grad=True)

    @property
    def kernel_shape(self) -> tuple[int, int, int, int]:
        return self.weight.shape

    def forward(self, x: Tensor) -> Tensor:
        y = F.conv2d(x, self.weight, self.bias, stride=self.stride, pad=self.pad, dilation=self.dilation)
        return F.relu(y) if self.relu else y


def pointwise(prng: Prng, c_in: int, c_out: int, relu: bool = False) -> Conv2d:
    return Conv2d(prng, c_in, c_out, kernel=(1, 1), relu=relu)


class ConvStack(Module):
    """Ordered convolution layers; children are named by index (``0``, ``1``, ...)."""

    def __init__(self, layers: list[Conv2d]):
        self.layers = list(layers)
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.weight.shape[0] != nxt.weight.shape[1]:
                raise ValueError(
                    f"ConvStack: layer emits {prev.weight.shape[0]} channels, next expects {nxt.weight.shape[1]}"
                )

    def named_children(self):
        for i, layer in enumerate(self.layers):
            yield str(i), layer

    def __len__(self) -> int:
        return len(self.layers)

    def __getitem__(self, i: int) -> Conv2d:
        return self.layers[i]

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x
