from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .prng import Prng
from .tensor import Tensor


def finite_diff_check(
    f: Callable[..., Tensor],
    x: Tensor | Sequence[Tensor],
    eps: float = 1e-5,
    max_coords: int | None = None,
    seed: int = 0,
) -> float:
    """Largest relative error between tape gradients and central differences.

    ``f`` is called with no arguments when ``x`` is a list (the tensors are
    captured by ``f``), otherwise with ``x``.  ``max_coords`` limits how many
    coordinates of each tensor are probed; the subset is drawn from a seeded
    generator.  Relative error is ``|a - b| / max(1e-8, |a| + |b|)``.
    """
    tensors = [x] if isinstance(x, Tensor) else list(x)
    call = (lambda: f(x)) if isinstance(x, Tensor) else f
    for t in tensors:
        t.requires_grad = True
        t.grad = None

    loss = call()
    if loss.data.size != 1:
        raise ValueError(f"finite_diff_check: f must return a scalar, got shape {loss.shape}")
    loss.backward()
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in tensors]

    prng = Prng(seed)
    worst = 0.0
    for t, grad in zip(tensors, analytic):
        flat = t.data.reshape(-1)
        idx = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            idx = np.unique(prng.randint(flat.size, max_coords))
        for i in idx:
            orig = flat[i]
            flat[i] = orig + eps
            fp = call().item()
            flat[i] = orig - eps
            fm = call().item()
            flat[i] = orig
            numeric = (fp - fm) / (2.0 * eps)
            a = grad.reshape(-1)[i]
            err = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
            worst = max(worst, err)
    return worst
