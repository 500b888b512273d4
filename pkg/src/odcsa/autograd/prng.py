"""SplitMix64 generator and He-uniform initialisation.

SplitMix64 is a counter-based mix: draw ``k`` is ``mix(seed + k * GAMMA)``,
so a block of draws can be produced with vectorised uint64 arithmetic and
still match the scalar recurrence bit for bit.
"""
from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def splitmix64_scalar(state: int) -> tuple[int, int]:
    """Reference scalar step: returns (new_state, output)."""
    state = (state + GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Prng:
    """Deterministic 64-bit generator; identical streams on every platform."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self, count: int) -> np.ndarray:
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GAMMA)
            out = _mix(z)
        self.state = (self.state + count * GAMMA) & _MASK
        return out

    def uniform(self, count: int) -> np.ndarray:
        """Doubles strictly inside (0, 1)."""
        bits = self.next_u64(count) >> np.uint64(11)
        return (bits.astype(np.float64) + 0.5) * 2.0**-53

    def randint(self, n: int, count: int | None = None):
        """Uniform integers in [0, n)."""
        k = 1 if count is None else count
        vals = np.minimum((self.uniform(k) * n).astype(np.int64), n - 1)
        return int(vals[0]) if count is None else vals

    def spawn(self) -> "Prng":
        return Prng(int(self.next_u64(1)[0]))


def he_uniform_init(prng: Prng, fan_in: int, shape) -> np.ndarray:
    """Weights drawn uniformly from (-b, b) with b = sqrt(6 / fan_in)."""
    if fan_in <= 0:
        raise ValueError(f"he_uniform_init: fan_in must be positive, got {fan_in}")
    bound = np.sqrt(6.0 / fan_in)
    count = int(np.prod(shape))
    return ((2.0 * prng.uniform(count) - 1.0) * bound).reshape(shape)
