from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Sample:
    """RGB image (3, h, w) in [0, 1] with a binary mask (1, h, w)."""

    image: np.ndarray
    mask: np.ndarray
    id: str = ""

    def __post_init__(self):
        if self.image.ndim != 3 or self.image.shape[0] != 3:
            raise ValueError(f"Sample {self.id!r}: image must be (3, h, w), got {self.image.shape}")
        if self.mask.shape != (1,) + self.image.shape[1:]:
            raise ValueError(f"Sample {self.id!r}: mask {self.mask.shape} does not match image {self.image.shape}")
        if not np.isin(self.mask, (0.0, 1.0)).all():
            raise ValueError(f"Sample {self.id!r}: mask is not binary")

    @property
    def size(self) -> tuple[int, int]:
        return self.image.shape[1], self.image.shape[2]
