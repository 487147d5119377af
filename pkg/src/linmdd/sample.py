"""The (x, y, z) observation triple all tests operate on."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .kernel import as_block

__all__ = ["Sample"]


@dataclass(frozen=True)
class Sample:
    """An n-row dataset of explanatory (x), response (y), and covariate (z) blocks."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", as_block(self.x, "x"))
        object.__setattr__(self, "y", as_block(self.y, "y"))
        object.__setattr__(self, "z", as_block(self.z, "z"))
        n = self.x.shape[0]
        if self.y.shape[0] != n or self.z.shape[0] != n:
            raise DimensionMismatch(
                "x, y, z must share the number of rows: "
                f"{self.x.shape[0]}, {self.y.shape[0]}, {self.z.shape[0]}"
            )
        for block in (self.x, self.y, self.z):
            block.setflags(write=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.y.shape[1]

    @property
    def r(self) -> int:
        return self.z.shape[1]
