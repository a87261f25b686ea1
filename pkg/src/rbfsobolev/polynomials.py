"""Shifted and scaled monomial bases ``((x - c) / scale)^alpha`` with ``|alpha| <= degree``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import as_points


def poly_dim(d: int, degree: int) -> int:
    return math.comb(d + degree, d) if degree >= 0 else 0


@lru_cache(maxsize=None)
def multi_indices(d: int, degree: int) -> tuple:
    """Exponent tuples ordered by total degree, then lexicographically (descending first axis)."""
    out = []
    for total in range(degree + 1):
        out.extend(_compositions(d, total))
    return tuple(out)


def _compositions(d, total):
    if d == 1:
        return [(total,)]
    res = []
    for first in range(total, -1, -1):
        res.extend((first,) + rest for rest in _compositions(d - 1, total - first))
    return res


@dataclass(frozen=True)
class PolynomialBasis:
    dim: int
    degree: int
    center: tuple
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.broadcast_to(self.center, (self.dim,))))
        if not self.scale > 0:
            raise ValueError("polynomial basis scale must be positive")

    @classmethod
    def for_domain(cls, domain, degree: int) -> "PolynomialBasis":
        return cls(domain.dim, degree, tuple(domain.center), domain.half_width)

    @property
    def size(self) -> int:
        return poly_dim(self.dim, self.degree)

    @property
    def exponents(self) -> np.ndarray:
        return np.array(multi_indices(self.dim, self.degree), dtype=int).reshape(-1, self.dim)

    def evaluate(self, points) -> np.ndarray:
        """Matrix with entry ``(i, j)`` equal to the j-th basis polynomial at point i."""
        pts = as_points(points, self.dim)
        if self.size == 0:
            return np.zeros((pts.shape[0], 0))
        y = (pts - np.array(self.center)) / self.scale
        exps = self.exponents
        powers = [np.vander(y[:, i], self.degree + 1, increasing=True) for i in range(self.dim)]
        out = np.ones((pts.shape[0], len(exps)))
        for i in range(self.dim):
            out *= powers[i][:, exps[:, i]]
        return out
