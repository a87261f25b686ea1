"""Sobolev norms of gridded functions and log-log rate fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import InsufficientDataError, ParameterError, ResolutionError
from .geometry import Domain, grid_axes, tensor_grid

MIN_NODES = 9


@dataclass
class GridFunction:
    """Values on a tensor grid over ``domain``; ``values`` has shape ``counts``."""

    domain: Domain
    counts: tuple
    values: np.ndarray

    def __post_init__(self):
        self.counts = tuple(int(c) for c in np.broadcast_to(np.atleast_1d(self.counts), (self.domain.dim,)))
        if min(self.counts) < MIN_NODES:
            raise ResolutionError(f"grid needs at least {MIN_NODES} nodes per axis, got {self.counts}")
        self.values = np.asarray(self.values, dtype=float).reshape(self.counts)

    @classmethod
    def sample(cls, fn, domain: Domain, counts) -> "GridFunction":
        pts = grid_points(domain, counts)
        counts = tuple(np.broadcast_to(np.atleast_1d(counts), (domain.dim,)))
        return cls(domain, counts, fn(pts))

    @property
    def spacing(self) -> np.ndarray:
        return self.domain.sides / (np.array(self.counts) - 1)

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.domain, self.counts, c * self.values)


def grid_points(domain: Domain, counts) -> np.ndarray:
    return tensor_grid(grid_axes(domain, counts))


def fd_weights(z: float, x, m: int) -> np.ndarray:
    """Fornberg weights for derivatives 0..m at ``z`` from nodes ``x``; row k gives the k-th derivative."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


@lru_cache(maxsize=None)
def _derivative_matrix_rows(n: int, k: int) -> tuple:
    """Integer-offset stencils (start, weights) for the k-th derivative at each of n unit-spaced nodes."""
    half = (k + 3) // 2
    width = 2 * half + 1
    one_sided = k + 4
    rows = []
    for i in range(n):
        if half <= i < n - half:
            start, size = i - half, width
        elif i < half:
            start, size = 0, one_sided
        else:
            start, size = n - one_sided, one_sided
        w = fd_weights(float(i), np.arange(start, start + size, dtype=float), k)[k]
        rows.append((start, w))
    return tuple(rows)


def derivative_along(values: np.ndarray, axis: int, k: int, spacing: float) -> np.ndarray:
    """k-th derivative along one axis with fourth-order finite differences."""
    if k == 0:
        return values
    n = values.shape[axis]
    if n < 2 * k + 5:
        raise ResolutionError(f"{n} nodes along axis {axis} are too few for order {k}; need {2 * k + 5}")
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    rows = _derivative_matrix_rows(n, k)
    half = (k + 3) // 2
    # interior: one vectorized central stencil
    cw = rows[half][1]
    interior = sum(cw[j] * v[j:n - 2 * half + j] for j in range(2 * half + 1))
    out[half:n - half] = interior
    for i in list(range(half)) + list(range(n - half, n)):
        start, w = rows[i]
        out[i] = np.tensordot(w, v[start:start + len(w)], axes=(0, 0))
    return np.moveaxis(out, 0, axis) / spacing**k


def trapezoid_integral(values: np.ndarray, spacing) -> float:
    out = values
    for axis in range(values.ndim - 1, -1, -1):
        out = np.trapezoid(out, dx=float(spacing[axis]), axis=axis)
    return float(out)


def _multi_indices(d: int, k: int):
    return [a for a in product(range(k + 1), repeat=d) if sum(a) == k]


def sobolev_seminorm_grid(gf: GridFunction, k: int) -> float:
    """``(sum_{|alpha|=k} k!/alpha! ||D^alpha u||^2)^{1/2}`` with FD derivatives and trapezoid integrals."""
    if k < 0 or int(k) != k:
        raise ParameterError(f"seminorm order must be a nonnegative integer, got {k}")
    need = 2 * k + 5
    if min(gf.counts) < need:
        raise ResolutionError(f"grid {gf.counts} is too coarse for order {k}; need {need} nodes per axis")
    total = 0.0
    for alpha in _multi_indices(gf.domain.dim, k):
        deriv = gf.values
        for axis, order in enumerate(alpha):
            deriv = derivative_along(deriv, axis, order, gf.spacing[axis])
        weight = math.factorial(k) / math.prod(math.factorial(a) for a in alpha)
        total += weight * trapezoid_integral(deriv**2, gf.spacing)
    return math.sqrt(total)


def sobolev_norm_grid(gf: GridFunction, sigma: float) -> float:
    """Integer sigma: full norm.  Fractional sigma: ``||u||_floor^(1-theta) ||u||_ceil^theta``."""
    if sigma < 0:
        raise ParameterError("sigma must be nonnegative")
    lo = math.floor(sigma)
    hi = math.ceil(sigma)
    semis = [sobolev_seminorm_grid(gf, j) for j in range(hi + 1)]
    norm_lo = math.sqrt(sum(s * s for s in semis[:lo + 1]))
    if hi == lo:
        return norm_lo
    theta = sigma - lo
    norm_hi = math.sqrt(sum(s * s for s in semis))
    return norm_lo ** (1 - theta) * norm_hi**theta


def sobolev_norms_grid(gf: GridFunction, sigmas) -> dict:
    """Norms for several orders sharing the seminorm computations."""
    top = math.ceil(max(sigmas)) if len(sigmas) else 0
    semis = [sobolev_seminorm_grid(gf, j) for j in range(top + 1)]
    out = {}
    for sigma in sigmas:
        lo, hi = math.floor(sigma), math.ceil(sigma)
        norm_lo = math.sqrt(sum(s * s for s in semis[:lo + 1]))
        norm_hi = math.sqrt(sum(s * s for s in semis[:hi + 1]))
        theta = sigma - lo
        out[sigma] = norm_lo if hi == lo else norm_lo ** (1 - theta) * norm_hi**theta
    return out


@dataclass
class RateFit:
    h: list
    e: list
    slope: float
    intercept: float
    residual: float
    levels: list
    excluded: list = field(default_factory=list)
    variable: str = "h"

    def to_dict(self) -> dict:
        return {"h": self.h, "e": self.e, "slope": self.slope, "intercept": self.intercept,
                "residual": self.residual, "levels": self.levels, "excluded": self.excluded,
                "variable": self.variable}

    def predict(self, h) -> np.ndarray:
        return np.exp(self.intercept) * np.asarray(h, dtype=float) ** self.slope


def fit_convergence_rate(pairs, levels=None, variable: str = "h") -> RateFit:
    """Least-squares slope of ``log e`` against ``log h``; nonpositive or missing errors are excluded."""
    pairs = list(pairs)
    levels = list(levels) if levels is not None else list(range(len(pairs)))
    used, excluded = [], []
    for lev, (h, e) in zip(levels, pairs):
        if e is None or not np.isfinite(e) or e <= 0 or not h > 0:
            excluded.append(lev)
        else:
            used.append((lev, float(h), float(e)))
    if len(used) < 3:
        raise InsufficientDataError(f"need at least 3 usable (h, e) pairs, got {len(used)}")
    lx = np.log([u[1] for u in used])
    ly = np.log([u[2] for u in used])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return RateFit([u[1] for u in used], [u[2] for u in used], float(slope), float(intercept), resid,
                   [u[0] for u in used], excluded, variable)
