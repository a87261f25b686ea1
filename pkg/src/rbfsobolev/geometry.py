"""Point sets in axis-aligned boxes and their quality measures (q, h, rho)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import BudgetError, DomainError, GeometryError, ParameterError

MAX_POINTS = 5000
MAX_PROBE_NODES = 2_000_000


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``prod [lower_i, upper_i]``."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or not lo:
            raise ParameterError("domain corners must have the same positive dimension")
        if not all(b > a for a, b in zip(lo, hi)):
            raise ParameterError(f"domain box has empty interior: {lo} .. {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, d: int) -> "Domain":
        return cls((0.0,) * d, (1.0,) * d)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def sides(self) -> np.ndarray:
        return np.array(self.upper) - np.array(self.lower)

    @property
    def center(self) -> np.ndarray:
        return (np.array(self.upper) + np.array(self.lower)) / 2

    @property
    def half_width(self) -> float:
        return float(self.sides.max() / 2)

    def shrink(self, margin: float) -> "Domain":
        return Domain(tuple(a + margin for a in self.lower), tuple(b - margin for b in self.upper))

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.all((pts >= np.array(self.lower) - tol) & (pts <= np.array(self.upper) + tol), axis=1)

    def strictly_contains_box(self, lower, upper) -> bool:
        return bool(np.all(np.array(lower) > np.array(self.lower)) and np.all(np.array(upper) < np.array(self.upper)))


def as_points(points, d: int | None = None) -> np.ndarray:
    """Coerce to an ``(n, d)`` float array; a flat array is a list of 1-D points unless it has length d."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        return pts.reshape(1, 1)
    if pts.ndim == 1:
        if d is not None and d > 1 and pts.shape[0] == d:
            return pts[None, :]
        return pts[:, None]
    return pts


def grid_axes(domain: Domain, nodes_per_axis) -> list[np.ndarray]:
    counts = np.broadcast_to(np.asarray(nodes_per_axis), (domain.dim,))
    return [np.linspace(a, b, int(n)) for a, b, n in zip(domain.lower, domain.upper, counts)]


def tensor_grid(axes) -> np.ndarray:
    """Points of a tensor grid in lexicographic order (last axis fastest)."""
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


class PointSet:
    """A finite set of distinct centers inside a box, with cached q, h and rho.

    ``probe_level`` sets the probe grid used for the fill distance: spacing
    ``2^-probe_level`` times the box side.  When omitted it is chosen so that the
    probe spacing is at most a quarter of the separation radius.
    """

    def __init__(self, points, domain: Domain | None = None, probe_level: int | None = None):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise GeometryError("a point set needs at least one point")
        if domain is None:
            domain = Domain.unit(pts.shape[1])
        if domain.dim != pts.shape[1]:
            raise GeometryError(f"points have dimension {pts.shape[1]}, domain has {domain.dim}")
        if not np.all(np.isfinite(pts)):
            raise GeometryError("point coordinates must be finite")
        if not np.all(domain.contains(pts, tol=1e-12 * domain.half_width)):
            raise GeometryError("all points must lie inside the domain")
        pts.setflags(write=False)
        self.points = pts
        self.domain = domain
        self._probe_level = probe_level
        self._tree = cKDTree(pts)
        if len(pts) > 1 and self.q == 0:
            raise GeometryError("point set contains repeated points")

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @cached_property
    def q(self) -> float:
        return separation_radius(self)

    @property
    def probe_level(self) -> int:
        if self._probe_level is not None:
            return self._probe_level
        ref = self.q if len(self) > 1 else self.domain.half_width
        side = float(self.domain.sides.max())
        return max(2, math.ceil(math.log2(4 * side / ref)))

    @cached_property
    def h(self) -> float:
        return fill_distance(self, self.probe_level)

    @property
    def rho(self) -> float:
        return mesh_ratio(self)

    def nearest(self, x, k: int = 1):
        return self._tree.query(np.atleast_2d(x), k=k)

    def ball(self, z, radius: float) -> np.ndarray:
        """Indices of centers in the closed ball, sorted ascending."""
        return np.array(sorted(self._tree.query_ball_point(np.asarray(z, dtype=float), radius)), dtype=int)

    def balls(self, zs, radius: float) -> list:
        return [np.array(sorted(ix), dtype=int) for ix in self._tree.query_ball_point(np.atleast_2d(zs), radius)]


def generate_point_set(domain: Domain, level: int, jitter: float = 0.0, seed: int = 0,
                       max_points: int = MAX_POINTS, probe_level: int | None = None) -> PointSet:
    """Tensor grid with ``2^level`` cells per axis, interior coordinates jittered.

    Each coordinate that is not on the box boundary moves by
    ``jitter * spacing * u`` with ``u`` uniform on ``[-1, 1]``; boundary
    coordinates stay put, so boundary nodes slide along their faces only.
    """
    if level < 0 or int(level) != level:
        raise ParameterError(f"level must be a nonnegative integer, got {level!r}")
    if not 0.0 <= jitter < 0.5:
        raise ParameterError(f"jitter must lie in [0, 0.5), got {jitter}")
    per_axis = 2**level + 1
    count = per_axis**domain.dim
    if count > max_points:
        raise BudgetError(f"level {level} in d={domain.dim} gives {count} points, budget is {max_points}")
    axes = grid_axes(domain, per_axis)
    pts = tensor_grid(axes)
    if jitter > 0:
        rng = np.random.default_rng(seed)
        spacing = domain.sides / 2**level
        u = rng.uniform(-1.0, 1.0, size=pts.shape)
        idx = tensor_grid([np.arange(per_axis)] * domain.dim)
        interior = (idx > 0) & (idx < per_axis - 1)
        pts = pts + np.where(interior, jitter * spacing * u, 0.0)
    if probe_level is None:
        probe_level = level + 3
    return PointSet(pts, domain, probe_level=probe_level)


def separation_radius(ps: PointSet) -> float:
    """Half the minimum pairwise distance."""
    if len(ps) < 2:
        raise DomainError("separation radius needs at least two points")
    dist, _ = ps._tree.query(ps.points, k=2)
    return float(dist[:, 1].min() / 2)


def probe_points(domain: Domain, probe_level: int) -> np.ndarray:
    per_axis = 2**probe_level + 1
    if per_axis**domain.dim > MAX_PROBE_NODES:
        raise BudgetError(f"probe level {probe_level} exceeds the {MAX_PROBE_NODES}-node grid budget")
    return tensor_grid(grid_axes(domain, per_axis))


def fill_distance(ps: PointSet, probe_level: int | None = None) -> float:
    """Max distance from a probe grid to the nearest center.

    This under-estimates the true supremum by at most ``spacing * sqrt(d) / 2``.
    """
    if probe_level is None:
        probe_level = ps.probe_level
    probes = probe_points(ps.domain, probe_level)
    best = 0.0
    for start in range(0, len(probes), 200_000):
        dist, _ = ps._tree.query(probes[start:start + 200_000])
        best = max(best, float(dist.max()))
    return best


def probe_tolerance(ps: PointSet, probe_level: int | None = None) -> float:
    if probe_level is None:
        probe_level = ps.probe_level
    return float(ps.domain.sides.max()) * 2.0**-probe_level * math.sqrt(ps.dim) / 2


def mesh_ratio(ps: PointSet) -> float:
    return ps.h / ps.q


def save_point_set(ps: PointSet, path) -> None:
    path = Path(path)
    lines = [f"# d={ps.dim} n={len(ps)}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in ps.points]
    path.write_text("\n".join(lines) + "\n")


def load_point_set(path, domain: Domain | None = None) -> PointSet:
    path = Path(path)
    text = path.read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise GeometryError(f"{path}: missing '# d=<d> n=<n>' header")
    header = dict(item.split("=") for item in text[0][1:].split())
    d, n = int(header["d"]), int(header["n"])
    rows = [line.split() for line in text[1:] if line.strip()]
    pts = np.array(rows, dtype=float).reshape(-1, d)
    if len(pts) != n:
        raise GeometryError(f"{path}: header says n={n} but found {len(pts)} points")
    return PointSet(pts, domain or Domain.unit(d))
