"""Local polynomial reproduction: weights ``a(xi, z)`` that are local, stable and exact on polynomials.

At each point z the weights over the stencil ``B(z, K h)`` are the minimum
Euclidean norm solution of ``sum_xi a(xi, z) p(xi) = p(z)`` for all polynomials
of degree at most L, computed through an SVD of the local Vandermonde matrix
in a basis centered at z and scaled by ``K h``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ParameterError, StencilError
from .geometry import PointSet, as_points
from .polynomials import PolynomialBasis, poly_dim

REPRODUCTION_TOL = 1e-9
DEFAULT_K_CANDIDATES = (2, 3, 4, 6)
# closed-ball membership slack, relative to the radius, so grid points at exactly K h are kept
BALL_SLACK = 1e-12


@dataclass(frozen=True)
class ReproConfig:
    degree: int
    K: float
    h: float
    floor: float = 1e-13
    cond_limit: float = 1e8

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 0:
            raise ParameterError(f"reproduction degree must be a nonnegative integer, got {self.degree}")
        if not (self.K > 0 and self.h > 0):
            raise ParameterError("K and h must be positive")

    @property
    def radius(self) -> float:
        return self.K * self.h


@dataclass
class LocalReproduction:
    z: np.ndarray
    indices: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    radius: float
    condition: float = 1.0

    @property
    def abs_sum(self) -> float:
        return float(np.abs(self.weights).sum())


def _local_basis(z, radius, degree) -> PolynomialBasis:
    return PolynomialBasis(len(z), degree, tuple(z), radius)


def _solve_batch(V: np.ndarray, e: np.ndarray, floor: float):
    """Minimum-norm ``a`` with ``V^T a = e`` for a stack of Vandermonde matrices ``V`` (B, n, N)."""
    U, S, Wt = np.linalg.svd(V, full_matrices=False)
    smax, smin = S[:, 0], S[:, -1]
    rank_ok = smin > floor * smax
    cond = np.where(rank_ok, smax / np.where(rank_ok, smin, 1.0), np.inf)
    # V = U S Wt  =>  a = U S^-1 Wt e
    coef = np.einsum("bij,bj->bi", Wt, e) / np.where(rank_ok[:, None], S, 1.0)
    return np.einsum("bni,bi->bn", U, coef), cond, rank_ok


def local_weights_batch(ps: PointSet, cfg: ReproConfig, zs) -> list[LocalReproduction]:
    """Weights at many points; stencils of equal size are solved as one batch."""
    zs = as_points(zs, ps.dim)
    radius = cfg.radius
    stencils = ps.balls(zs, radius * (1 + BALL_SLACK))
    N = poly_dim(ps.dim, cfg.degree)
    out: list = [None] * len(zs)
    by_size: dict[int, list[int]] = {}
    for i, ix in enumerate(stencils):
        if len(ix) < N:
            raise StencilError(
                f"stencil at z={zs[i].tolist()} has {len(ix)} centers, fewer than the {N} needed "
                f"for degree {cfg.degree}; increase K (now {cfg.K})")
        by_size.setdefault(len(ix), []).append(i)
    template = _local_basis(np.zeros(ps.dim), radius, cfg.degree)
    e = template.evaluate(np.zeros((1, ps.dim)))[0]
    for size, members in by_size.items():
        members = np.array(members)
        idx = np.stack([stencils[i] for i in members])
        offsets = ps.points[idx] - zs[members][:, None, :]
        V = template.evaluate(offsets.reshape(-1, ps.dim)).reshape(len(members), size, N)
        W, cond, ok = _solve_batch(V, np.broadcast_to(e, (len(members), N)), cfg.floor)
        bad = ~ok | (cond > cfg.cond_limit)
        if np.any(bad):
            i = members[np.argmax(bad)]
            raise StencilError(
                f"stencil at z={zs[i].tolist()} is not unisolvent for degree {cfg.degree} "
                f"(condition {cond[np.argmax(bad)]:.2e}); increase K (now {cfg.K})")
        resid = np.abs(np.einsum("bn,bnj->bj", W, V) - e).max(axis=1)
        if np.any(resid > REPRODUCTION_TOL):
            raise ConditioningError(f"reproduction residual {resid.max():.2e} exceeds {REPRODUCTION_TOL:g}")
        for j, i in enumerate(members):
            out[i] = LocalReproduction(zs[i].copy(), idx[j], ps.points[idx[j]], W[j], radius, float(cond[j]))
    return out


def build_local_weights(ps: PointSet, cfg: ReproConfig, z) -> LocalReproduction:
    return local_weights_batch(ps, cfg, as_points(z, ps.dim)[:1])[0]


def check_reproduction(rep: LocalReproduction, L: int) -> float:
    """Max over the local monomial basis of ``|sum a p(xi) - p(z)|``."""
    basis = _local_basis(rep.z, rep.radius, L)
    V = basis.evaluate(rep.points)
    e = basis.evaluate(rep.z[None, :])[0]
    return float(np.abs(rep.weights @ V - e).max())


def stability_constant(ps: PointSet, cfg: ReproConfig, probe) -> float:
    """Empirical stability constant: max over probes of ``sum |a(xi, z)|``."""
    return max(rep.abs_sum for rep in local_weights_batch(ps, cfg, probe))


def choose_K(ps: PointSet, degree: int, probe, h: float | None = None,
             candidates=DEFAULT_K_CANDIDATES) -> float:
    """Smallest candidate K whose stencils are all unisolvent with Vandermonde condition below 1e8."""
    h = ps.h if h is None else h
    for K in candidates:
        try:
            local_weights_batch(ps, ReproConfig(degree, K, h), probe)
        except (StencilError, ConditioningError):
            continue
        return float(K)
    raise StencilError(f"no K in {tuple(candidates)} gives unisolvent stencils for degree {degree}")


def default_degree(homogeneity: float, d: int) -> int:
    return int(np.ceil(homogeneity)) + d + 1


def stability_sweep(ps: PointSet, cfg: ReproConfig, probe) -> list[dict]:
    rows = []
    for rep in local_weights_batch(ps, cfg, probe):
        row = {f"z{i}": float(v) for i, v in enumerate(rep.z)}
        row.update(stencil=len(rep.indices), abs_sum=rep.abs_sum,
                   residual=check_reproduction(rep, cfg.degree))
        rows.append(row)
    return rows


def write_sweep_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
