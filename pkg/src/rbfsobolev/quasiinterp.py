"""Target functions ``f = phi * nu + p`` and the quasi-interpolant built from local reproductions.

Targets come from compactly supported cosine bumps ``g``.  For surface splines
``nu = (-Delta)^m g`` gives ``phi * nu = g`` exactly, and for integer-order
Matern kernels ``nu = kappa (1 - Delta)^tau g`` does the same.  Every other
kernel uses ``nu = g`` directly and evaluates ``phi * nu`` by quadrature.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DomainError, ParameterError, QuadratureError, SmoothnessError
from .geometry import Domain, PointSet, as_points
from .interpolate import expansion_values
from .kernels import MATERN, SURFACE_SPLINE, KernelSpec, kernel_properties, radial_function
from .polynomials import PolynomialBasis
from .polyrepro import ReproConfig, local_weights_batch
from .quadrature import QuadratureRule, box_rule, gauss_legendre_1d

MOMENT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Cosine bumps


@dataclass(frozen=True)
class CosineSeries:
    """``sum_k coef_k cos(k pi (t - c) / w)`` on ``|t - c| <= w``, zero outside."""

    center: float
    half_width: float
    coef: tuple
    power: int | None = None

    @classmethod
    def bump(cls, center: float, half_width: float, power: int) -> "CosineSeries":
        """``cos^p(pi (t - c) / (2 w))`` linearized into a cosine series (p even)."""
        p = power
        coef = [math.comb(p, p // 2) / 2**p]
        coef += [2 * math.comb(p, p // 2 - j) / 2**p for j in range(1, p // 2 + 1)]
        return cls(float(center), float(half_width), tuple(coef), p)

    def derivative(self, t, order: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = (t - self.center) / self.half_width
        if order == 0 and self.power is not None:
            # the un-linearized product form is cheaper and identical in value
            return np.where(np.abs(u) <= 1.0, np.cos(0.5 * math.pi * np.clip(u, -1, 1)) ** self.power, 0.0)
        out = np.zeros_like(t)
        for k, c in enumerate(self.coef):
            if order > 0 and k == 0:
                continue
            freq = k * math.pi / self.half_width
            out += c * freq**order * np.cos(k * math.pi * u + order * math.pi / 2)
        return np.where(np.abs(u) <= 1.0, out, 0.0)

    def __call__(self, t) -> np.ndarray:
        return self.derivative(t, 0)


@dataclass(frozen=True)
class CosineBump:
    """Tensor product of per-axis ``cos^p`` bumps, supported on ``prod [c_i - w_i, c_i + w_i]``."""

    center: tuple
    half_width: tuple
    power: int

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        w = tuple(float(v) for v in np.broadcast_to(np.atleast_1d(self.half_width), (len(c),)))
        if not all(x > 0 for x in w):
            raise ParameterError("bump half-widths must be positive")
        if int(self.power) != self.power or self.power < 2 or self.power % 2:
            raise ParameterError(f"bump power must be a positive even integer, got {self.power}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_width", w)
        object.__setattr__(self, "power", int(self.power))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.center) - np.array(self.half_width)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.center) + np.array(self.half_width)

    @cached_property
    def axes(self) -> tuple:
        return tuple(CosineSeries.bump(c, w, self.power) for c, w in zip(self.center, self.half_width))

    def derivative(self, points, alpha) -> np.ndarray:
        pts = as_points(points, self.dim)
        inside = np.all((pts >= self.lower) & (pts <= self.upper), axis=1)
        out = np.zeros(pts.shape[0])
        sub = pts[inside]
        vals = np.ones(sub.shape[0])
        for i, series in enumerate(self.axes):
            vals *= series.derivative(sub[:, i], alpha[i])
        out[inside] = vals
        return out

    def __call__(self, points) -> np.ndarray:
        return self.derivative(points, (0,) * self.dim)

    def neg_laplacian_power(self, points, j: int) -> np.ndarray:
        """``(-Delta)^j`` of the bump via the multinomial expansion over axes."""
        pts = as_points(points, self.dim)
        out = np.zeros(pts.shape[0])
        for alpha in _compositions(self.dim, j):
            mult = math.factorial(j) / math.prod(math.factorial(a) for a in alpha)
            out += mult * (-1) ** j * self.derivative(pts, tuple(2 * a for a in alpha))
        return out

    def to_dict(self) -> dict:
        return {"center": list(self.center), "half_width": list(self.half_width), "power": self.power}


def _compositions(d, total):
    if d == 1:
        return [(total,)]
    return [(first,) + rest for first in range(total, -1, -1) for rest in _compositions(d - 1, total - first)]


# ---------------------------------------------------------------------------
# Densities and targets


@dataclass
class SourceDensity:
    """Closed-form ``nu`` supported in a box, with its certified moment order."""

    evaluate: Callable
    lower: np.ndarray
    upper: np.ndarray
    moment_order: int = -1
    smooth_breaks: bool = False
    l2_norm: float = float("nan")

    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def rule(self, max_width: float | None = None, order: int = 12, breakpoints=None) -> QuadratureRule:
        width = max_width if max_width is not None else float(np.max(self.upper - self.lower)) / 8
        return box_rule(self.lower, self.upper, width, order, breakpoints)

    def moments(self, degree: int, basis: PolynomialBasis | None = None, quad=None) -> np.ndarray:
        """``int nu p_j`` for the monomials ``p_j`` of degree at most ``degree``."""
        quad = quad or self.rule()
        if basis is None:
            basis = PolynomialBasis(self.dim, degree, tuple((self.lower + self.upper) / 2),
                                    float(np.max(self.upper - self.lower)) / 2)
        return quad.weights * self(quad.nodes) @ basis.evaluate(quad.nodes)


def certify_moments(nu: SourceDensity, claimed: int, quad=None) -> int:
    """Largest ``M <= claimed`` whose moments vanish to ``MOMENT_TOL`` times ``||nu||_2``; -1 if none."""
    quad = quad or nu.rule()
    vals = nu(quad.nodes)
    nu.l2_norm = math.sqrt(quad.integrate(vals**2))
    if claimed < 0:
        return -1
    mom = nu.moments(claimed, quad=quad)
    basis_deg = np.array([sum(a) for a in PolynomialBasis(nu.dim, claimed, (0.0,) * nu.dim).exponents])
    for M in range(claimed, -1, -1):
        if np.all(np.abs(mom[basis_deg <= M]) <= MOMENT_TOL * nu.l2_norm):
            return M
    return -1


@dataclass(frozen=True)
class ConvolutionRule:
    """Polar rule around the evaluation point: Gauss-Legendre in the radius, trapezoid in angle."""

    radial_order: int = 24
    radial_panels: int = 2
    angular: int = 128

    def refined(self) -> "ConvolutionRule":
        return ConvolutionRule(self.radial_order, 2 * self.radial_panels, 2 * self.angular)


@dataclass
class TargetFunction:
    spec: KernelSpec
    density: SourceDensity
    path: str
    f_closed: Callable | None = None
    bump: CosineBump | None = None
    poly_basis: PolynomialBasis | None = None
    poly_coef: np.ndarray | None = None
    conv_rule: ConvolutionRule = field(default_factory=ConvolutionRule)

    def polynomial(self, points) -> np.ndarray:
        pts = as_points(points, self.spec.dim)
        if self.poly_basis is None or self.poly_coef is None or not len(self.poly_coef):
            return np.zeros(pts.shape[0])
        return self.poly_basis.evaluate(pts) @ self.poly_coef

    def f(self, points) -> np.ndarray:
        pts = as_points(points, self.spec.dim)
        if self.f_closed is not None:
            return self.f_closed(pts) + self.polynomial(pts)
        return convolve_many(self.spec, self.density, pts, self.conv_rule) + self.polynomial(pts)

    def __call__(self, points):
        return self.f(points)

    def nu(self, points) -> np.ndarray:
        return self.density(points)

    def default_rule(self, order: int = 12) -> QuadratureRule:
        return self.density.rule(order=order)

    def pairing_rule(self, centers, order: int = 12) -> QuadratureRule:
        """Rule on the support of nu with panel edges at the center coordinates (1-D), where ``I f`` has kinks."""
        centers = as_points(centers, self.spec.dim)
        width = float(np.max(self.density.upper - self.density.lower)) / 8
        if self.spec.dim == 1:
            return self.density.rule(width, order, [centers[:, 0]])
        return self.density.rule(width / 4, order)

    def native_norm_squared(self, quad=None) -> float:
        """``|f|^2`` in the native space, as ``int nu f``."""
        quad = quad or self.default_rule()
        return quad.integrate(self.nu(quad.nodes) * self.f(quad.nodes))

    def to_dict(self) -> dict:
        return {"kernel": self.spec.to_dict(), "bump": self.bump.to_dict() if self.bump else None,
                "path": self.path, "moment_order": self.density.moment_order}

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def required_bump_power(spec: KernelSpec) -> int:
    """Smallest even power making ``nu`` square integrable on the closed-form path."""
    order = 2 * spec.m if spec.family == SURFACE_SPLINE else 2 * int(round(spec.tau))
    return order + 2


def _has_closed_form(spec: KernelSpec) -> bool:
    if spec.family == SURFACE_SPLINE:
        return True
    return spec.family == MATERN and float(spec.tau).is_integer()


def make_target(spec: KernelSpec, bump: CosineBump, domain: Domain | None = None,
                path: str | None = None, conv_rule: ConvolutionRule | None = None) -> TargetFunction:
    """Target whose density is built from ``bump`` (see module docstring)."""
    if bump.dim != spec.dim:
        raise ParameterError(f"bump has dimension {bump.dim}, kernel has {spec.dim}")
    domain = domain or Domain.unit(spec.dim)
    if not domain.strictly_contains_box(bump.lower, bump.upper):
        raise DomainError("bump support must lie strictly inside the domain")
    if path is None:
        path = "closed-form" if _has_closed_form(spec) else "quadrature"
    conv_rule = conv_rule or ConvolutionRule()
    if path == "quadrature":
        nu = SourceDensity(bump, bump.lower, bump.upper)
        nu.moment_order = certify_moments(nu, -1)
        return TargetFunction(spec, nu, path, None, bump, conv_rule=conv_rule)
    if path != "closed-form":
        raise ParameterError(f"unknown target path {path!r}")
    if not _has_closed_form(spec):
        raise ParameterError(f"no closed-form density for {spec.to_text()}")
    need = required_bump_power(spec)
    if bump.power < need:
        raise SmoothnessError(f"bump power {bump.power} is too rough for {spec.to_text()}; need p >= {need}")
    if spec.family == SURFACE_SPLINE:
        m = spec.m

        def nu_eval(x):
            return bump.neg_laplacian_power(x, m)
        claimed = 2 * m - 1
    else:
        tau, d = int(round(spec.tau)), spec.dim
        kappa = 2.0 ** (1 - tau) / ((2 * math.pi) ** (d / 2) * math.gamma(tau))

        def nu_eval(x):
            return kappa * sum(math.comb(tau, j) * bump.neg_laplacian_power(x, j) for j in range(tau + 1))
        claimed = -1
    nu = SourceDensity(nu_eval, bump.lower, bump.upper)
    nu.moment_order = certify_moments(nu, claimed)
    return TargetFunction(spec, nu, path, bump, bump, conv_rule=conv_rule)


# ---------------------------------------------------------------------------
# Convolution by quadrature


def _radial_breaks(spec: KernelSpec, x: np.ndarray, nu: SourceDensity, rmax: float) -> np.ndarray:
    bps = list(np.abs(x - nu.lower)) + list(np.abs(x - nu.upper))
    if spec.dim > 1:
        corners = np.array(np.meshgrid(*zip(nu.lower, nu.upper), indexing="ij")).reshape(spec.dim, -1).T
        bps += list(np.linalg.norm(corners - x, axis=1))
    support = kernel_properties(spec).support_radius
    if np.isfinite(support):
        bps.append(support)
    bps = np.array(bps)
    return bps[(bps > 0) & (bps < rmax)]


def _radial_extent(spec: KernelSpec, x: np.ndarray, nu: SourceDensity) -> float:
    far = np.maximum(np.abs(x - nu.lower), np.abs(x - nu.upper))
    rmax = float(np.linalg.norm(far))
    return min(rmax, kernel_properties(spec).support_radius)


def _convolve_point(spec: KernelSpec, nu: SourceDensity, x: np.ndarray, rule: ConvolutionRule,
                    with_scale: bool = False):
    """Convolution value at x; with ``with_scale`` also ``int |nu phi|`` as a size reference."""
    rmax = _radial_extent(spec, x, nu)
    near = np.maximum(np.maximum(nu.lower - x, x - nu.upper), 0.0)
    rmin = float(np.linalg.norm(near))
    if rmax <= rmin:
        return (0.0, 0.0) if with_scale else 0.0
    edges = np.unique(np.concatenate([[rmin, rmax], _radial_breaks(spec, x, nu, rmax)]))
    edges = edges[edges >= rmin]
    edges = np.concatenate([np.linspace(a, b, rule.radial_panels + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])]
                           + [[rmax]])
    r, wr = gauss_legendre_1d(edges, rule.radial_order)
    prof = radial_function(spec, r)
    if spec.dim == 1:
        plus, minus = nu(x[0] + r), nu(x[0] - r)
        terms = wr * prof * (plus + minus)
        scale = wr * np.abs(prof) * (np.abs(plus) + np.abs(minus))
    else:
        if spec.dim != 2:
            raise ParameterError("convolution quadrature is implemented for d = 1 and d = 2")
        theta = 2 * math.pi * np.arange(rule.angular) / rule.angular
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        pts = x + r[:, None, None] * dirs[None, :, :]
        vals = nu(pts.reshape(-1, 2)).reshape(len(r), rule.angular) * (2 * math.pi / rule.angular)
        terms = wr * prof * r * vals.sum(axis=1)
        scale = wr * np.abs(prof) * r * np.abs(vals).sum(axis=1)
    if with_scale:
        return float(terms.sum()), float(scale.sum())
    return float(terms.sum())


def convolve_density(spec: KernelSpec, nu: SourceDensity, x, rule: ConvolutionRule | None = None,
                     rtol: float = 1e-6) -> float:
    """``int nu(z) phi(x - z) dz`` in polar coordinates about x, checked against a refined rule.

    The check compares the change under refinement with ``int |nu(z) phi(x - z)| dz``.
    """
    rule = rule or ConvolutionRule()
    x = as_points(x, spec.dim)[0]
    coarse = _convolve_point(spec, nu, x, rule)
    fine, scale = _convolve_point(spec, nu, x, rule.refined(), with_scale=True)
    if abs(fine - coarse) > rtol * scale:
        raise QuadratureError(f"convolution at {x.tolist()} changed by {abs(fine - coarse):.2e} under refinement")
    return fine


def convolve_many(spec: KernelSpec, nu: SourceDensity, points, rule: ConvolutionRule | None = None) -> np.ndarray:
    rule = rule or ConvolutionRule()
    pts = as_points(points, spec.dim)
    return np.array([_convolve_point(spec, nu, x, rule) for x in pts])


def spot_check(target: TargetFunction, points) -> float:
    """Max deviation of ``target.f`` from an independent convolution quadrature plus polynomial part."""
    pts = as_points(points, target.spec.dim)
    conv = np.array([convolve_density(target.spec, target.density, x) for x in pts])
    return float(np.abs(conv + target.polynomial(pts) - target.f(pts)).max())


# ---------------------------------------------------------------------------
# Quasi-interpolant


@dataclass
class QuasiCoefficients:
    A: np.ndarray
    quad: dict
    cfg: ReproConfig

    def moment_residual(self, ps: PointSet, degree: int, basis: PolynomialBasis | None = None) -> np.ndarray:
        basis = basis or PolynomialBasis.for_domain(ps.domain, degree)
        return self.A @ basis.evaluate(ps.points)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "A"])
            writer.writerows((i, repr(float(a))) for i, a in enumerate(self.A))


def quasi_rule(target: TargetFunction, ps: PointSet, cfg: ReproConfig, order: int = 12) -> QuadratureRule:
    """Panels of width at most ``K h / 2`` on the support of nu; in 1-D also split where stencils change."""
    bps = None
    if ps.dim == 1:
        xi = ps.points[:, 0]
        bps = [np.concatenate([xi - cfg.radius, xi + cfg.radius])]
    return target.density.rule(cfg.radius / 2, order, bps)


def quasi_coefficients(target: TargetFunction, ps: PointSet, cfg: ReproConfig,
                       quad: QuadratureRule | None = None) -> QuasiCoefficients:
    """``A_xi = int a(xi, z) nu(z) dz`` accumulated panel by panel."""
    quad = quad or quasi_rule(target, ps, cfg)
    nu_w = target.nu(quad.nodes) * quad.weights
    A = np.zeros(len(ps))
    live = np.nonzero(nu_w != 0)[0]
    chunk = 20000
    for start in range(0, len(live), chunk):
        sel = live[start:start + chunk]
        reps = local_weights_batch(ps, cfg, quad.nodes[sel])
        for k, rep in zip(sel, reps):
            A[rep.indices] += rep.weights * nu_w[k]
    return QuasiCoefficients(A, quad.describe(), cfg)


def evaluate_quasi_interpolant(spec: KernelSpec, coeffs, ps, points, poly=None) -> np.ndarray:
    """``sum_xi A_xi phi(x - xi) + p(x)``; ``poly`` is an optional ``(basis, coef)`` pair."""
    A = coeffs.A if isinstance(coeffs, QuasiCoefficients) else np.asarray(coeffs, dtype=float)
    centers = ps.points if isinstance(ps, PointSet) else as_points(ps, spec.dim)
    if poly is None:
        basis, b = PolynomialBasis(spec.dim, -1, (0.0,) * spec.dim), np.zeros(0)
    else:
        basis, b = poly
    return expansion_values(spec, centers, A, basis, b, points)
