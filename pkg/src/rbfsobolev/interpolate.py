"""Kernel interpolation through the saddle-point system ``[[Phi, P], [P^T, 0]]``.

Also home to the quantities derived from that system: the native seminorm of an
interpolant, the power function, the minimum eigenvalue of ``Phi`` on the
polynomial-annihilating subspace, and the ratio of L2 to native error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, null_space

from .errors import (ConditioningError, DomainError, NumericalPDError, QuadratureError,
                     UnisolvencyError)
from .geometry import Domain, PointSet, as_points
from .kernels import KernelSpec, kernel_at_zero, kernel_matrix, kernel_properties, kernel_spec_from_dict
from .polynomials import PolynomialBasis

RESIDUAL_TOL = 1e-8
PD_CLAMP = 1e-10
EVAL_CHUNK = 8192


@dataclass
class SaddleSystem:
    spec: KernelSpec
    centers: np.ndarray
    basis: PolynomialBasis
    Phi: np.ndarray
    P: np.ndarray
    _factor: tuple | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.Phi.shape[0]

    @property
    def N(self) -> int:
        return self.P.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        n, N = self.n, self.N
        A = np.zeros((n + N, n + N))
        A[:n, :n] = self.Phi
        A[:n, n:] = self.P
        A[n:, :n] = self.P.T
        return A

    def factor(self):
        """Bunch-Kaufman factorization plus a 1-norm reciprocal condition estimate (cached)."""
        if self._factor is None:
            A = self.matrix
            lu, ipiv, info = lapack.dsytrf(A, lower=0)
            if info != 0:
                raise ConditioningError(f"symmetric-indefinite factorization broke down (info={info})")
            anorm = np.abs(A).sum(axis=0).max()
            rcond, info = lapack.dsycon(lu, ipiv, anorm, lower=0)
            cond = 1.0 / rcond if rcond > 0 else np.inf
            self._factor = (lu, ipiv, cond, A)
        return self._factor

    @property
    def condition_estimate(self) -> float:
        return self.factor()[2]

    def solve(self, rhs: np.ndarray) -> tuple[np.ndarray, float]:
        """Solve ``A sol = rhs`` for one or many right-hand sides; returns (sol, scaled residual)."""
        lu, ipiv, cond, A = self.factor()
        sol, info = lapack.dsytrs(lu, ipiv, rhs, lower=0)
        if info != 0:
            raise ConditioningError(f"triangular solve failed (info={info})", cond)
        res = np.abs(A @ sol - rhs).max(axis=0)
        scale = np.abs(rhs).max(axis=0)
        scaled = np.where(scale > 0, res / np.where(scale > 0, scale, 1.0), res)
        worst = float(np.max(scaled)) if np.size(scaled) else 0.0
        if not worst <= RESIDUAL_TOL:
            raise ConditioningError(
                f"saddle solve residual {worst:.3e} exceeds {RESIDUAL_TOL:g} "
                f"(condition estimate {cond:.3e})", cond)
        return sol, worst


def _centers(ps) -> tuple[np.ndarray, object]:
    if isinstance(ps, PointSet):
        return ps.points, ps.domain
    pts = as_points(ps)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    PointSet(pts, Domain(lo, np.where(hi > lo, hi, lo + 1.0)))  # finite, distinct
    return pts, None


def polynomial_basis(spec: KernelSpec, domain, pts: np.ndarray) -> PolynomialBasis:
    """Monomials of degree below the CPD order, centered and scaled to the domain (or the points' bounding box)."""
    degree = kernel_properties(spec).cpd_order - 1
    if domain is not None:
        return PolynomialBasis.for_domain(domain, degree)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    half = float((hi - lo).max() / 2)
    return PolynomialBasis(spec.dim, degree, tuple((lo + hi) / 2), half if half > 0 else 1.0)


def assemble_system(spec: KernelSpec, ps) -> SaddleSystem:
    """Dense collocation matrix and polynomial block for centers ``ps``."""
    pts, domain = _centers(ps)
    if pts.shape[1] != spec.dim:
        raise DomainError(f"centers have dimension {pts.shape[1]}, kernel has {spec.dim}")
    basis = polynomial_basis(spec, domain, pts)
    P = basis.evaluate(pts)
    if basis.size:
        rank = np.linalg.matrix_rank(P, tol=1e-10 * max(1.0, np.abs(P).max()) * P.shape[0])
        if rank < basis.size:
            raise UnisolvencyError(
                f"centers are not unisolvent for polynomials of degree {basis.degree} "
                f"(rank {rank} < {basis.size})")
    Phi = kernel_matrix(spec, pts, pts)
    return SaddleSystem(spec, pts, basis, Phi, P)


@dataclass
class Interpolant:
    spec: KernelSpec
    centers: np.ndarray
    a: np.ndarray
    b: np.ndarray
    basis: PolynomialBasis
    residual: float = 0.0
    condition_estimate: float = float("nan")
    system: SaddleSystem | None = field(default=None, repr=False)

    def __call__(self, points) -> np.ndarray:
        return evaluate_interpolant(self, points)

    def to_dict(self) -> dict:
        return {
            "kernel": self.spec.to_dict(),
            "centers": self.centers.tolist(),
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "basis": {"degree": self.basis.degree, "center": list(self.basis.center), "scale": self.basis.scale},
            "residual": self.residual,
            "condition_estimate": self.condition_estimate,
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_text(cls, text: str) -> "Interpolant":
        data = json.loads(text)
        spec = kernel_spec_from_dict(data["kernel"])
        centers = np.array(data["centers"], dtype=float).reshape(-1, spec.dim)
        bas = data["basis"]
        basis = PolynomialBasis(spec.dim, bas["degree"], tuple(bas["center"]), bas["scale"])
        return cls(spec, centers, np.array(data["a"], dtype=float), np.array(data["b"], dtype=float),
                   basis, data["residual"], data["condition_estimate"])


def solve_interpolant(sys: SaddleSystem, values) -> Interpolant:
    values = np.asarray(values, dtype=float).ravel()
    if values.shape[0] != sys.n:
        raise DomainError(f"expected {sys.n} data values, got {values.shape[0]}")
    rhs = np.concatenate([values, np.zeros(sys.N)])
    sol, res = sys.solve(rhs)
    return Interpolant(sys.spec, sys.centers, sol[:sys.n].copy(), sol[sys.n:].copy(), sys.basis,
                       res, sys.condition_estimate, sys)


def interpolate(spec: KernelSpec, ps, values) -> Interpolant:
    return solve_interpolant(assemble_system(spec, ps), values)


def compensated_rowsum(terms: np.ndarray) -> np.ndarray:
    """Neumaier summation along axis 1, vectorized over rows."""
    total = np.zeros(terms.shape[0])
    comp = np.zeros(terms.shape[0])
    for j in range(terms.shape[1]):
        x = terms[:, j]
        t = total + x
        big = np.abs(total) >= np.abs(x)
        comp += np.where(big, (total - t) + x, (x - t) + total)
        total = t
    return total + comp


def expansion_values(spec: KernelSpec, centers, coeffs, basis: PolynomialBasis, b, points) -> np.ndarray:
    """``sum_j coeffs_j phi(x - c_j) + sum_k b_k p_k(x)`` with compensated summation."""
    pts = as_points(points, spec.dim)
    coeffs = np.asarray(coeffs, dtype=float)
    out = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], EVAL_CHUNK):
        chunk = pts[start:start + EVAL_CHUNK]
        terms = kernel_matrix(spec, chunk, centers) * coeffs
        if len(b):
            terms = np.concatenate([terms, basis.evaluate(chunk) * b], axis=1)
        out[start:start + EVAL_CHUNK] = compensated_rowsum(terms)
    return out


def evaluate_interpolant(interp: Interpolant, points) -> np.ndarray:
    return expansion_values(interp.spec, interp.centers, interp.a, interp.basis, interp.b, points)


def native_seminorm_discrete(interp: Interpolant) -> float:
    """``sqrt(a^T Phi a)`` for the kernel part of an interpolant."""
    Phi = interp.system.Phi if interp.system is not None else kernel_matrix(interp.spec, interp.centers, interp.centers)
    val = float(np.dot(interp.a, Phi @ interp.a))
    if val < -PD_CLAMP:
        raise NumericalPDError(f"quadratic form a^T Phi a = {val:.3e} is negative")
    return float(np.sqrt(max(val, 0.0)))


def power_function_values(spec: KernelSpec, ps, x, system: SaddleSystem | None = None) -> np.ndarray:
    """Power function at each row of ``x``.

    For each x the saddle system is solved with data ``(phi(x - xi))_xi`` and
    polynomial constraints ``p(x)``; the squared value is
    ``phi(0) - 2 u^T b + u^T Phi u``.
    """
    if system is None:
        system = assemble_system(spec, ps)
    x = as_points(x, spec.dim)
    B = kernel_matrix(spec, system.centers, x)
    rhs = np.vstack([B, system.basis.evaluate(x).T])
    sol, _ = system.solve(rhs)
    U = sol[:system.n]
    quad = kernel_at_zero(spec) - 2 * np.sum(U * B, axis=0) + np.sum(U * (system.Phi @ U), axis=0)
    floor = PD_CLAMP * max(1.0, abs(kernel_at_zero(spec)))
    if np.any(quad < -floor):
        raise NumericalPDError(f"power function square {quad.min():.3e} is negative beyond round-off")
    return np.sqrt(np.maximum(quad, 0.0))


def power_function(spec: KernelSpec, ps, x) -> float:
    return float(power_function_values(spec, ps, as_points(x, spec.dim))[0])


def constrained_min_eigenvalue(sys: SaddleSystem) -> float:
    """``min a^T Phi a`` over unit vectors with ``P^T a = 0``."""
    if sys.N == 0:
        return float(np.linalg.eigvalsh(sys.Phi)[0])
    if sys.n <= sys.N:
        raise DomainError(f"{sys.n} centers leave no directions annihilating {sys.N} polynomials")
    Z = null_space(sys.P.T)
    return float(np.linalg.eigvalsh(Z.T @ sys.Phi @ Z)[0])


def residual_pairing(target, interp: Interpolant, quad) -> float:
    """``int nu (f - I f)``, which equals the squared native error when nu annihilates the polynomial part."""
    z = quad.nodes
    diff = target.f(z) - evaluate_interpolant(interp, z)
    return float(np.dot(quad.weights, target.nu(z) * diff))


def target_error_native_seminorm(target, interp: Interpolant, quad) -> float:
    """Native error of an interpolant by orthogonality: ``sqrt(|f|^2 - |I f|^2)``."""
    full = target.native_norm_squared(quad)
    discrete = native_seminorm_discrete(interp) ** 2
    diff = full - discrete
    if diff < -1e-6 * abs(full):
        raise QuadratureError(
            f"|f|^2 = {full:.6e} is smaller than |I f|^2 = {discrete:.6e}; "
            f"quadrature (order {quad.order}, {quad.panels} panels) is too coarse")
    return float(np.sqrt(max(diff, 0.0)))


def e_ratio(target, interp: Interpolant, l2_error: float, quad=None, floor: float = 1e-12):
    """``||f - I f||_L2 / |f - I f|_native``; ``None`` when the denominator is below ``floor``.

    The denominator uses the residual pairing, which stays accurate when the
    native error is many orders smaller than ``|f|``.
    """
    if quad is None:
        quad = target.pairing_rule(interp.centers)
    sq = residual_pairing(target, interp, quad)
    if sq < 0 and sq < -1e-6 * target.native_norm_squared(quad):
        raise QuadratureError(f"residual pairing {sq:.3e} is negative")
    denom = float(np.sqrt(max(sq, 0.0)))
    if denom < floor:
        return None
    return float(l2_error) / denom
