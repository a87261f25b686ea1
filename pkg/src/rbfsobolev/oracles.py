"""Independent reference computations used to freeze the numeric constants in the tests.

Each oracle avoids the code path it checks: Beta functions instead of the
expanded Wendland polynomial, the Bessel integral representation instead of
closed forms, a tridiagonal natural spline instead of the kernel solve, and
analytic integrals instead of grid norms.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special
from scipy.linalg import solve_banded


def wendland_at_zero(k: int, ell: int) -> float:
    """``2^{1-k}/Gamma(k) int_0^1 t^{2k-1} (1-t)^ell dt`` via the Beta function."""
    return float(2.0 ** (1 - k) / math.gamma(k) * special.beta(2 * k, ell + 1))


def bessel_k_integral(nu: float, r: float) -> float:
    """``K_nu(r) = int_0^inf exp(-r cosh t) cosh(nu t) dt``."""
    # beyond r cosh t = 745 the integrand underflows
    top = math.acosh(max(2.0, 745.0 / r))
    val, _ = integrate.quad(lambda t: math.exp(-r * math.cosh(t)) * math.cosh(nu * t), 0, top,
                            epsabs=0, epsrel=1e-13, limit=200)
    return val


def matern_product_integral(nu: float, r: float) -> float:
    return r**nu * bessel_k_integral(nu, r)


def natural_cubic_spline(x, y):
    """Natural cubic spline through ``(x, y)`` (x increasing); returns a vectorized evaluator."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    dx = np.diff(x)
    # second derivatives M with M_0 = M_{n-1} = 0
    ab = np.zeros((3, n))
    rhs = np.zeros(n)
    ab[1, 0] = ab[1, -1] = 1.0
    ab[1, 1:-1] = (dx[:-1] + dx[1:]) / 3
    ab[0, 2:] = dx[1:] / 6
    ab[2, :-2] = dx[:-1] / 6
    rhs[1:-1] = (y[2:] - y[1:-1]) / dx[1:] - (y[1:-1] - y[:-2]) / dx[:-1]
    M = solve_banded((1, 1), ab, rhs)

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(x, t) - 1, 0, n - 2)
        hi = dx[i]
        a, b = (x[i + 1] - t) / hi, (t - x[i]) / hi
        return (a * y[i] + b * y[i + 1]
                + ((a**3 - a) * M[i] + (b**3 - b) * M[i + 1]) * hi**2 / 6)

    return evaluate


def sine_sobolev_norms() -> dict:
    """Exact W2^k norms of ``sin(2 pi x)`` on [0, 1] and the sigma = 1.5 interpolated value."""
    semis = [(2 * math.pi) ** (2 * k) / 2 for k in range(3)]
    n1 = math.sqrt(semis[0] + semis[1])
    n2 = math.sqrt(sum(semis))
    return {"L2": math.sqrt(0.5), "semi1": math.sqrt(semis[1]), "norm1": n1, "norm2": n2,
            "norm1.5": math.sqrt(n1 * n2)}


def synthetic_regression(seed: int = 0, slope: float = 4.0) -> float:
    """Least-squares slope recovered from ``h^slope`` data with multiplicative noise in [0.9, 1.1]."""
    rng = np.random.default_rng(seed)
    h = 2.0 ** -np.arange(1, 7)
    e = h**slope * rng.uniform(0.9, 1.1, len(h))
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def matern_two_point() -> dict:
    """Matern d=1, tau=1 (phi = sqrt(pi/2) e^{-r}) on {0, 1}: eigenvalues and 1x1 power function."""
    phi0 = math.sqrt(math.pi / 2)
    phi1 = phi0 * math.exp(-1)
    return {"lambda_min": phi0 - phi1, "power_at_1": math.sqrt(phi0 - phi1**2 / phi0),
            "native_single": math.sqrt(phi0)}


ORACLES = {
    "beta": lambda: {"GW(k=1,ell=3,r=0)": wendland_at_zero(1, 3), "GW(k=2,ell=4,r=0)": wendland_at_zero(2, 4)},
    "bessel": lambda: {"Matern(d=1,tau=1,r=1)": matern_product_integral(0.5, 1.0),
                       "Matern(d=1,tau=2,r=2)": matern_product_integral(1.5, 2.0),
                       "Matern(d=1,tau=1.3,r=2)": matern_product_integral(0.8, 2.0)},
    "matern-2pt": matern_two_point,
    "natural-spline": lambda: {
        "spline(x=[0,0.25,0.5,1], y=[0,1,0,2]) at 0.3":
            float(natural_cubic_spline([0, 0.25, 0.5, 1], [0, 1, 0, 2])(0.3))},
    "sine-norms": sine_sobolev_norms,
    "regression": lambda: {"noisy slope-4 fit (seed 0)": synthetic_regression(0)},
}


def run_oracle(name: str) -> dict:
    if name == "all":
        return {k: fn() for k, fn in ORACLES.items()}
    if name not in ORACLES:
        raise KeyError(f"unknown oracle {name!r}; choose from {sorted(ORACLES)} or 'all'")
    return {name: ORACLES[name]()}
