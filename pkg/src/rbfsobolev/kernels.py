"""Radial kernel families: surface splines, Matern kernels, generalized Wendland functions.

Every kernel is radial, ``phi(x) = Phi(|x|)``, so evaluation only ever needs the
radius.  Normalizations:

* Surface splines are the exact fundamental solution of ``(-Delta)^m`` in R^d,
  i.e. their generalized Fourier symbol is ``|w|^{-2m}``.  For ``2m - d`` odd this is
  ``Gamma(d/2 - m) / (4^m pi^{d/2} Gamma(m)) r^{2m-d}``, which carries the usual
  conditionally-positive sign ``(-1)^{ceil(m - d/2)}``; for ``2m - d`` even the
  ``r^{2m-d} log r`` form is used with its own constant.
* Matern kernels use the raw product form ``r^nu K_nu(r)`` with ``nu = tau - d/2``;
  ``phi(0) = 2^{nu-1} Gamma(nu)``.
* Generalized Wendland functions ``I^k psi_l`` use the ``2^{1-k}/Gamma(k)`` prefactor.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.spatial.distance import cdist

from .errors import DomainError, ParameterError
from .geometry import as_points

SURFACE_SPLINE = "SurfaceSpline"
MATERN = "Matern"
GENERALIZED_WENDLAND = "GeneralizedWendland"
FAMILIES = (SURFACE_SPLINE, MATERN, GENERALIZED_WENDLAND)


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _fmt(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


@dataclass(frozen=True)
class KernelSpec:
    """A member of one of the three kernel families in dimension ``dim``.

    Use the ``surface_spline``, ``matern`` and ``generalized_wendland``
    constructors rather than filling the fields by hand.
    """

    family: str
    dim: int
    m: int | None = None
    tau: float | None = None
    k: int | None = None
    ell: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not _is_int(self.dim) or self.dim < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.dim!r}")
        d = self.dim
        if self.family == SURFACE_SPLINE:
            if not _is_int(self.m):
                raise ParameterError(f"surface spline order m must be an integer, got {self.m!r}")
            if not 2 * self.m > d:
                raise ParameterError(f"surface spline needs m > d/2, got m={self.m}, d={d}")
        elif self.family == MATERN:
            if self.tau is None or not np.isfinite(self.tau):
                raise ParameterError("Matern kernel needs a finite smoothness tau")
            if not self.tau > d / 2:
                raise ParameterError(f"Matern kernel needs tau > d/2, got tau={self.tau}, d={d}")
            object.__setattr__(self, "tau", float(self.tau))
        else:
            if not (_is_int(self.k) and _is_int(self.ell)):
                raise ParameterError("generalized Wendland parameters k and ell must be integers")
            if self.k < 1:
                raise ParameterError(f"generalized Wendland needs k >= 1, got k={self.k}")
            if self.ell < self.k + d:
                raise ParameterError(
                    f"generalized Wendland needs ell >= k + d, got ell={self.ell}, k={self.k}, d={d}")

    @classmethod
    def surface_spline(cls, dim: int, m: int) -> "KernelSpec":
        return cls(SURFACE_SPLINE, dim, m=m)

    @classmethod
    def matern(cls, dim: int, tau: float) -> "KernelSpec":
        return cls(MATERN, dim, tau=tau)

    @classmethod
    def generalized_wendland(cls, dim: int, k: int, ell: int) -> "KernelSpec":
        return cls(GENERALIZED_WENDLAND, dim, k=k, ell=ell)

    @property
    def params(self) -> dict:
        if self.family == SURFACE_SPLINE:
            return {"m": self.m}
        if self.family == MATERN:
            return {"tau": self.tau}
        return {"k": self.k, "ell": self.ell}

    def to_text(self) -> str:
        """Serialize as e.g. ``Matern(d=1, tau=2)``."""
        parts = [f"d={self.dim}"] + [f"{key}={_fmt(val)}" for key, val in self.params.items()]
        return f"{self.family}({', '.join(parts)})"

    def to_dict(self) -> dict:
        return {"family": self.family, "d": self.dim, **self.params}

    def __str__(self):
        return self.to_text()


_SPEC_RE = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")


def parse_kernel_spec(text: str) -> KernelSpec:
    """Inverse of :meth:`KernelSpec.to_text`."""
    match = _SPEC_RE.match(text)
    if not match:
        raise ParameterError(f"cannot parse kernel spec {text!r}")
    family, body = match.groups()
    fields = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, _, val = item.partition("=")
        fields[key.strip()] = val.strip()
    return kernel_spec_from_dict({"family": family, **fields})


def kernel_spec_from_dict(data: dict) -> KernelSpec:
    try:
        family = data["family"]
        d = int(data["d"])
        if family == SURFACE_SPLINE:
            return KernelSpec.surface_spline(d, _as_int(data["m"]))
        if family == MATERN:
            return KernelSpec.matern(d, float(data["tau"]))
        if family == GENERALIZED_WENDLAND:
            return KernelSpec.generalized_wendland(d, _as_int(data["k"]), _as_int(data["ell"]))
    except KeyError as exc:
        raise ParameterError(f"kernel spec is missing field {exc.args[0]!r}") from None
    raise ParameterError(f"unknown kernel family {data.get('family')!r}")


def _as_int(val) -> int:
    f = float(val)
    if not f.is_integer():
        raise ParameterError(f"expected an integer, got {val!r}")
    return int(f)


@dataclass(frozen=True)
class KernelProps:
    """Derived constants of a kernel.

    ``homogeneity`` is the exponent ``s`` of the leading non-smooth term
    ``h_s`` near the origin, and always equals ``2 * native_exponent - d``.
    """

    cpd_order: int
    native_exponent: float
    homogeneity: float
    support_radius: float
    fourier_r0: float


def kernel_properties(spec: KernelSpec) -> KernelProps:
    d = spec.dim
    if spec.family == SURFACE_SPLINE:
        tau, m0, support = float(spec.m), spec.m, math.inf
    elif spec.family == MATERN:
        tau, m0, support = spec.tau, 0, math.inf
    else:
        tau, m0, support = spec.k + (d + 1) / 2, 0, 1.0
    return KernelProps(cpd_order=m0, native_exponent=tau, homogeneity=2 * tau - d,
                       support_radius=support, fourier_r0=1.0)


# ---------------------------------------------------------------------------
# h_s


def hs_value(s: float, r):
    """``|x|^s`` for ``s`` not an even integer, ``|x|^s log|x|`` otherwise."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("h_s is only evaluated at r > 0")
    if s <= 0:
        raise ParameterError(f"h_s needs s > 0, got {s}")
    out = r_arr**s
    if float(s).is_integer() and int(s) % 2 == 0:
        out = out * np.log(r_arr)
    return out if np.ndim(r) else float(out)


# ---------------------------------------------------------------------------
# Generalized Wendland functions


@lru_cache(maxsize=None)
def wendland_coefficients_exact(k: int, ell: int) -> tuple[Fraction, ...]:
    """Monomial coefficients ``(d_0, ..., d_{2k+ell})`` of ``I^k psi_ell`` on ``[0, 1]``.

    The integrand ``t (1-t)^ell (t^2 - r^2)^{k-1}`` is expanded in ``t`` and
    integrated exactly over ``[r, 1]`` in rational arithmetic.
    """
    if not (_is_int(k) and k >= 1):
        raise ParameterError(f"k must be an integer >= 1, got {k!r}")
    if not (_is_int(ell) and ell >= 0):
        raise ParameterError(f"ell must be a nonnegative integer, got {ell!r}")
    coeffs = [Fraction(0)] * (2 * k + ell + 1)
    pref = Fraction(1, 2 ** (k - 1) * math.factorial(k - 1))
    for i in range(ell + 1):
        ci = math.comb(ell, i) * (-1) ** i
        for j in range(k):
            # term: ci * C(k-1, j) * (-r^2)^{k-1-j} * t^{1+i+2j}
            cj = math.comb(k - 1, j) * (-1) ** (k - 1 - j)
            q = 1 + i + 2 * j
            c = pref * ci * cj / (q + 1)
            rp = 2 * (k - 1 - j)
            coeffs[rp] += c  # from the upper limit t = 1
            coeffs[rp + q + 1] -= c  # from the lower limit t = r
    return tuple(coeffs)


@lru_cache(maxsize=None)
def _wendland_coefficients(k: int, ell: int) -> np.ndarray:
    c = np.array([float(x) for x in wendland_coefficients_exact(k, ell)])
    c.setflags(write=False)
    return c


def generalized_wendland_value(k: int, ell: int, r):
    """Evaluate ``I^k psi_ell(r)``; zero for ``r >= 1``."""
    if not _is_int(k) or k < 1:
        raise ParameterError(f"k must be an integer >= 1, got {k!r}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("radius must be nonnegative")
    coeffs = _wendland_coefficients(k, ell)
    out = np.polynomial.polynomial.polyval(np.minimum(r_arr, 1.0), coeffs)
    out = np.where(r_arr >= 1.0, 0.0, out)
    return out if np.ndim(r) else float(out)


# ---------------------------------------------------------------------------
# Matern


def _is_half_integer(nu: float) -> bool:
    return (2 * nu).is_integer() and int(round(2 * nu)) % 2 == 1


def _matern_half_integer(n: int, r: np.ndarray) -> np.ndarray:
    # r^{n+1/2} K_{n+1/2}(r) = sqrt(pi/2) e^{-r} sum_j (n+j)!/(j!(n-j)!) 2^{-j} r^{n-j}
    poly = np.zeros_like(r)
    for j in range(n + 1):
        c = math.factorial(n + j) / (math.factorial(j) * math.factorial(n - j)) / 2**j
        poly = poly + c * r ** (n - j)
    return math.sqrt(math.pi / 2) * np.exp(-r) * poly


def matern_value(nu: float, r):
    """Raw Matern product ``r^nu K_nu(r)`` with its limit ``2^{nu-1} Gamma(nu)`` at 0."""
    r_arr = np.asarray(r, dtype=float)
    if _is_half_integer(nu):
        out = _matern_half_integer(int(nu - 0.5), r_arr)
    else:
        with np.errstate(invalid="ignore", over="ignore"):
            out = np.where(r_arr > 0, r_arr**nu * special.kv(nu, np.where(r_arr > 0, r_arr, 1.0)),
                           2 ** (nu - 1) * math.gamma(nu))
        # kv overflows for tiny arguments; the product tends to phi(0) there
        out = np.where(np.isfinite(out), out, 2 ** (nu - 1) * math.gamma(nu))
    return out if np.ndim(r) else float(out)


# ---------------------------------------------------------------------------
# Surface splines


@lru_cache(maxsize=None)
def surface_spline_constant(d: int, m: int) -> float:
    """Constant making ``C r^{2m-d}`` (or ``C r^{2m-d} log r``) the fundamental solution of ``(-Delta)^m``."""
    beta = 2 * m - d
    if d % 2 == 1:
        return math.gamma(d / 2 - m) / (4**m * math.pi ** (d / 2) * math.gamma(m))
    sign = (-1) ** (m - d // 2 + 1)
    return sign / (2 ** (2 * m - 1) * math.pi ** (d / 2) * math.factorial(m - 1)
                   * math.factorial(beta // 2))


def _surface_spline(d: int, m: int, r: np.ndarray) -> np.ndarray:
    c = surface_spline_constant(d, m)
    beta = 2 * m - d
    if d % 2 == 1:
        return c * r**beta
    with np.errstate(divide="ignore", invalid="ignore"):
        out = c * r**beta * np.log(r)
    return np.where(r > 0, out, 0.0)


# ---------------------------------------------------------------------------
# Dispatch


def radial_function(spec: KernelSpec, r: np.ndarray) -> np.ndarray:
    """Vectorized kernel profile without argument checking (internal hot path)."""
    if spec.family == SURFACE_SPLINE:
        return _surface_spline(spec.dim, spec.m, r)
    if spec.family == MATERN:
        return matern_value(spec.tau - spec.dim / 2, r)
    return generalized_wendland_value(spec.k, spec.ell, r)


def kernel_value(spec: KernelSpec, r):
    """``phi(x)`` for ``|x| = r`` (scalar or array of radii)."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise DomainError("kernel radius must be nonnegative")
    out = radial_function(spec, r_arr)
    return out if np.ndim(r) else float(out)


def kernel_matrix(spec: KernelSpec, x, y) -> np.ndarray:
    """Matrix ``(phi(x_i - y_j))_{ij}`` for point arrays of shape ``(n, d)`` and ``(m, d)``."""
    x = as_points(x, spec.dim)
    y = as_points(y, spec.dim)
    return radial_function(spec, cdist(x, y))


def kernel_at_zero(spec: KernelSpec) -> float:
    return float(radial_function(spec, np.zeros(1))[0])


# ---------------------------------------------------------------------------
# Fourier symbols


def fourier_symbol_value(spec: KernelSpec, omega_norm: float):
    """Generalized Fourier symbol at ``|w| = omega_norm``.

    Surface splines: ``|w|^{-2m}``.  Matern: ``(1 + |w|^2)^{-tau}`` (unit constant;
    the raw product form differs from it by a positive factor).  Generalized
    Wendland: a ``(lower, upper)`` envelope ``c (1+|w|)^{-(d+2k+1)}``,
    ``C (1+|w|)^{-(d+2k+1)}`` with ``c, C`` measured from the numerically computed
    radial transform, intended only for sanity reports.
    """
    w = float(omega_norm)
    if spec.family == MATERN:
        if w < 0:
            raise DomainError("frequency norm must be nonnegative")
        return (1.0 + w * w) ** (-spec.tau)
    if not w > 0:
        raise DomainError("frequency norm must be positive")
    if spec.family == SURFACE_SPLINE:
        return w ** (-2.0 * spec.m)
    lo, hi = wendland_fourier_constants(spec.dim, spec.k, spec.ell)
    env = (1.0 + w) ** (-(spec.dim + 2 * spec.k + 1))
    return lo * env, hi * env


def radial_fourier_transform(spec: KernelSpec, omega) -> np.ndarray:
    """d-dimensional Fourier transform ``int phi(x) e^{-i x.w} dx`` of a compactly supported kernel."""
    if spec.family != GENERALIZED_WENDLAND:
        raise ParameterError("numerical radial transform is only provided for compact kernels")
    d = spec.dim
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    x, wts = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(0.0, 1.0, 129)
    r = ((edges[:-1, None] + edges[1:, None]) / 2 + (edges[1:, None] - edges[:-1, None]) / 2 * x).ravel()
    wr = (np.diff(edges)[:, None] / 2 * wts).ravel()
    prof = generalized_wendland_value(spec.k, spec.ell, r)
    out = np.empty_like(omega)
    for i, w in enumerate(omega):
        if w == 0:
            area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
            out[i] = area * np.sum(wr * prof * r ** (d - 1))
        else:
            bess = special.jv(d / 2 - 1, w * r)
            out[i] = (2 * math.pi) ** (d / 2) * w ** (1 - d / 2) * np.sum(wr * prof * r ** (d / 2) * bess)
    return out


@lru_cache(maxsize=None)
def wendland_fourier_constants(d: int, k: int, ell: int, omega_max: float = 50.0) -> tuple[float, float]:
    spec = KernelSpec.generalized_wendland(d, k, ell)
    omega = np.linspace(0.0, omega_max, 2001)
    ratio = radial_fourier_transform(spec, omega) * (1 + omega) ** (d + 2 * k + 1)
    return float(ratio.min()), float(ratio.max())
