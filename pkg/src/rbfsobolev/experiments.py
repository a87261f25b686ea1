"""Experiment configurations, refinement ladders and convergence reports."""

from __future__ import annotations

import configparser
import math
import time
from dataclasses import asdict, dataclass, field, fields
from decimal import Decimal, InvalidOperation

import numpy as np

from . import __version__
from .errors import BudgetError, ConfigError, InsufficientDataError, RBFError
from .geometry import Domain, generate_point_set
from .interpolate import (assemble_system, constrained_min_eigenvalue, e_ratio, evaluate_interpolant,
                          expansion_values, power_function_values, solve_interpolant)
from .kernels import KernelSpec, kernel_properties, parse_kernel_spec
from .norms import GridFunction, RateFit, fit_convergence_rate, grid_points, sobolev_norms_grid, trapezoid_integral
from .oracles import natural_cubic_spline
from .polynomials import PolynomialBasis
from .polyrepro import ReproConfig, check_reproduction, choose_K, default_degree, local_weights_batch
from .quasiinterp import ConvolutionRule, CosineBump, evaluate_quasi_interpolant, make_target, quasi_coefficients

KINDS = ("interpolation-rates", "quasi-rates", "bernstein", "eigmin", "power-function",
         "polyrepro-audit", "e-ratio")
RATE_KINDS = ("interpolation-rates", "quasi-rates", "e-ratio")
MAX_GRID_NODES = 2_000_000


@dataclass
class ExperimentConfig:
    name: str
    kind: str
    kernel: KernelSpec
    levels: tuple
    criterion: str = ""
    lower: tuple = ()
    upper: tuple = ()
    jitter: float = 0.0
    seed: int = 0
    sigmas: tuple = ()
    bump_center: tuple = (0.5,)
    bump_half_width: tuple = (0.25,)
    bump_power: int = 12
    L: int | None = None
    K: float | None = None
    eval_nodes: int = 8193
    margin: float = 0.02
    probe_offset: int = 3
    probes: int = 200
    samples: int = 20
    bernstein_order: float = 1.0
    rate_tol: float = 0.4
    rate_tol_upper: float = 0.6
    eig_calibration: float = 0.5
    gamma_max: float = math.inf
    spline_oracle: bool = False
    spline_tol: float = 1e-7
    conv_radial_order: int = 24
    conv_angular: int = 128
    max_points: int = 5000
    max_runtime: float = 300.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"[{self.name}] unknown kind {self.kind!r}; expected one of {KINDS}")
        d = self.kernel.dim
        if not self.lower:
            self.lower = (0.0,) * d
        if not self.upper:
            self.upper = (1.0,) * d
        self.bump_center = tuple(np.broadcast_to(self.bump_center, (d,)).tolist())
        self.bump_half_width = tuple(np.broadcast_to(self.bump_half_width, (d,)).tolist())
        if not self.levels:
            raise ConfigError(f"[{self.name}] needs at least one level")
        if self.eval_nodes**d > MAX_GRID_NODES:
            raise ConfigError(f"[{self.name}] evaluation grid {self.eval_nodes}^{d} exceeds {MAX_GRID_NODES} nodes")
        if self.kind in RATE_KINDS:
            check_admissible(self.kernel, self.sigmas, self.name)

    @property
    def domain(self) -> Domain:
        return Domain(self.lower, self.upper)

    @property
    def bump(self) -> CosineBump:
        return CosineBump(self.bump_center, self.bump_half_width, self.bump_power)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, KernelSpec):
                val = val.to_text()
            elif isinstance(val, tuple):
                val = list(val)
            elif isinstance(val, float) and math.isinf(val):
                val = "inf"
            out[f.name] = val
        return out


def check_admissible(spec: KernelSpec, sigmas, name: str = "") -> None:
    """Reject orders outside the window ``ceil(sigma) < 2 tau - d/2`` of the interpolation error theorem."""
    tau = kernel_properties(spec).native_exponent
    bound = 2 * tau - spec.dim / 2
    for s in sigmas:
        if s < 0 or not math.ceil(s) < bound:
            raise ConfigError(
                f"[{name}] sigma={s} is outside the admissible window ceil(sigma) < 2*tau - d/2 = {bound:g} "
                f"of the interpolation error theorem for {spec.to_text()}")


# ---------------------------------------------------------------------------
# Config parsing


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _decimal(text: str, key: str) -> float:
    try:
        return float(Decimal(text.strip()))
    except InvalidOperation:
        raise ConfigError(f"{key}: {text!r} is not a decimal number") from None


def _int(text: str, key: str) -> int:
    val = Decimal(text.strip()) if text.strip() else None
    if val is None or val != val.to_integral_value():
        raise ConfigError(f"{key}: {text!r} is not an integer")
    return int(val)


def _list(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.replace(";", ",").split(",")) if t]


def _levels(text: str, key: str) -> tuple:
    out = []
    for item in _list(text):
        if "-" in item[1:]:
            a, b = item.split("-", 1)
            out.extend(range(_int(a, key), _int(b, key) + 1))
        else:
            out.append(_int(item, key))
    return tuple(out)


def config_from_section(name: str, section) -> ExperimentConfig:
    kw = {"name": name}
    for key, raw in section.items():
        if key not in _FIELD_TYPES or key == "name":
            raise ConfigError(f"[{name}] unknown key {key!r}")
        typ = _FIELD_TYPES[key]
        if key == "kernel":
            kw[key] = parse_kernel_spec(raw)
        elif key == "levels":
            kw[key] = _levels(raw, key)
        elif key in ("kind", "criterion"):
            kw[key] = raw.strip()
        elif key == "spline_oracle":
            kw[key] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif typ.startswith("tuple"):
            kw[key] = tuple(_decimal(v, key) for v in _list(raw))
        elif typ.startswith("int"):
            kw[key] = _int(raw, key)
        else:
            kw[key] = _decimal(raw, key)
    for req in ("kind", "kernel", "levels"):
        if req not in kw:
            raise ConfigError(f"[{name}] missing required key {req!r}")
    return ExperimentConfig(**kw)


def load_configs(path) -> list[ExperimentConfig]:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not parser.sections():
        raise ConfigError(f"{path}: no experiment sections")
    return [config_from_section(name, parser[name]) for name in parser.sections()]


# ---------------------------------------------------------------------------
# Reports


@dataclass
class Criterion:
    id: str
    description: str
    measured: float | None
    threshold: str
    passed: bool


@dataclass
class ConvergenceReport:
    config: dict
    rows: list
    fits: dict
    criteria: list
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.criteria) and all(c.passed for c in self.criteria)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rows": self.rows,
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "criteria": [asdict(c) for c in self.criteria],
            "passed": self.passed,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConvergenceReport":
        fits = {k: RateFit(**v) for k, v in data["fits"].items()}
        crit = [Criterion(**c) for c in data["criteria"]]
        return cls(data["config"], data["rows"], fits, crit, data.get("meta", {}))


# ---------------------------------------------------------------------------
# Ladder execution


class _Clock:
    def __init__(self, limit: float):
        self.start = time.perf_counter()
        self.limit = limit

    def check(self, where: str):
        if time.perf_counter() - self.start > self.limit:
            raise BudgetError(f"runtime budget of {self.limit:g} s exceeded during {where}")


def _eval_grid(cfg: ExperimentConfig, shrink: bool = True):
    dom = cfg.domain.shrink(cfg.margin) if shrink and cfg.margin > 0 else cfg.domain
    return dom, grid_points(dom, cfg.eval_nodes)


def _level_points(cfg: ExperimentConfig, level: int):
    return generate_point_set(cfg.domain, level, cfg.jitter, cfg.seed + level, cfg.max_points,
                              probe_level=level + cfg.probe_offset)


def _base_row(cfg, level, ps) -> dict:
    return {"level": level, "n": len(ps), "q": ps.q, "h": ps.h, "rho": ps.rho,
            "seed": cfg.seed + level, "jitter": cfg.jitter, "status": "ok"}


def _error_norms(cfg, dom, values) -> dict:
    gf = GridFunction(dom, (cfg.eval_nodes,) * dom.dim, values)
    norms = sobolev_norms_grid(gf, list(cfg.sigmas))
    return {_sigma_key(s): v for s, v in norms.items()}


def _sigma_key(s: float) -> str:
    return f"{float(s):g}"


def natural_spline_gap(centers: np.ndarray, values: np.ndarray, interp, count: int = 100) -> float:
    """Max difference between the interpolant and a tridiagonal natural cubic spline at interior points."""
    x = centers[:, 0]
    order = np.argsort(x)
    spline = natural_cubic_spline(x[order], values[order])
    t = np.linspace(x.min(), x.max(), count + 2)[1:-1]
    return float(np.abs(spline(t) - evaluate_interpolant(interp, t[:, None])).max())


def _run_interpolation(cfg, clock, rows):
    spec = cfg.kernel
    target = make_target(spec, cfg.bump, cfg.domain,
                         conv_rule=ConvolutionRule(cfg.conv_radial_order, 2, cfg.conv_angular))
    dom, grid = _eval_grid(cfg)
    f_grid = target.f(grid)
    if cfg.kind == "e-ratio":
        full_dom, full_grid = _eval_grid(cfg, shrink=False)
        f_full = target.f(full_grid)
    for level in cfg.levels:
        clock.check(f"level {level}")
        try:
            ps = _level_points(cfg, level)
            row = _base_row(cfg, level, ps)
            sys = assemble_system(spec, ps)
            data = target.f(ps.points)
            interp = solve_interpolant(sys, data)
            row["condition"] = sys.condition_estimate
            row["residual"] = interp.residual
            err = f_grid - evaluate_interpolant(interp, grid)
            row["errors"] = _error_norms(cfg, dom, err) if cfg.sigmas else {}
            if cfg.spline_oracle:
                row["spline_gap"] = natural_spline_gap(ps.points, data, interp)
            if cfg.kind == "e-ratio":
                diff = f_full - evaluate_interpolant(interp, full_grid)
                gf = GridFunction(full_dom, (cfg.eval_nodes,) * spec.dim, diff**2)
                l2 = math.sqrt(trapezoid_integral(gf.values, gf.spacing))
                row["l2_error"] = l2
                row["e_ratio"] = e_ratio(target, interp, l2)
        except RBFError as exc:
            row = {"level": level, "seed": cfg.seed + level, "jitter": cfg.jitter,
                   "status": f"{type(exc).__name__}: {exc}"}
        rows.append(row)


def _run_quasi(cfg, clock, rows):
    spec = cfg.kernel
    props = kernel_properties(spec)
    target = make_target(spec, cfg.bump, cfg.domain)
    dom, grid = _eval_grid(cfg)
    f_grid = target.f(grid)
    L = cfg.L if cfg.L is not None else default_degree(props.homogeneity, spec.dim)
    for level in cfg.levels:
        clock.check(f"level {level}")
        try:
            ps = _level_points(cfg, level)
            row = _base_row(cfg, level, ps)
            if cfg.K is not None:
                K = cfg.K
            else:
                rng = np.random.default_rng(cfg.seed + level)
                probe = rng.uniform(target.density.lower, target.density.upper, (cfg.probes, spec.dim))
                K = choose_K(ps, L, probe)
            rcfg = ReproConfig(L, K, ps.h)
            qc = quasi_coefficients(target, ps, rcfg)
            row.update(L=L, K=K, quadrature=qc.quad)
            deg = min(L, target.density.moment_order)
            if deg >= 0:
                basis = PolynomialBasis.for_domain(ps.domain, deg)
                scale = target.density.l2_norm
                row["moment_residual"] = float(np.abs(qc.moment_residual(ps, deg, basis)).max() / scale)
            err = f_grid - evaluate_quasi_interpolant(spec, qc, ps, grid, poly=None) - target.polynomial(grid)
            row["errors"] = _error_norms(cfg, dom, err) if cfg.sigmas else {}
        except RBFError as exc:
            row = {"level": level, "seed": cfg.seed + level, "jitter": cfg.jitter,
                   "status": f"{type(exc).__name__}: {exc}"}
        rows.append(row)


def random_trial_coefficients(sys, rng) -> np.ndarray:
    """Standard normal coefficients projected onto the polynomial-annihilating subspace."""
    a = rng.standard_normal(sys.n)
    if sys.N:
        Q, _ = np.linalg.qr(sys.P)
        a = a - Q @ (Q.T @ a)
    return a


def _run_bernstein(cfg, clock, rows):
    spec = cfg.kernel
    tau = kernel_properties(spec).native_exponent
    lo_order, hi_order = tau, tau + cfg.bernstein_order
    dom, grid = _eval_grid(cfg)
    empty = PolynomialBasis(spec.dim, -1, (0.0,) * spec.dim)
    for level in cfg.levels:
        clock.check(f"level {level}")
        try:
            ps = _level_points(cfg, level)
            row = _base_row(cfg, level, ps)
            sys = assemble_system(spec, ps)
            rng = np.random.default_rng(cfg.seed + level)
            ratios = []
            for _ in range(cfg.samples):
                a = random_trial_coefficients(sys, rng)
                vals = expansion_values(spec, ps.points, a, empty, np.zeros(0), grid)
                gf = GridFunction(dom, (cfg.eval_nodes,) * spec.dim, vals)
                norms = sobolev_norms_grid(gf, [lo_order, hi_order])
                ratios.append(norms[hi_order] / norms[lo_order])
            row["bernstein_ratio"] = max(ratios)
            # highest-frequency trial function (alternating signs under a smooth window that
            # keeps boundary layers out), a diagnostic of how sharp the inequality is
            rel = (ps.points - np.array(cfg.lower)) / ps.domain.sides
            parity = np.rint(rel * 2**level).sum(axis=1)
            a = (-1.0) ** parity * np.prod(np.sin(np.pi * rel) ** 8, axis=1)
            if sys.N:
                Q, _ = np.linalg.qr(sys.P)
                a = a - Q @ (Q.T @ a)
            gf = GridFunction(dom, (cfg.eval_nodes,) * spec.dim,
                              expansion_values(spec, ps.points, a, empty, np.zeros(0), grid))
            norms = sobolev_norms_grid(gf, [lo_order, hi_order])
            row["alternating_ratio"] = norms[hi_order] / norms[lo_order]
        except RBFError as exc:
            row = {"level": level, "seed": cfg.seed + level, "jitter": cfg.jitter,
                   "status": f"{type(exc).__name__}: {exc}"}
        rows.append(row)


def _run_eigmin(cfg, clock, rows):
    for level in cfg.levels:
        clock.check(f"level {level}")
        try:
            ps = _level_points(cfg, level)
            row = _base_row(cfg, level, ps)
            sys = assemble_system(cfg.kernel, ps)
            row["condition"] = sys.condition_estimate
            row["lambda_min"] = constrained_min_eigenvalue(sys)
        except RBFError as exc:
            row = {"level": level, "seed": cfg.seed + level, "jitter": cfg.jitter,
                   "status": f"{type(exc).__name__}: {exc}"}
        rows.append(row)


def probe_set(domain: Domain, count: int) -> np.ndarray:
    """Cell midpoints of a uniform grid with about ``count`` cells."""
    per_axis = max(1, round(count ** (1 / domain.dim)))
    axes = [a + (np.arange(per_axis) + 0.5) / per_axis * (b - a) for a, b in zip(domain.lower, domain.upper)]
    return grid_points_from_axes(axes)


def grid_points_from_axes(axes) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _run_power(cfg, clock, rows):
    probes = probe_set(cfg.domain, cfg.probes)
    for level in cfg.levels:
        clock.check(f"level {level}")
        try:
            ps = _level_points(cfg, level)
            row = _base_row(cfg, level, ps)
            sys = assemble_system(cfg.kernel, ps)
            row["condition"] = sys.condition_estimate
            row["power_max"] = float(power_function_values(cfg.kernel, ps, probes, sys).max())
            row["power_at_centers"] = float(power_function_values(cfg.kernel, ps, ps.points, sys).max())
        except RBFError as exc:
            row = {"level": level, "seed": cfg.seed + level, "jitter": cfg.jitter,
                   "status": f"{type(exc).__name__}: {exc}"}
        rows.append(row)


def _run_polyrepro(cfg, clock, rows):
    spec = cfg.kernel
    props = kernel_properties(spec)
    L = cfg.L if cfg.L is not None else default_degree(props.homogeneity, spec.dim)
    for level in cfg.levels:
        clock.check(f"level {level}")
        try:
            ps = _level_points(cfg, level)
            row = _base_row(cfg, level, ps)
            rng = np.random.default_rng(cfg.seed + level)
            probe = rng.uniform(cfg.domain.lower, cfg.domain.upper, (cfg.probes, spec.dim))
            K = cfg.K if cfg.K is not None else choose_K(ps, L, probe)
            reps = local_weights_batch(ps, ReproConfig(L, K, ps.h), probe)
            row.update(L=L, K=K,
                       residual=max(check_reproduction(r, L) for r in reps),
                       sum_defect=max(abs(float(np.sum(r.weights)) - 1.0) for r in reps),
                       gamma=max(r.abs_sum for r in reps),
                       max_stencil_radius=max(float(np.max(np.linalg.norm(r.points - r.z, axis=1))) / r.radius
                                              for r in reps))
        except RBFError as exc:
            row = {"level": level, "seed": cfg.seed + level, "jitter": cfg.jitter,
                   "status": f"{type(exc).__name__}: {exc}"}
        rows.append(row)


_RUNNERS = {
    "interpolation-rates": _run_interpolation,
    "e-ratio": _run_interpolation,
    "quasi-rates": _run_quasi,
    "bernstein": _run_bernstein,
    "eigmin": _run_eigmin,
    "power-function": _run_power,
    "polyrepro-audit": _run_polyrepro,
}


def _fit(rows, key, variable="h", sub=None) -> RateFit:
    ok = [r for r in rows if r["status"] == "ok"]
    vals = [(r[variable], (r[key][sub] if sub is not None else r[key])) for r in ok]
    return fit_convergence_rate(vals, [r["level"] for r in ok], variable)


def _expected_rates(cfg) -> dict:
    props = kernel_properties(cfg.kernel)
    if cfg.kind == "quasi-rates":
        top = props.homogeneity + cfg.kernel.dim
    else:
        top = 2 * props.native_exponent
    return {_sigma_key(s): top - s for s in cfg.sigmas}


def _judge(cfg, rows) -> tuple[dict, list]:
    fits, crit = {}, []
    cid = cfg.criterion or cfg.name
    props = kernel_properties(cfg.kernel)
    d = cfg.kernel.dim
    ok = [r for r in rows if r["status"] == "ok"]

    def add(suffix, desc, measured, threshold, passed):
        crit.append(Criterion(f"{cid}.{suffix}", desc, measured, threshold, bool(passed)))

    def fit_or_fail(name, *args, **kw):
        try:
            fits[name] = _fit(rows, *args, **kw)
            return fits[name]
        except (InsufficientDataError, KeyError) as exc:
            add(name, "rate fit", None, "at least 3 surviving levels", False)
            crit[-1].description = f"rate fit failed: {exc}"
            return None

    if cfg.kind in ("interpolation-rates", "quasi-rates", "e-ratio"):
        for key, expected in _expected_rates(cfg).items():
            fit = fit_or_fail(f"sigma={key}", "errors", sub=key)
            if fit is not None:
                thr = expected - cfg.rate_tol
                add(f"sigma={key}", f"slope of W2^{key} error vs h", fit.slope, f">= {thr:g}", fit.slope >= thr)
        if cfg.spline_oracle:
            gap = max((r.get("spline_gap", math.inf) for r in ok), default=math.inf)
            add("spline-oracle", "max gap to natural cubic spline", gap, f"<= {cfg.spline_tol:g}",
                len(ok) == len(rows) and gap <= cfg.spline_tol)
        if cfg.kind == "e-ratio":
            fit = fit_or_fail("e-ratio", "e_ratio")
            if fit is not None:
                thr = props.native_exponent - cfg.rate_tol
                add("e-ratio", "slope of L2/native error ratio vs h", fit.slope, f">= {thr:g}", fit.slope >= thr)
        if cfg.kind == "quasi-rates":
            worst = max((r.get("moment_residual", 0.0) for r in ok), default=0.0)
            add("moments", "relative moment certificate of quasi coefficients", worst, "<= 1e-08",
                worst <= 1e-8)
    elif cfg.kind == "bernstein":
        fit = fit_or_fail("bernstein", "bernstein_ratio", variable="q")
        if fit is not None:
            exponent = -fit.slope
            thr = cfg.bernstein_order + cfg.rate_tol
            add("bernstein", f"exponent of max W2^(tau+{cfg.bernstein_order:g})/W2^tau ratio vs 1/q",
                exponent, f"<= {thr:g}", exponent <= thr)
        try:
            fits["alternating"] = _fit(rows, "alternating_ratio", variable="q")
        except (InsufficientDataError, KeyError):
            pass
    elif cfg.kind == "eigmin":
        fit = fit_or_fail("eigmin", "lambda_min", variable="q")
        if fit is not None:
            expected = props.homogeneity
            lo, hi = expected - cfg.rate_tol, expected + cfg.rate_tol_upper
            add("exponent", "slope of constrained lambda_min vs q", fit.slope, f"in [{lo:g}, {hi:g}]",
                lo <= fit.slope <= hi)
            first = ok[0]
            c = cfg.eig_calibration * first["lambda_min"] / first["q"] ** expected
            margin = min(r["lambda_min"] / (c * r["q"] ** expected) for r in ok)
            add("lower-bound", f"min lambda_min / (c q^{expected:g}), c calibrated at level {first['level']}",
                margin, ">= 1", margin >= 1.0)
    elif cfg.kind == "power-function":
        fit = fit_or_fail("power", "power_max")
        if fit is not None:
            thr = props.native_exponent - d / 2 - cfg.rate_tol
            add("power", "slope of max power function vs h", fit.slope, f">= {thr:g}", fit.slope >= thr)
        worst = max((r.get("power_at_centers", math.inf) for r in ok), default=math.inf)
        add("centers", "max power function at centers", worst, "<= 1e-07", worst <= 1e-7)
    elif cfg.kind == "polyrepro-audit":
        res = max((r.get("residual", math.inf) for r in ok), default=math.inf)
        add("reproduction", "max polynomial reproduction residual", res, "<= 1e-09",
            len(ok) == len(rows) and res <= 1e-9)
        sd = max((r.get("sum_defect", math.inf) for r in ok), default=math.inf)
        add("partition", "max |sum a - 1|", sd, "<= 1e-10", sd <= 1e-10)
        gam = max((r.get("gamma", math.inf) for r in ok), default=math.inf)
        add("stability", "empirical stability constant", gam, f"<= {cfg.gamma_max:g}",
            math.isfinite(gam) and gam <= cfg.gamma_max)
        loc = max((r.get("max_stencil_radius", math.inf) for r in ok), default=math.inf)
        add("locality", "max |xi - z| / (K h)", loc, "<= 1", loc <= 1 + 1e-12)
    return fits, crit


def _clean(obj):
    """Plain-Python copy with floats made JSON-safe (non-finite values become strings)."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        return val if math.isfinite(val) else str(val)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def run_experiment(cfg: ExperimentConfig) -> ConvergenceReport:
    clock = _Clock(cfg.max_runtime)
    rows: list = []
    _RUNNERS[cfg.kind](cfg, clock, rows)
    rows = _clean(rows)
    fits, crit = _judge(cfg, rows)
    for c in crit:
        c.measured = _clean(c.measured)
    meta = {"package": "rbfsobolev", "version": __version__, "kernel_props": _clean(asdict(kernel_properties(cfg.kernel)))}
    return ConvergenceReport(_clean(cfg.to_dict()), rows, fits, crit, meta)

