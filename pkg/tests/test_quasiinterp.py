import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbfsobolev.errors import DomainError, ParameterError, SmoothnessError
from rbfsobolev.geometry import Domain, generate_point_set
from rbfsobolev.kernels import KernelSpec
from rbfsobolev.polynomials import PolynomialBasis
from rbfsobolev.polyrepro import ReproConfig, build_local_weights, choose_K
from rbfsobolev.quadrature import QuadratureRule, box_rule
from rbfsobolev.quasiinterp import (ConvolutionRule, CosineBump, CosineSeries, SourceDensity, TargetFunction,
                                    certify_moments, convolve_density, evaluate_quasi_interpolant, make_target,
                                    quasi_coefficients, quasi_rule, required_bump_power, spot_check)

SS2 = KernelSpec.surface_spline(1, 2)
M2 = KernelSpec.matern(1, 2)
GW = KernelSpec.generalized_wendland(2, 1, 3)


def test_cosine_series_matches_power_form():
    s = CosineSeries.bump(0.3, 0.2, 8)
    t = np.linspace(0, 0.6, 401)
    direct = np.where(np.abs(t - 0.3) <= 0.2, np.cos(np.pi * (t - 0.3) / 0.4) ** 8, 0.0)
    assert np.allclose(s(t), direct, atol=1e-15)
    # the linearized series gives the same values through the general branch
    lin = CosineSeries(s.center, s.half_width, s.coef)
    assert np.allclose(lin(t), direct, atol=1e-14)


def test_cosine_series_derivatives():
    s = CosineSeries.bump(0.0, 1.0, 6)
    t = np.linspace(-0.9, 0.9, 37)
    step = 1e-5
    for k in range(1, 4):
        fd = (s.derivative(t + step, k - 1) - s.derivative(t - step, k - 1)) / (2 * step)
        assert np.allclose(s.derivative(t, k), fd, rtol=1e-6, atol=1e-6)
    # C^{p-1}: derivatives up to order p - 1 vanish at the support edge
    for k in range(6):
        assert abs(s.derivative(np.array([1.0]), k)[0]) < 1e-9 * max(1.0, math.pi**k)


def test_bump_validation_and_support():
    with pytest.raises(ParameterError):
        CosineBump(0.5, 0.2, 3)
    with pytest.raises(ParameterError):
        CosineBump(0.5, -0.2, 4)
    b = CosineBump((0.5, 0.5), (0.3, 0.2), 4)
    assert b([[0.5, 0.5]])[0] == 1.0
    assert b([[0.5, 0.71]])[0] == 0.0


def test_neg_laplacian_2d_against_finite_differences():
    b = CosineBump((0.5, 0.5), (0.3, 0.3), 8)
    x = np.array([[0.45, 0.6], [0.6, 0.4]])
    step = 1e-4
    lap = sum((b(x + step * e) - 2 * b(x) + b(x - step * e)) / step**2 for e in np.eye(2))
    assert np.allclose(b.neg_laplacian_power(x, 1), -lap, rtol=1e-5)


def test_make_target_errors():
    with pytest.raises(DomainError):
        make_target(SS2, CosineBump(0.9, 0.2, 8))
    with pytest.raises(SmoothnessError):
        make_target(SS2, CosineBump(0.5, 0.25, 4))
    with pytest.raises(ParameterError):
        make_target(KernelSpec.matern(1, 1.5), CosineBump(0.5, 0.25, 8), path="closed-form")
    assert required_bump_power(SS2) == 6
    assert required_bump_power(M2) == 6


def test_surface_spline_target_spot_check():
    target = make_target(SS2, CosineBump(0.5, 0.25, 8))
    assert target.path == "closed-form"
    assert spot_check(target, [0.3, 0.5, 0.62]) <= 1e-6


def test_matern_closed_form_against_convolution():
    target = make_target(M2, CosineBump(0.5, 0.25, 8))
    x = np.array([0.1, 0.3, 0.45, 0.62, 0.9])
    conv = np.array([convolve_density(M2, target.density, xi) for xi in x])
    g = target.f(x)
    assert np.all(np.abs(conv - g) <= 1e-6 * np.maximum(np.abs(g), 1e-3 * np.abs(g).max()))


def test_vanishing_moments():
    target = make_target(SS2, CosineBump(0.5, 0.25, 8))
    quad = target.default_rule()
    x = quad.nodes[:, 0]
    nu = target.nu(quad.nodes)
    scale = math.sqrt(quad.integrate(nu**2))
    for j in range(2):
        assert abs(quad.integrate(nu * (x - 0.5) ** j)) <= 1e-10 * scale
    assert target.density.moment_order == 3
    assert make_target(M2, CosineBump(0.5, 0.25, 8)).density.moment_order == -1


def test_wendland_far_point_and_positivity():
    target = make_target(GW, CosineBump((0.5, 0.5), (0.2, 0.2), 8))
    assert target.path == "quadrature"
    assert target.f(np.array([[2.0, 0.5], [0.5, -1.0]])).tolist() == [0.0, 0.0]
    vals = target.f(np.array([[0.5, 0.5], [0.1, 0.9], [1.0, 1.0]]))
    assert np.all(vals > 0)


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 3), st.floats(0.0, 1.0))
def test_convolution_translation_equivariance(shift, x):
    bump = CosineBump(0.5, 0.25, 8)
    moved = CosineBump(0.5 + shift, 0.25, 8)
    a = SourceDensity(bump, bump.lower, bump.upper)
    b = SourceDensity(moved, moved.lower, moved.upper)
    va = convolve_density(M2, a, x)
    vb = convolve_density(M2, b, x + shift)
    assert vb == pytest.approx(va, rel=1e-10, abs=1e-14)


@pytest.fixture(scope="module")
def ss_ladder_instance():
    target = make_target(SS2, CosineBump(0.5, 0.25, 8))
    ps = generate_point_set(Domain.unit(1), 5, 0.2, seed=3)
    cfg = ReproConfig(5, choose_K(ps, 5, np.linspace(0.25, 0.75, 201)), ps.h)
    return target, ps, cfg


def test_zero_density_gives_zero_coefficients(ss_ladder_instance):
    _, ps, cfg = ss_ladder_instance
    zero = SourceDensity(lambda p: np.zeros(len(np.atleast_1d(p))), np.array([0.3]), np.array([0.7]))
    t = TargetFunction(SS2, zero, "quadrature", lambda p: np.zeros(len(p)))
    coeffs = quasi_coefficients(t, ps, cfg)
    assert np.all(coeffs.A == 0)
    assert np.all(evaluate_quasi_interpolant(SS2, coeffs, ps, np.linspace(0, 1, 11)) == 0)


def test_moment_certificate(ss_ladder_instance):
    target, ps, cfg = ss_ladder_instance
    coeffs = quasi_coefficients(target, ps, cfg)
    M = min(cfg.degree, target.density.moment_order)
    basis = PolynomialBasis(1, M, (0.5,), 0.5)
    resid = coeffs.moment_residual(ps, M, basis)
    assert np.max(np.abs(resid)) <= 1e-8 * target.density.l2_norm


def test_quasi_interpolant_error_drops_per_level():
    target = make_target(SS2, CosineBump(0.5, 0.25, 8))
    x = np.linspace(0.02, 0.98, 2049)
    errs = []
    for level in (5, 6, 7):
        ps = generate_point_set(Domain.unit(1), level)
        cfg = ReproConfig(5, choose_K(ps, 5, np.linspace(0.25, 0.75, 201)), ps.h)
        vals = evaluate_quasi_interpolant(SS2, quasi_coefficients(target, ps, cfg), ps, x)
        errs.append(math.sqrt(np.trapezoid((vals - target.f(x)) ** 2, x)))
    # s + d - 1/2 with s = 2m = 4 and d = 1
    assert errs[0] / errs[1] >= 2**4.5 and errs[1] / errs[2] >= 2**4.5


def test_linearity_in_density(ss_ladder_instance):
    _, ps, cfg = ss_ladder_instance
    b1, b2 = CosineBump(0.4, 0.15, 8), CosineBump(0.6, 0.2, 8)
    lo, hi = np.array([0.2]), np.array([0.8])
    quad = box_rule(lo, hi, cfg.radius / 2, 12)

    def coeff(fn):
        t = TargetFunction(SS2, SourceDensity(fn, lo, hi), "quadrature")
        return quasi_coefficients(t, ps, cfg, quad).A

    both = coeff(lambda p: b1(p) - 2.5 * b2(p))
    assert np.allclose(both, coeff(b1) - 2.5 * coeff(b2), rtol=0, atol=1e-13 * np.abs(both).max())


def test_single_panel_piecewise_constant_oracle():
    ps = generate_point_set(Domain.unit(1), 4)
    cfg = ReproConfig(0, 2, ps.h)
    lo, hi = np.array([0.40]), np.array([0.45])
    nu = SourceDensity(lambda p: np.full(len(np.atleast_2d(p)), 3.0), lo, hi)
    target = TargetFunction(SS2, nu, "quadrature")
    quad = box_rule(lo, hi, 1.0, 12)
    assert quad.panels == 1
    got = quasi_coefficients(target, ps, cfg, quad).A
    # direct summation, node by node
    ref = np.zeros(len(ps))
    for z, w in zip(quad.nodes, quad.weights):
        rep = build_local_weights(ps, cfg, z)
        for i, a in zip(rep.indices, rep.weights):
            ref[i] += 3.0 * w * a
    assert np.allclose(got, ref, rtol=0, atol=1e-12)
    # panel mass times mean weight; L = 0 weights are uniform over the stencil
    assert got.sum() == pytest.approx(3.0 * 0.05, abs=1e-12)


def test_coefficients_converge_under_panel_halving(ss_ladder_instance):
    target, ps, cfg = ss_ladder_instance
    coarse = quasi_coefficients(target, ps, cfg).A
    bps = [np.concatenate([ps.points[:, 0] - cfg.radius, ps.points[:, 0] + cfg.radius])]
    fine_rule = target.density.rule(cfg.radius / 4, 12, bps)
    fine = quasi_coefficients(target, ps, cfg, fine_rule).A
    assert np.max(np.abs(fine - coarse)) <= 1e-8 * np.max(np.abs(coarse))


def test_quasi_rule_panel_width(ss_ladder_instance):
    target, ps, cfg = ss_ladder_instance
    rule = quasi_rule(target, ps, cfg)
    assert isinstance(rule, QuadratureRule)
    assert rule.integrate(np.ones(len(rule.weights))) == pytest.approx(0.5, rel=1e-13)


def test_serialization(ss_ladder_instance, tmp_path):
    target, ps, cfg = ss_ladder_instance
    assert '"path": "closed-form"' in target.to_text()
    coeffs = quasi_coefficients(target, ps, cfg)
    path = tmp_path / "A.csv"
    coeffs.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "index,A" and len(lines) == len(ps) + 1
    assert float(lines[5].split(",")[1]) == coeffs.A[4]


def test_convolution_rule_refines():
    r = ConvolutionRule()
    assert r.refined().angular == 2 * r.angular
    assert certify_moments(SourceDensity(CosineBump(0.5, 0.2, 4), np.array([0.3]), np.array([0.7])), -1) == -1
