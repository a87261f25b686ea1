import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbfsobolev.errors import ParameterError, StencilError
from rbfsobolev.geometry import Domain, PointSet, generate_point_set
from rbfsobolev.polyrepro import (LocalReproduction, ReproConfig, build_local_weights, check_reproduction,
                                  choose_K, default_degree, local_weights_batch, stability_constant,
                                  stability_sweep, write_sweep_csv)


def test_two_point_examples():
    ps = PointSet([0.0, 1.0])
    rep = build_local_weights(ps, ReproConfig(1, 1, 0.5), [0.5])
    assert np.allclose(rep.weights, [0.5, 0.5], atol=1e-15)
    rep = build_local_weights(ps, ReproConfig(1, 2, 0.5), [0.0])
    assert np.allclose(rep.weights[np.argsort(rep.indices)], [1.0, 0.0], atol=1e-15)


def test_stencil_too_small():
    ps = PointSet([0.0, 1.0])
    with pytest.raises(StencilError, match="increase K"):
        build_local_weights(ps, ReproConfig(1, 1, 0.5), [0.0])
    with pytest.raises(ParameterError):
        ReproConfig(-1, 2, 0.1)


def test_nodes_as_probes_sum_to_one():
    ps = generate_point_set(Domain.unit(1), 5, 0.3, seed=4)
    K = choose_K(ps, 2, ps.points)
    reps = local_weights_batch(ps, ReproConfig(2, K, ps.h), ps.points)
    assert all(abs(r.weights.sum() - 1) <= 1e-10 for r in reps)
    assert all(r.abs_sum >= 1 - 1e-12 for r in reps)


def test_uniform_grid_linear_gamma_is_one():
    ps = generate_point_set(Domain.unit(1), 5)
    probe = np.linspace(0, 1, 1001)
    assert stability_constant(ps, ReproConfig(1, 2, ps.h), probe) == pytest.approx(1.0, abs=1e-12)


def test_jittered_quadratic_gamma_sweep():
    probe = np.random.default_rng(0).random(500)
    for level in (5, 6, 7):
        ps = generate_point_set(Domain.unit(1), level, 0.3, seed=1 + level)
        K = choose_K(ps, 2, probe)
        assert stability_constant(ps, ReproConfig(2, K, ps.h), probe) <= 5


def test_locality_and_reproduction():
    ps = generate_point_set(Domain.unit(2), 3, 0.3, seed=9)
    cfg = ReproConfig(2, 3, ps.h)
    probe = np.random.default_rng(1).random((50, 2))
    for rep in local_weights_batch(ps, cfg, probe):
        assert np.all(np.linalg.norm(rep.points - rep.z, axis=1) <= cfg.radius * (1 + 1e-12))
        assert check_reproduction(rep, 2) <= 1e-9
        assert abs(rep.weights.sum() - 1) <= 1e-10


def test_perturbation_detected():
    ps = generate_point_set(Domain.unit(1), 4)
    rep = build_local_weights(ps, ReproConfig(2, 3, ps.h), [0.37])
    w = rep.weights.copy()
    w[0] += 1e-3
    bad = LocalReproduction(rep.z, rep.indices, rep.points, w, rep.radius)
    assert check_reproduction(bad, 2) >= 1e-4


def test_constant_only_reproduction():
    rep = LocalReproduction(np.array([0.5]), np.array([0, 1]), np.array([[0.2], [0.9]]),
                            np.array([0.25, 0.75]), 1.0)
    assert check_reproduction(rep, 0) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(-10, 10), st.floats(0.1, 10), st.integers(0, 10_000))
def test_translation_and_scaling_covariance(shift, scale, seed):
    rng = np.random.default_rng(seed)
    ps = generate_point_set(Domain.unit(1), 4, 0.3, seed)
    z = rng.random(5)
    moved = PointSet(scale * ps.points + shift, Domain((shift,), (shift + scale,)))
    K = choose_K(ps, 2, z)
    base = local_weights_batch(ps, ReproConfig(2, K, ps.h), z)
    other = local_weights_batch(moved, ReproConfig(2, K, scale * ps.h), scale * z + shift)
    for a, b in zip(base, other):
        assert np.array_equal(a.indices, b.indices)
        assert np.allclose(a.weights, b.weights, rtol=0, atol=1e-12)


def test_weights_continuous_when_stencil_fixed():
    ps = generate_point_set(Domain.unit(1), 4)
    cfg = ReproConfig(2, 3, ps.h)
    # stencils change only at odd multiples of 1/32; none lies in [0.41, 0.46]
    zs = np.linspace(0.41, 0.46, 101)
    reps = local_weights_batch(ps, cfg, zs)
    assert len({tuple(r.indices) for r in reps}) == 1
    W = np.array([r.weights for r in reps])
    assert np.max(np.abs(np.diff(W, axis=0))) < 1e-2


def test_choose_K_and_default_degree():
    ps = generate_point_set(Domain.unit(1), 5)
    probe = np.linspace(0, 1, 101)
    assert choose_K(ps, 1, probe) == 2.0
    # degree 3 needs four centers at z = 0, which first happens at radius 6h = 3 spacings
    assert choose_K(ps, 3, probe) == 6.0
    with pytest.raises(StencilError):
        choose_K(PointSet([0.0, 1.0]), 4, [0.5])
    assert default_degree(3.0, 1) == 5
    assert default_degree(2.5, 2) == 6


def test_sweep_csv(tmp_path):
    ps = generate_point_set(Domain.unit(1), 3)
    rows = stability_sweep(ps, ReproConfig(1, 2, ps.h), [0.1, 0.6])
    path = tmp_path / "sweep.csv"
    write_sweep_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "z0,stencil,abs_sum,residual"
    assert len(lines) == 3
