import numpy as np
import pytest

from maxflowseg.capacity import CapacityFields
from maxflowseg.errors import NumericalDivergence
from maxflowseg.grid import divergence
from maxflowseg.solver import (
    FlowState,
    InnerSolverConfig,
    multiplier_step,
    project_spatial,
    sink_flow_step,
    solve_inner,
    source_flow_step,
    spatial_flow_step,
)

from .oracles import div_loops


def random_state(rng, shape=(3, 3)):
    return FlowState(p_s=rng.normal(size=shape), p_t=rng.normal(size=shape),
                     p=rng.normal(size=(2,) + shape), lam=rng.normal(size=shape))


def caps_for(C_s, C_t, C):
    return CapacityFields(np.asarray(C_s, float), np.asarray(C_t, float), C,
                          np.zeros(np.shape(C_s)), np.zeros(np.shape(C_s)))


# spatial step

def test_zero_capacity_kills_spatial_flow(rng):
    state = random_state(rng)
    out = spatial_flow_step(state, 0.0, InnerSolverConfig())
    assert not out.p.any()
    assert out.p_s is state.p_s and out.lam is state.lam


def test_spatial_step_fixed_point():
    z = np.zeros((4, 4))
    state = FlowState(p_s=z + 0.7, p_t=z + 0.7, p=np.zeros((2, 4, 4)), lam=z)
    assert not spatial_flow_step(state, 1.0, InnerSolverConfig()).p.any()


def test_spatial_step_one_by_two_grid():
    # Only the horizontal flow between the two pixels is free (call it q).
    # D = p_s + lam/c - p_t = [1.4, 1.8]; div p = [q, -q];
    # J(q) = ((q - 1.4)^2 + (-q - 1.8)^2) / 2, J'(0.1) = 0.6, q <- 0.1 - 0.11 * 0.6.
    cfg = InnerSolverConfig(c=0.3, gamma=0.11)
    p = np.zeros((2, 1, 2))
    p[1, 0, 0] = 0.1
    state = FlowState(p_s=np.array([[0.5, 0.2]]), p_t=np.array([[0.1, 0.4]]), p=p,
                      lam=np.array([[0.3, 0.6]]))
    out = spatial_flow_step(state, 1.0, cfg)
    assert out.p[1, 0, 0] == pytest.approx(0.034, abs=1e-12)
    assert out.p[0, 0, 0] == 0.0
    clipped = spatial_flow_step(state, 0.02, cfg)
    assert clipped.p[1, 0, 0] == pytest.approx(0.02, abs=1e-15)


def test_spatial_step_descends_the_quadratic(rng):
    state = random_state(rng, (5, 4))
    cfg = InnerSolverConfig(gamma=0.05)

    def J(p):
        D = state.p_s + state.lam / cfg.c - state.p_t
        return 0.5 * np.sum((div_loops(p) - D) ** 2)

    out = spatial_flow_step(state, 1e9, cfg)
    assert J(out.p) < J(state.p)


def test_projection_bounds_norm(rng):
    p = rng.normal(scale=3, size=(2, 6, 6))
    q = project_spatial(p, 0.5)
    assert np.hypot(q[0], q[1]).max() <= 0.5 + 1e-12
    small = np.hypot(p[0], p[1]) <= 0.5
    assert np.array_equal(q[:, small], p[:, small])


def test_spatial_step_raises_on_overflow():
    z = np.zeros((3, 3))
    state = FlowState(p_s=z, p_t=z, p=np.full((2, 3, 3), 1e308), lam=z)
    with pytest.raises(NumericalDivergence), np.errstate(all="ignore"):
        spatial_flow_step(state, 1.0, InnerSolverConfig(gamma=1e10))


# sink step

def test_sink_step_capacity_active(rng):
    z = np.zeros((3, 3))
    state = FlowState(p_s=rng.random((3, 3)), p_t=z, p=np.zeros((2, 3, 3)), lam=z)
    assert not sink_flow_step(state, z, InnerSolverConfig()).p_t.any()


def test_sink_step_collapses_to_min(rng):
    z = np.zeros((3, 3))
    p_s = rng.random((3, 3))
    C_t = rng.random((3, 3))
    state = FlowState(p_s=p_s, p_t=z, p=np.zeros((2, 3, 3)), lam=z)
    assert np.array_equal(sink_flow_step(state, C_t, InnerSolverConfig()).p_t, np.minimum(C_t, p_s))


def test_sink_step_matches_pointwise_oracle(rng):
    state = random_state(rng)
    C_t = rng.random((3, 3))
    cfg = InnerSolverConfig(c=0.7)
    out = sink_flow_step(state, C_t, cfg)
    d = div_loops(state.p)
    for i in range(3):
        for j in range(3):
            F = state.p_s[i, j] + state.lam[i, j] / 0.7 - d[i, j]
            assert out.p_t[i, j] == pytest.approx(min(C_t[i, j], F), abs=1e-14)
    assert (out.p_t <= C_t + 1e-12).all()


# source step

def test_source_step_derived_zero():
    z = np.zeros((3, 3))
    state = FlowState(p_s=z + 5, p_t=z, p=np.zeros((2, 3, 3)), lam=z + 1)
    out = source_flow_step(state, z + 10, InnerSolverConfig())
    assert np.array_equal(out.p_s, z)


def test_source_step_derived_half_then_clamped():
    z = np.zeros((2, 2))
    state = FlowState(p_s=z, p_t=z, p=np.zeros((2, 2, 2)), lam=z)
    cfg = InnerSolverConfig(c=2.0, clamp_source=False)
    assert np.allclose(source_flow_step(state, z + 0.1, cfg).p_s, 0.5, atol=1e-15)
    clamped = source_flow_step(state, np.array([[0.1, 0.9], [0.5, 0.2]]),
                               InnerSolverConfig(c=2.0, clamp_source=True))
    assert np.array_equal(clamped.p_s, np.array([[0.1, 0.5], [0.5, 0.2]]))


def test_source_step_as_printed():
    z = np.zeros((3, 3))
    state = FlowState(p_s=z, p_t=z + 0.3, p=np.zeros((2, 3, 3)), lam=z)
    cfg = InnerSolverConfig(c=1.0, source_mode="as_printed", clamp_source=False)
    assert np.allclose(source_flow_step(state, z, cfg).p_s, 0.65, atol=1e-15)


def test_derived_source_step_residual_identity(rng):
    state = random_state(rng, (5, 6))
    cfg = InnerSolverConfig(c=0.4, clamp_source=False)
    out = source_flow_step(state, np.zeros((5, 6)), cfg)
    np.testing.assert_allclose(out.residual_field(), -(1 - out.lam) / 0.4, rtol=0, atol=1e-12)


# multiplier step

def test_multiplier_fixed_point(rng):
    p = rng.normal(size=(2, 4, 4))
    p_t = rng.normal(size=(4, 4))
    state = FlowState(p_s=divergence(p) + p_t, p_t=p_t, p=p, lam=rng.normal(size=(4, 4)))
    out, res = multiplier_step(state, InnerSolverConfig())
    assert res <= 1e-15
    np.testing.assert_allclose(out.lam, state.lam, atol=1e-15)


def test_multiplier_unit_residual():
    z = np.zeros((3, 3))
    state = FlowState(p_s=z + 1, p_t=z, p=np.zeros((2, 3, 3)), lam=z + 0.25)
    out, res = multiplier_step(state, InnerSolverConfig(c=1.0))
    assert res == 1.0
    assert np.array_equal(out.lam, z + 1.25)


def test_multiplier_residual_matches_loop(rng):
    state = random_state(rng)
    _, res = multiplier_step(state, InnerSolverConfig())
    d = div_loops(state.p)
    expected = max(abs(d[i, j] - state.p_s[i, j] + state.p_t[i, j])
                   for i in range(3) for j in range(3))
    assert res == pytest.approx(expected, abs=1e-14)


def test_multiplier_does_not_clamp():
    z = np.zeros((2, 2))
    state = FlowState(p_s=z, p_t=z + 10, p=np.zeros((2, 2, 2)), lam=z)
    out, _ = multiplier_step(state, InnerSolverConfig(c=1.0))
    assert (out.lam == -10).all()


# full loop

def test_infinite_tolerance_returns_init(rng):
    state = random_state(rng)
    caps = caps_for(np.ones((3, 3)), np.ones((3, 3)), 0.5)
    out, diag = solve_inner(state, caps, InnerSolverConfig(tol=float("inf")))
    assert out is state
    assert diag.iterations_run == 0 and diag.residual_history == []


def test_uniform_capacities_give_uniform_labels():
    shape = (12, 12)
    caps = caps_for(np.full(shape, 0.4), np.full(shape, 0.4), 0.2)
    init = FlowState(p_s=np.full(shape, 0.4), p_t=np.full(shape, 0.4), p=np.zeros((2,) + shape),
                     lam=np.full(shape, 0.5))
    out, _ = solve_inner(init, caps, InnerSolverConfig())
    assert np.ptp(out.lam) == 0.0


def test_two_region_partition_recovered():
    shape = (16, 16)
    region_a = np.zeros(shape, bool)
    region_a[3:11, 2:9] = True
    C_s = np.where(region_a, 1.0, 0.0)
    C_t = np.where(region_a, 0.0, 1.0)
    init = FlowState.zeros(shape, lam=0.5)
    out, diag = solve_inner(init, caps_for(C_s, C_t, 0.01), InnerSolverConfig(max_iters=2000))
    assert diag.final_residual <= 1e-4
    # Paying C_t (lam = 1) is cheaper wherever C_s > C_t.
    assert np.array_equal(out.lam >= 0.5, C_s > C_t)


def test_feasibility_invariants_hold(rng):
    shape = (10, 10)
    C_s = rng.random(shape)
    C_t = rng.random(shape)
    out, diag = solve_inner(FlowState.zeros(shape, 0.5), caps_for(C_s, C_t, 0.3),
                            InnerSolverConfig(max_iters=50))
    assert (out.p_t <= C_t + 1e-12).all()
    assert (out.p_s <= C_s + 1e-12).all()
    assert np.hypot(out.p[0], out.p[1]).max() <= 0.3 + 1e-12
    assert len(diag.residual_history) == diag.iterations_run == 50 or diag.final_residual <= 1e-4


def test_solver_is_deterministic(rng):
    shape = (9, 7)
    caps = caps_for(rng.random(shape), rng.random(shape), 0.2)
    a, da = solve_inner(FlowState.zeros(shape, 0.5), caps)
    b, db = solve_inner(FlowState.zeros(shape, 0.5), caps)
    for x, y in ((a.p_s, b.p_s), (a.p_t, b.p_t), (a.p, b.p), (a.lam, b.lam)):
        assert np.array_equal(x, y)
    assert da.residual_history == db.residual_history


def test_divergence_reports_iteration(rng):
    shape = (8, 8)
    caps = caps_for(rng.random(shape), rng.random(shape), np.inf)
    init = FlowState(p_s=np.zeros(shape), p_t=np.zeros(shape),
                     p=rng.choice([-1e307, 1e307], size=(2,) + shape), lam=np.zeros(shape))
    with pytest.raises(NumericalDivergence) as err:
        solve_inner(init, caps, InnerSolverConfig(gamma=50.0))
    assert err.value.inner_iteration == 1
    assert "inner iteration 1" in str(err.value)


def test_non_finite_start_is_rejected():
    init = FlowState.zeros((3, 3))
    init.lam[1, 1] = np.nan
    with pytest.raises(NumericalDivergence):
        solve_inner(init, caps_for(np.ones((3, 3)), np.ones((3, 3)), 1.0))


@pytest.mark.parametrize("kwargs", [{"c": 0}, {"gamma": -1}, {"tol": 0}, {"source_mode": "x"}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        InnerSolverConfig(**kwargs)
