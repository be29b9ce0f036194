import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfd.differentiator import (ErrorState, EstimatorState, consensus_control, dfd_a_step,
                                dfd_r_step, error_system_step, innovation_absolute,
                                innovation_relative, pinned_laplacian, signed_power)
from dfd.gains import GainSet, derived_constants
from dfd.graph import build_graph, graph_certificate, random_graph
from dfd.sim import scenario_vi_a, scenario_vi_b, scenario_vi_c
from dfd.sim.integrate import initial_state, rhs


def gains_of(k1, k2, l=1.0, rho=0.75, w=(1.0,)):
    return GainSet.from_constants(k1, k2, derived_constants(rho, w, l))


finite = st.floats(-1e6, 1e6, allow_nan=False)
exponent = st.floats(0.0, 3.0)


def test_signed_power_examples():
    assert signed_power(4, 0.5) == 2.0
    assert signed_power(-4, 0.5) == -2.0
    assert signed_power(-3, 0) == -1.0
    assert signed_power(0, 0) == 0.0
    assert signed_power(0.25, 0.5) == 0.5
    with pytest.raises(ValueError):
        signed_power(1.0, -0.5)


def test_signed_power_vectorised():
    np.testing.assert_array_equal(signed_power(np.array([-4.0, 0.0, 9.0]), 0.5), [-2, 0, 3])


@given(finite, exponent)
def test_signed_power_odd(x, a):
    assert signed_power(-x, a) == -signed_power(x, a)


@given(finite, exponent)
def test_signed_power_sign_agrees(x, a):
    assert x * signed_power(x, a) >= 0


def test_signed_power_odd_bulk(rng):
    x = rng.normal(scale=10, size=10_000)
    a = rng.uniform(0, 3, size=10_000)
    assert np.array_equal(signed_power(-x, 0.5), -signed_power(x, 0.5))
    sp = np.sign(x) * np.abs(x) ** a
    assert np.array_equal(np.sign(-x) * np.abs(-x) ** a, -sp)


def test_innovation_zero_at_exact_estimate(cycle4):
    x = np.array([0.3, -1.0, 2.0, 0.5])
    f = 0.7
    np.testing.assert_array_equal(innovation_relative(x - f, x, f, cycle4), 0.0)


def test_innovation_single_pinned_agent():
    g = build_graph([[0.0]], [1.0])
    assert innovation_relative([0.4], [1.0], 0.25, g)[0] == pytest.approx(0.4 - (1.0 - 0.25))


def test_innovation_identity_random(rng):
    for _ in range(300):
        g = random_graph(int(rng.integers(1, 9)), rng)
        M = pinned_laplacian(g)
        x, p = rng.normal(size=(2, g.n))
        f = float(rng.normal())
        e = p - (x - f)
        y = innovation_relative(p, x, f, g)
        assert np.abs(y - M @ e).max() <= 1e-12 * max(1.0, np.abs(M @ e).max()) * 10
        ya = innovation_absolute(p, f, g)
        np.testing.assert_allclose(ya, M @ (p - f), rtol=1e-12, atol=1e-12)


def test_innovation_ignores_leader_at_unpinned(cycle4):
    # f only enters through pinned agents, so nan elsewhere is harmless
    y = innovation_absolute(np.zeros(4), 1.0, cycle4)
    np.testing.assert_array_equal(y, [-1, 0, 0, 0])


def test_dfd_r_step_nominal_chain():
    g = gains_of(5, 4)
    s = EstimatorState(np.array([1.0, 2.0]), np.array([0.5, -0.5]))
    d = dfd_r_step(s, np.zeros(2), np.array([0.1, 0.2]), g)
    np.testing.assert_array_equal(d.p_hat, s.q_hat)
    np.testing.assert_array_equal(d.q_hat, [0.1, 0.2])


def test_dfd_r_step_single_agent_positive_y():
    g = gains_of(3, 2)
    d = dfd_r_step(EstimatorState(np.array([0.0]), np.array([1.0])), np.array([0.49]), 0.3, g)
    assert d.p_hat[0] == pytest.approx(1.0 - 3 * 0.7)
    assert d.q_hat[0] == pytest.approx(-2 + 0.3)


def test_dfd_r_step_rejects_nonfinite():
    with pytest.raises(ValueError):
        dfd_r_step(EstimatorState(np.array([np.nan]), np.array([0.0])), np.zeros(1), 0.0,
                   gains_of(1, 1))


def test_dfd_r_vi_a_initial_derivative():
    # x(0) = [0,1,1,0], estimates zero, f(0) = 0 -> y = [0,-1,0,1] (hand expansion on the cycle)
    cfg = scenario_vi_a()
    g = gains_of(5, 4, w=np.ones(4))
    y = innovation_relative(np.zeros(4), np.array([0, 1, 1, 0.0]), 0.0, cfg.graph)
    np.testing.assert_array_equal(y, [0, -1, 0, 1])
    d = dfd_r_step(EstimatorState(np.zeros(4), np.zeros(4)), y, np.zeros(4), g)
    np.testing.assert_array_equal(d.p_hat, [0, 5, 0, -5])
    np.testing.assert_array_equal(d.q_hat, [0, 4, 0, -4])


def test_dfd_a_fixed_manifold():
    g = random_graph(5, np.random.default_rng(1))
    gs = gains_of(5, 4)
    q = np.array([0.3, -0.2, 1.0, 0.0, 2.0])
    d = dfd_a_step(EstimatorState(np.full(5, 0.8), q), 0.8, g, gs)
    np.testing.assert_array_equal(d.p_hat, q)
    np.testing.assert_array_equal(d.q_hat, 0.0)
    fdot = 0.37
    d = dfd_a_step(EstimatorState(np.full(5, 0.8), np.full(5, fdot)), 0.8, g, gs)
    np.testing.assert_array_equal(d.p_hat, fdot)


def test_dfd_a_vi_b_initial_derivative(cycle4):
    # f(0) = 0.25 is seen only by agent 1: y = [-0.25, 0, 0, 0]
    d = dfd_a_step(EstimatorState(np.zeros(4), np.zeros(4)), 0.25, cycle4, gains_of(5, 4))
    np.testing.assert_allclose(d.p_hat, [2.5, 0, 0, 0], rtol=1e-15)
    np.testing.assert_array_equal(d.q_hat, [4, 0, 0, 0])


def test_consensus_fixed_point(cycle4):
    u, vd = consensus_control(np.full(4, -0.3), -0.3, np.zeros(4), 1.0, gains_of(8, 6), cycle4)
    np.testing.assert_array_equal(u, 0.0)
    np.testing.assert_array_equal(vd, 0.0)


def test_consensus_unit_input_gain(cycle4, rng):
    s, v = rng.normal(size=(2, 4))
    gs = gains_of(8, 6)
    u, _ = consensus_control(s, 0.2, v, np.ones(4), gs, cycle4)
    y = innovation_absolute(s, 0.2, cycle4)
    np.testing.assert_allclose(u, v - 8 * signed_power(y, 0.5), rtol=1e-15)
    u2, _ = consensus_control(s, 0.2, v, 2 * np.ones(4), gs, cycle4)
    np.testing.assert_allclose(u2, u / 2, rtol=1e-15)


def test_consensus_vi_c_initial_control(cycle4):
    # y = [(1-2)+(1+1), 1.5-1, -1-1.5, 2+1] = [1, 0.5, -2.5, 3]
    u, vd = consensus_control(np.array([1, 1.5, -1, 2.0]), -1.0, np.zeros(4), 1.0,
                              gains_of(8, 6), cycle4)
    np.testing.assert_allclose(u, [-8, -8 * math.sqrt(0.5), 8 * math.sqrt(2.5), -8 * math.sqrt(3)],
                               rtol=1e-15)
    np.testing.assert_array_equal(vd, [-6, -6, 6, -6])


def test_consensus_rejects_nonpositive_input_gain(cycle4):
    with pytest.raises(ValueError):
        consensus_control(np.zeros(4), 0.0, np.zeros(4), [1, 0, 1, 1], gains_of(8, 6), cycle4)


def test_error_system_equilibrium(cycle4):
    err = ErrorState.from_errors(np.zeros(4), np.zeros(4), cycle4)
    de, dz = error_system_step(err, np.zeros(4), gains_of(5, 4), cycle4)
    np.testing.assert_array_equal(de, 0.0)
    np.testing.assert_array_equal(dz, 0.0)


@pytest.mark.parametrize("b, gain", [(1.0, 1.0), (2.0, 2.0)])
def test_error_system_single_agent(b, gain):
    # L = 0, so y = b e
    g = build_graph([[0.0]], [b])
    err = ErrorState.from_errors([0.3], [0.0], g)
    de, dz = error_system_step(err, [0.0], gains_of(5, 4), g)
    assert de[0] == pytest.approx(-5 * math.sqrt(gain * 0.3), rel=1e-15)
    assert dz[0] == -4.0


def test_error_system_warns_above_bound(cycle4):
    err = ErrorState.from_errors(np.ones(4), np.zeros(4), cycle4)
    with pytest.warns(RuntimeWarning, match="exceeds bound"):
        error_system_step(err, np.full(4, 2.0), gains_of(5, 4, l=1.0), cycle4)


@pytest.mark.parametrize("factory", [scenario_vi_a, scenario_vi_b, scenario_vi_c])
def test_compiled_rhs_matches_step_functions(factory, rng):
    cfg = factory()
    cert = graph_certificate(cfg.graph)
    gs = cfg.resolve_gains(cert)
    n = cfg.n
    for _ in range(20):
        t = float(rng.uniform(0, 20))
        state = initial_state(cfg) + rng.normal(size=initial_state(cfg).size)
        out = rhs(cfg, gs, t, state)
        if cfg.mode == "dfd_r":
            x, xd, p, q = state.reshape(4, n)
            f = cfg.leader(t)
            y = innovation_relative(p, x, f, cfg.graph)
            d = dfd_r_step(EstimatorState(p, q), y, np.zeros(n), gs)
            delta = np.array([s(t) for s in cfg.disturbances])
            ref = np.concatenate([xd, delta, d.p_hat, d.q_hat])
        elif cfg.mode == "dfd_a":
            p, q = state.reshape(2, n)
            d = dfd_a_step(EstimatorState(p, q), cfg.leader(t), cfg.graph, gs)
            ref = np.concatenate([d.p_hat, d.q_hat])
        else:
            s0, s, v = state[0], state[1:1 + n], state[1 + n:]
            u, vd = consensus_control(s, s0, v, np.ones(n), gs, cfg.graph)
            a = np.array([sig(t) for sig in cfg.disturbances])
            ref = np.concatenate([[cfg.leader(t)], a + u, vd])
        np.testing.assert_allclose(out, ref, rtol=1e-12, atol=1e-12)


@settings(max_examples=200)
@given(st.integers(1, 6), st.integers(0, 2**31))
def test_compiled_error_rhs_matches(n, seed):
    from dfd.sim import GainSpec, ScenarioConfig, Signal

    rng = np.random.default_rng(seed)
    g = random_graph(n, rng)
    cert = graph_certificate(g)
    dist = tuple(Signal.of((float(rng.normal()), float(rng.uniform(0, 2)), "sin")) for _ in range(n))
    cfg = ScenarioConfig("e", "error", g, GainSpec(k1=3.0, k2=2.0, l=5.0), disturbances=dist)
    gs = cfg.resolve_gains(cert)
    e, z = rng.normal(size=(2, n))
    t = float(rng.uniform(0, 5))
    out = rhs(cfg, gs, t, np.concatenate([e, z]))
    de, dz = error_system_step(ErrorState.from_errors(e, z, g), [s(t) for s in dist], gs, g)
    np.testing.assert_allclose(out, np.concatenate([de, dz]), rtol=1e-12, atol=1e-12)
