import math

import numpy as np
import pytest

from opinion_env.errors import SizeMismatch
from opinion_env.fsoe import simulate_fsoe
from opinion_env.graph import build_graph, random_connected_graph, triangle
from opinion_env.model_functions import SmoothFunction, reference_config
from opinion_env.network_dynamics import (
    INVARIANCE_OPTS, NetworkState, check_forward_invariance, check_odd_dynamics, rhs_network,
    simulate_network, sync_error, sync_error_series,
)
from opinion_env.ode_solvers import SolverOptions


class TestRhs:
    def test_origin(self, reference):
        d = rhs_network(reference.with_beta(0.5), triangle(), NetworkState(np.zeros(3), 0.0))
        assert np.all(d.x == 0.0) and d.e == 0.0

    @pytest.mark.parametrize("p", [-0.9, -0.2, 0.0, 0.4, 1.0])
    def test_consensus_decoupled_at_beta_zero(self, reference, p):
        d = rhs_network(reference.with_beta(0.0), triangle(), NetworkState.consensus(3, p, 1.7))
        assert np.allclose(d.x, -p + math.tanh(3 * p), atol=1e-15)
        assert np.ptp(d.x) == 0.0

    def test_environment_push(self, reference):
        d = rhs_network(reference.with_beta(0.6), triangle(), NetworkState(np.zeros(3), 1.0))
        assert np.allclose(d.x, -0.6 * math.tanh(3.0), atol=1e-15)
        assert d.x[0] == pytest.approx(-0.597033, abs=1e-6)
        assert d.e == pytest.approx(-0.2, abs=1e-15)

    def test_size_mismatch(self, reference):
        with pytest.raises(SizeMismatch):
            rhs_network(reference, triangle(), NetworkState(np.zeros(4), 0.0))
        with pytest.raises(SizeMismatch):
            simulate_network(reference, triangle(), NetworkState(np.zeros(2), 0.0), 1.0)

    def test_matches_dense_formula(self, reference, rng):
        cfg = reference.with_beta(0.37)
        g = random_connected_graph(9, rng)
        a = g.adjacency()
        x, e = rng.uniform(-1, 1, 9), 0.8
        d = rhs_network(cfg, g, NetworkState(x, e))
        avg = a @ np.tanh(3 * x) / a.sum(axis=1)
        expected_x = -x + 0.37 * math.tanh(-3 * e) + 0.63 * avg
        expected_e = -0.2 * e + x.mean()
        assert np.allclose(d.x, expected_x, atol=1e-14)
        assert d.e == pytest.approx(expected_e, abs=1e-14)


@pytest.mark.parametrize("x, expected", [((0.3, 0.3, 0.3), 0.0), ((-1, 1), 2.0), ((0.1, 0.4, 0.2), 0.3)])
def test_sync_error(x, expected):
    assert sync_error(x) == pytest.approx(expected, abs=1e-15)


class TestInvariance:
    def test_triangle(self, reference):
        assert check_forward_invariance(reference.with_beta(0.6), triangle(), 0.5, 0.3, 100.0) <= 1e-9

    def test_origin_exact(self, reference):
        assert check_forward_invariance(reference.with_beta(0.3), triangle(), 0.0, 0.0, 50.0) == 0.0

    def test_large_random_graph(self, reference, rng):
        g = random_connected_graph(20, rng)
        assert check_forward_invariance(reference.with_beta(0.45), g, -0.8, 2.0, 100.0) <= 1e-9

    def test_origin_trajectory_constant(self, reference):
        traj = simulate_network(reference.with_beta(0.4), triangle(), NetworkState(np.zeros(3), 0.0), 10.0)
        assert np.all(traj.states == 0.0)
        assert traj.times[-1] == 10.0

    def test_consensus_equivariance(self, reference, rng):
        g = random_connected_graph(15, rng)
        for p in rng.uniform(-1, 1, 10):
            d = rhs_network(reference.with_beta(0.3), g, NetworkState.consensus(g.n, p, rng.normal()))
            assert np.ptp(d.x) == 0.0


def test_box_invariance(reference, rng):
    for beta in (0.1, 0.6, 0.95):
        g = random_connected_graph(10, rng)
        st0 = NetworkState(rng.uniform(-1, 1, g.n), rng.uniform(-3, 3))
        traj = simulate_network(reference.with_beta(beta), g, st0, 50.0, SolverOptions.adaptive(1e-9))
        xs = traj.states[:, :-1]
        assert xs.min() >= -1 - 1e-9 and xs.max() <= 1 + 1e-9


def test_oddness(reference, rng):
    g = random_connected_graph(12, rng)
    cfg = reference.with_beta(0.5)
    for _ in range(100):
        st = NetworkState(rng.uniform(-1, 1, g.n), rng.uniform(-2, 2))
        assert check_odd_dynamics(cfg, g, st) <= 1e-12
    assert check_odd_dynamics(cfg, g, NetworkState(np.zeros(g.n), 0.0)) == 0.0


def test_oddness_broken_by_uncentred_control(reference):
    from dataclasses import replace
    cfg = replace(reference.with_beta(0.5), u=SmoothFunction.affine(1.0, 0.0))
    res = check_odd_dynamics(cfg, triangle(), NetworkState(np.array([0.2, -0.1, 0.4]), 0.3))
    assert res == pytest.approx(0.2, abs=1e-15)


@pytest.mark.parametrize("beta", [0.3, 0.59])
def test_reduction_matches_planar(reference, beta):
    cfg = reference.with_beta(beta)
    g = build_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])
    net_state, planar_state = NetworkState.consensus(5, 0.2, -0.1), (0.2, -0.1)
    worst = 0.0
    # both runs are restarted at the same checkpoints so their samples share times
    for _ in range(10):
        net = simulate_network(cfg, g, net_state, 10.0, INVARIANCE_OPTS)
        planar = simulate_fsoe(cfg, planar_state, 10.0, INVARIANCE_OPTS)
        net_state = NetworkState.from_array(net.final)
        planar_state = tuple(planar.final)
        worst = max(worst, abs(net.final[0] - planar.final[0]), abs(net.final[-1] - planar.final[1]))
    assert worst <= 1e-8


def test_underestimating_signal_synchronizes(reference, rng):
    from dataclasses import replace
    cfg = replace(reference.with_beta(0.0), s=SmoothFunction.tanh(1.0))
    g = random_connected_graph(10, rng)
    traj = simulate_network(cfg, g, NetworkState(rng.uniform(-1, 1, g.n), 0.5), 200.0,
                            SolverOptions.adaptive(1e-9))
    assert sync_error_series(traj)[-1] <= 1e-6
