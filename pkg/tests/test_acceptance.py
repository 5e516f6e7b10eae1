"""Acceptance criteria for the reference setup.

s = tanh(3x), r = tanh(-3x), u(x) = x + gamma ebar, ebar = 0.5, gamma = 0.2,
tau_x = tau_e = 1. Each test records one PASS/FAIL line, printed in the
terminal summary, and then asserts the same condition.
"""

import math
import time

import numpy as np
import pytest

from opinion_env import bifurcation as bf
from opinion_env.fsoe import eigenvalues_2x2, find_fixed_points, origin_jacobian, rhs_fsoe
from opinion_env.graph import random_connected_graph
from opinion_env.model_functions import reference_config
from opinion_env.network_dynamics import NetworkState, check_forward_invariance, check_odd_dynamics
from opinion_env.ode_solvers import SolverOptions, integrate

from conftest import ACCEPTANCE_RESULTS

CFG = reference_config()


def record(number, title, ok, detail):
    ACCEPTANCE_RESULTS.append((number, title, bool(ok), detail))
    assert ok, detail


@pytest.fixture(scope="module")
def hopf_refined():
    d = bf.sweep_beta(CFG, 0.0, 1.0, 500)
    (h,) = d.points_of(bf.Kind.HOPF, bf.Detection.NUMERIC)
    return h.beta


def test_01_hopf_location():
    t0 = time.perf_counter()
    loc = bf.hopf_locus(CFG)
    d = bf.sweep_beta(CFG, 0.0, 1.0, 500)
    numeric = d.points_of(bf.Kind.HOPF, bf.Detection.NUMERIC)
    elapsed = time.perf_counter() - t0
    closed_err = abs(loc.beta_star - 0.6)
    gap = abs(numeric[0].beta - loc.beta_star) if len(numeric) == 1 else math.inf
    ok = closed_err <= 1e-12 and gap <= 1e-6 and elapsed < 1.0
    record(1, "Hopf location", ok,
           f"closed form {loc.beta_star!r} (err {closed_err:.1e}), numeric gap {gap:.1e}, {elapsed:.2f}s")


def test_02_equilibrium_count_transition():
    t0 = time.perf_counter()
    n_before = len(find_fixed_points(CFG.with_beta(0.24)))
    n_after = len(find_fixed_points(CFG.with_beta(0.25)))
    elapsed = time.perf_counter() - t0
    ok = n_before == 5 and n_after == 1 and elapsed < 0.1
    record(2, "Equilibrium-count transition", ok, f"{n_before} roots at 0.24, {n_after} at 0.25, {elapsed:.3f}s")


def test_03_cycle_collapse():
    t0 = time.perf_counter()
    before = bf.limit_cycle_amplitude(CFG, 0.59, t_transient=300, t_measure=200)
    after = bf.limit_cycle_amplitude(CFG, 0.61, t_transient=300, t_measure=200)
    elapsed = time.perf_counter() - t0
    ok = before is not None and before.amplitude > 1e-2 and after is None and elapsed < 5.0
    amp = f"{before.amplitude:.4f}" if before else "none"
    record(3, "Cycle collapse across the Hopf point", ok,
           f"amplitude {amp} at 0.59, {'none' if after is None else 'cycle'} at 0.61, {elapsed:.2f}s")


def test_04_origin_pitchfork():
    t0 = time.perf_counter()
    zero = bf.gamma_for_zero_eigenvalue(CFG.with_beta(1 / 9))
    beta_inv = bf.beta_for_zero_eigenvalue(CFG)
    d = bf.sweep_beta(CFG, 0.0, 0.2, 100)
    (pf,) = d.points_of(bf.Kind.PITCHFORK, bf.Detection.NUMERIC)
    below = find_fixed_points(CFG.with_beta(1 / 9 - 0.01))
    above = find_fixed_points(CFG.with_beta(1 / 9 + 0.01))
    elapsed = time.perf_counter() - t0
    symmetric = all(np.allclose(r, -np.array(r)[::-1], atol=1e-10) for r in (below, above))
    ok = (zero.feasible and abs(zero.gamma - 0.2) <= 1e-12 and abs(beta_inv - 1 / 9) <= 1e-12
          and abs(pf.beta - 1 / 9) <= 1e-6 and len(below) == 3 and len(above) == 5
          and symmetric and elapsed < 1.0)
    record(4, "Origin pitchfork point", ok,
           f"gamma {zero.gamma!r}, beta {beta_inv!r}, numeric {pf.beta:.10f}, "
           f"count {len(below)} -> {len(above)}, {elapsed:.2f}s")


def test_05_double_zero_roots():
    t0 = time.perf_counter()
    dz = bf.beta_double_zero(CFG)
    elapsed = time.perf_counter() - t0
    ok = (abs(dz.delta_beta - 81) <= 1e-12 and abs(dz.beta_minus - 1 / 3) <= 1e-12
          and abs(dz.beta_plus - 4 / 3) <= 1e-12 and dz.minus_admissible and not dz.plus_admissible
          and elapsed < 0.01)
    record(5, "Double-zero roots", ok,
           f"Delta {dz.delta_beta!r}, beta- {dz.beta_minus!r}, beta+ {dz.beta_plus!r}, {elapsed * 1e3:.2f}ms")


def test_06_omega_consistency(hopf_refined):
    j = origin_jacobian(CFG.with_beta(hopf_refined))
    lam = eigenvalues_2x2(j)[0]
    gap = abs(math.sqrt(j.det) - abs(lam.imag))
    ok = gap <= 1e-8 and abs(abs(lam.imag) - 1.3266499) <= 1e-7
    record(6, "omega0 consistency", ok, f"sqrt(det) {math.sqrt(j.det):.10f}, |Im lambda| {abs(lam.imag):.10f}")


def test_07_pitchfork_coefficient():
    info = bf.pitchfork_coefficient(CFG, 1 / 9, 0.2)
    cfg = CFG.with_beta(1 / 9)
    v = np.array(info.eigenvector_v)
    h = 1e-4

    def f(t):
        return np.array(rhs_fsoe(cfg, tuple(t * v)))

    d3 = (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h**3)
    w = np.array([1.0, (1 / 9) * -3.0 / 0.2])  # left kernel vector (1, beta r'(0) / gamma)
    fd = float(w @ d3)
    ok = abs(info.coefficient_c - 702) <= 1e-9 * 702 and abs(fd - info.coefficient_c) <= 1e-4 * abs(info.coefficient_c)
    record(7, "Pitchfork coefficient", ok, f"c {info.coefficient_c!r}, finite-difference {fd:.6f}")


def test_08_hopf_coefficient_side():
    info = bf.hopf_coefficient(CFG, 0.6, 0.2)
    before = bf.limit_cycle_amplitude(CFG, 0.59)
    after = bf.limit_cycle_amplitude(CFG, 0.61)
    simulated_below = before is not None and after is None
    ok = abs(info.h21.real) > 1e-10 and info.supercritical_side is bf.CycleSide.BELOW and simulated_below
    record(8, "Hopf coefficient cross-validation", ok,
           f"h21 {info.h21:.6g}, predicted side {info.supercritical_side.value}, "
           f"simulated {'below' if simulated_below else 'mismatch'}")


def test_09_eigenvalue_crossing_slope():
    loc = bf.hopf_locus(CFG)
    h = 1e-6
    re = [eigenvalues_2x2(origin_jacobian(CFG.with_beta(loc.beta_star + d)))[0].real for d in (-h, h)]
    slope = (re[1] - re[0]) / (2 * h)
    expected = -3.0
    ok = abs(slope - expected) <= 1e-3 * abs(expected)
    record(9, "Eigenvalue-crossing slope", ok, f"d Re(lambda)/d beta = {slope:.9f}, expected {expected}")


def test_10_forward_invariance():
    rng = np.random.default_rng(42)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        g = random_connected_graph(int(rng.integers(2, 21)), rng)
        cfg = CFG.with_beta(float(rng.uniform(0, 1)))
        worst = max(worst, check_forward_invariance(cfg, g, float(rng.uniform(-1, 1)), float(rng.uniform(-2, 2)),
                                                    100.0, SolverOptions.adaptive(1e-10)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 10.0
    record(10, "Forward invariance", ok, f"max sync error {worst:.3g} over 20 graphs, {elapsed:.2f}s")


def test_11_oddness():
    rng = np.random.default_rng(42)
    g = random_connected_graph(15, rng)
    worst = 0.0
    for _ in range(100):
        cfg = CFG.with_beta(float(rng.uniform(0, 1)))
        st = NetworkState(rng.uniform(-1, 1, g.n), rng.uniform(-2, 2))
        worst = max(worst, check_odd_dynamics(cfg, g, st))
    record(11, "Oddness", worst <= 1e-12, f"max residual {worst:.3g} on 100 states")


def test_12_solver_order():
    traj = integrate(lambda t, y: -y, [1.0], 0.0, 1.0, SolverOptions.adaptive(1e-10))
    err = abs(traj.final[0] - math.exp(-1))
    e1, e2 = (abs(integrate(lambda t, y: -y, [1.0], 0.0, 1.0, SolverOptions.rk4(h)).final[0] - math.exp(-1))
              for h in (0.1, 0.05))
    ok = err <= 1e-8 and e1 / e2 >= 14
    record(12, "Solver order and correctness", ok, f"adaptive error {err:.2e}, RK4 halving ratio {e1 / e2:.2f}")
