"""Cross-checks of closed-form predictions against numerical evidence.

:func:`run_verify` is what ``opinion-env verify`` prints. Each check yields
PASS, FAIL, N/A (condition infeasible for this configuration) or INFO.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass
from math import factorial

import numpy as np

from . import bifurcation as bf
from . import fsoe
from .errors import Infeasible, NotHopfPoint, NotSingular, SolverFailure
from .graph import random_connected_graph, triangle
from .model_functions import ModelConfig, check_odd_symmetry, eval_with_derivatives, validate_config
from .network_dynamics import NetworkState, check_forward_invariance, check_odd_dynamics

FD_STEPS = {1: 1e-4, 2: 1e-3, 3: 1e-2}
FD_RTOL = 1e-5
INVARIANCE_TOL = 1e-9
ODD_DYNAMICS_TOL = 1e-12
AGREEMENT_TOL = 1e-6
OMEGA_TOL = 1e-8


class Status(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    NA = "N/A"
    INFO = "INFO"


@dataclass(frozen=True)
class Check:
    name: str
    status: Status
    detail: str = ""
    seconds: float = 0.0


def central_weights(order: int, accuracy: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of the central stencil for ``d^order/dx^order``."""
    m = (order + 1) // 2 - 1 + accuracy // 2
    offsets = np.arange(-m, m + 1)
    taylor = np.vander(offsets, increasing=True).T.astype(float)
    rhs = np.zeros(offsets.size)
    rhs[order] = factorial(order)
    return offsets, np.linalg.solve(taylor, rhs)


def central_difference(f, x, order: int, h: float, accuracy: int = 6):
    offsets, w = central_weights(order, accuracy)
    return sum(wi * f(x + oi * h) for oi, wi in zip(offsets, w)) / h**order


def derivative_fd_error(f, lo: float = -2.0, hi: float = 2.0, n: int = 1001) -> float:
    """Worst relative gap between analytic and finite-difference derivatives 1..3.

    The relative error is taken against ``max(|analytic|, 1)``.
    """
    xs = np.linspace(lo, hi, n)
    exact = eval_with_derivatives(f, xs)
    worst = 0.0
    for order, h in FD_STEPS.items():
        fd = central_difference(f, xs, order, h)
        rel = np.abs(fd - exact[order]) / np.maximum(np.abs(exact[order]), 1.0)
        worst = max(worst, float(np.max(rel)))
    return worst


def _timed(name, fn) -> Check:
    t0 = time.perf_counter()
    try:
        status, detail = fn()
    except (SolverFailure, ValueError, ZeroDivisionError) as exc:
        status, detail = Status.FAIL, f"{type(exc).__name__}: {exc}"
    return Check(name, status, detail, time.perf_counter() - t0)


def run_verify(cfg: ModelConfig, sweep_steps: int = 201, seed: int = 42) -> list[Check]:
    """Run the invariant suite for `cfg` (its ``beta`` is ignored)."""
    rng = np.random.default_rng(seed)
    checks: list[Check] = []
    add = checks.append

    def config_check():
        rep = validate_config(cfg)
        if rep.hard_errors:
            return Status.FAIL, "; ".join(rep.hard_errors)
        return Status.PASS, "; ".join(rep.warnings) or "no warnings"

    add(_timed("config ranges", config_check))

    def fd_check():
        errs = {name: derivative_fd_error(getattr(cfg, name)) for name in ("s", "r", "u")}
        worst = max(errs.values())
        detail = ", ".join(f"{k}: {v:.1e}" for k, v in errs.items())
        return (Status.PASS if worst <= FD_RTOL else Status.FAIL), detail

    add(_timed("derivatives vs finite differences", fd_check))

    def odd_check():
        viol = check_odd_symmetry(cfg)
        if not viol:
            return Status.PASS, "s, r odd; u(x) + u(-x) = 2 gamma ebar"
        worst = max(viol, key=lambda v: v.residual)
        return Status.FAIL, f"{len(viol)} violations, worst {worst.function}: {worst.residual:.3g}"

    add(_timed("odd symmetry of s, r, u", odd_check))

    g_rand = random_connected_graph(12, rng)

    def odd_dyn_check():
        c = cfg.with_beta(0.5)
        worst = 0.0
        for _ in range(100):
            st = NetworkState(rng.uniform(-1, 1, g_rand.n), rng.uniform(-2, 2))
            worst = max(worst, check_odd_dynamics(c, g_rand, st))
        return (Status.PASS if worst <= ODD_DYNAMICS_TOL else Status.FAIL), f"max residual {worst:.3g}"

    add(_timed("odd network dynamics", odd_dyn_check))

    def invariance_check():
        worst = max(check_forward_invariance(cfg.with_beta(b), triangle(), 0.5, 0.3, 100.0)
                    for b in (0.3, 0.6))
        return (Status.PASS if worst <= INVARIANCE_TOL else Status.FAIL), f"max sync error {worst:.3g}"

    add(_timed("forward invariance (triangle)", invariance_check))

    diagram = bf.sweep_beta(cfg, 0.0, 1.0, sweep_steps, cycles=False)

    def agreement(kind):
        closed = diagram.points_of(kind, bf.Detection.CLOSED_FORM)
        numeric = diagram.points_of(kind, bf.Detection.NUMERIC)
        if not closed and not numeric:
            return Status.NA, "condition infeasible, nothing detected numerically"
        if not closed or not numeric:
            return Status.FAIL, f"closed-form {[p.beta for p in closed]} vs numeric {[p.beta for p in numeric]}"
        gap = max(min(abs(c.beta - n.beta) for n in numeric) for c in closed)
        detail = f"closed {closed[0].beta:.10f}, numeric {numeric[0].beta:.10f}, gap {gap:.2e}"
        return (Status.PASS if gap <= AGREEMENT_TOL else Status.FAIL), detail

    add(_timed("pitchfork: closed form vs det sign change", lambda: agreement(bf.Kind.PITCHFORK)))
    add(_timed("Hopf: closed form vs trace sign change", lambda: agreement(bf.Kind.HOPF)))

    def pitchfork_coef():
        try:
            b = bf.beta_for_zero_eigenvalue(cfg)
            info = bf.pitchfork_coefficient(cfg, b, cfg.gamma)
        except (Infeasible, NotSingular) as exc:
            return Status.NA, str(exc)
        if info.degenerate:
            return Status.FAIL, f"c = {info.coefficient_c:.6g} (degenerate)"
        return Status.PASS, (f"beta* = {b:.10f}, c = {info.coefficient_c:.10g}, "
                             f"v = (1, {info.eigenvector_v[1]:.6g})")

    add(_timed("pitchfork coefficient nonzero", pitchfork_coef))

    def hopf_side():
        try:
            loc = bf.hopf_locus(cfg)
            info = bf.hopf_coefficient(cfg, loc.beta_star, loc.gamma)
        except (Infeasible, NotHopfPoint) as exc:
            return Status.NA, str(exc)
        if info.supercritical_side is bf.CycleSide.UNDETERMINED:
            return Status.FAIL, f"Re(h21) = {info.h21.real:.3g}"
        below = bf.limit_cycle_amplitude(cfg, loc.beta_star - 0.01)
        above = bf.limit_cycle_amplitude(cfg, loc.beta_star + 0.01)
        ok = below is not None and above is None
        detail = (f"Re(h21) = {info.h21.real:.6g}; cycle at beta*-0.01: "
                  f"{'amplitude %.4g' % below.amplitude if below else 'none'}; "
                  f"at beta*+0.01: {'amplitude %.4g' % above.amplitude if above else 'none'}")
        return (Status.PASS if ok else Status.FAIL), detail

    add(_timed("Hopf coefficient and cycle side", hopf_side))

    def omega_check():
        numeric = diagram.points_of(bf.Kind.HOPF, bf.Detection.NUMERIC)
        if not numeric:
            return Status.NA, "no Hopf point"
        b = numeric[0].beta
        j = fsoe.origin_jacobian(cfg.with_beta(b))
        lam = fsoe.eigenvalues_2x2(j)[0]
        gap = abs(abs(lam.imag) - math.sqrt(j.det))
        return (Status.PASS if gap <= OMEGA_TOL else Status.FAIL), \
            f"|Im lambda| = {abs(lam.imag):.10f}, sqrt(det) = {math.sqrt(j.det):.10f}"

    add(_timed("omega0 = |Im lambda| at Hopf point", omega_check))

    def crossing_slope():
        try:
            loc = bf.hopf_locus(cfg)
        except Infeasible as exc:
            return Status.NA, str(exc)
        h = 1e-6
        re = [fsoe.eigenvalues_2x2(fsoe.origin_jacobian(cfg.with_beta(loc.beta_star + d)))[0].real
              for d in (-h, h)]
        slope = (re[1] - re[0]) / (2 * h)
        return (Status.PASS if abs(slope) > 1e-8 else Status.FAIL), f"d Re(lambda)/d beta = {slope:.6g}"

    add(_timed("Hopf transversality", crossing_slope))

    def events_note():
        pf = diagram.points_of(bf.Kind.PITCHFORK, bf.Detection.NUMERIC)
        folds = diagram.points_of(bf.Kind.FOLD)
        parts = []
        if pf:
            parts.append(f"origin pitchfork at beta = {pf[0].beta:.4f}")
        if folds:
            parts.append(f"{len(folds)} fold(s) at beta = "
                         + ", ".join(sorted({f'{f.beta:.4f}' for f in folds})))
        if pf and folds:
            parts.append("changes in equilibrium count away from the origin pitchfork are folds")
        return Status.INFO, "; ".join(parts)

    add(_timed("event labels", events_note))
    return checks


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check'.ljust(width)}  status  time    detail", "-" * (width + 40)]
    for c in checks:
        lines.append(f"{c.name.ljust(width)}  {c.status.value:<6}  {c.seconds:5.2f}s  {c.detail}")
    return "\n".join(lines)


def all_passed(checks: list[Check]) -> bool:
    return not any(c.status is Status.FAIL for c in checks)
