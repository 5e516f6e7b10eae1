"""Singularity conditions, normal-form coefficients and numerical beta sweeps.

Closed-form side: where the planar Jacobian gets a zero eigenvalue, a double
zero, or a purely imaginary pair; the cubic pitchfork coefficient; the Hopf
coefficient ``h21`` (first Lyapunov coefficient ``c1 = h21 / 2``).

Numerical side: :func:`sweep_beta` tracks equilibria over a beta grid, detects
sign changes of the origin's determinant (pitchfork) and trace (Hopf) and
changes of the equilibrium count (fold), and refines each by bisection.
"""

from __future__ import annotations

import enum
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fsoe
from .errors import DivisionByZero, Infeasible, NotHopfPoint, NotSingular, SolverFailure
from .model_functions import ModelConfig, eval_with_derivatives
from .ode_solvers import EventPlane, SolverOptions, integrate

log = logging.getLogger(__name__)

PRECONDITION_TOL = 1e-10
DEGENERATE_TOL = 1e-10
BOUNDARY_TOL = 1e-12
NEAR_DOUBLE_ZERO = 1e-3
REFINE_TOL = 1e-8


def _derivs(cfg: ModelConfig, p: float, e: float):
    """``(s'(p), r'(e), u'(p))``."""
    return (
        float(eval_with_derivatives(cfg.s, p)[1]),
        float(eval_with_derivatives(cfg.r, e)[1]),
        float(eval_with_derivatives(cfg.u, p)[1]),
    )


# ---------------------------------------------------------------------------
# closed-form singularity conditions

@dataclass(frozen=True)
class ZeroEigenvalue:
    """Value of gamma giving a zero eigenvalue at the current beta, or why none exists."""

    gamma: Optional[float]
    reason: Optional[str] = None

    @property
    def feasible(self) -> bool:
        return self.gamma is not None


def gamma_for_zero_eigenvalue(cfg: ModelConfig, p: float = 0.0, e: float = 0.0) -> ZeroEigenvalue:
    """``gamma = -u'(p) r'(e) beta / ((1 - beta) s'(p) - 1)``.

    Feasible only when ``(1 - beta) s'(p) > max(1, 1 - u'(p) r'(e) beta)`` and the
    resulting gamma lies in (0, 1].
    """
    ds, dr, du = _derivs(cfg, p, e)
    beta = cfg.beta
    gain = (1.0 - beta) * ds
    if gain <= 1.0:
        return ZeroEigenvalue(None, "amplifier condition violated: (1-beta)s'(p) <= 1")
    if gain <= 1.0 - du * dr * beta:
        return ZeroEigenvalue(None, "(1-beta)s'(p) <= 1 - u'(p)r'(e)beta")
    num = -du * dr * beta
    if num == 0.0:
        return ZeroEigenvalue(None, "degenerate numerator: gamma would be 0")
    gamma = num / (gain - 1.0)
    if not 0.0 < gamma <= 1.0:
        return ZeroEigenvalue(None, f"gamma = {gamma:.6g} outside (0, 1]")
    return ZeroEigenvalue(gamma)


def beta_for_zero_eigenvalue(cfg: ModelConfig, p: float = 0.0, e: float = 0.0) -> float:
    """Invert the zero-eigenvalue condition for beta at the configured gamma.

    Solves ``gamma ((1 - beta) s' - 1) + u' r' beta = 0`` (linear in beta) and
    checks feasibility with :func:`gamma_for_zero_eigenvalue`.
    """
    ds, dr, du = _derivs(cfg, p, e)
    denom = cfg.gamma * ds - du * dr
    if denom == 0.0:
        raise Infeasible("determinant does not depend on beta")
    beta = cfg.gamma * (ds - 1.0) / denom
    if not 0.0 <= beta <= 1.0:
        raise Infeasible(f"beta = {beta:.6g} outside [0, 1]")
    check = gamma_for_zero_eigenvalue(cfg.with_beta(beta), p, e)
    if not check.feasible:
        raise Infeasible(check.reason)
    return beta


@dataclass(frozen=True)
class DoubleZero:
    delta_beta: float
    beta_minus: Optional[float]
    beta_plus: Optional[float]
    minus_admissible: bool = False  # (1 - beta_-) s'(p) > 1
    plus_admissible: bool = False


def beta_double_zero(cfg: ModelConfig, p: float = 0.0, e: float = 0.0) -> DoubleZero:
    """Roots ``beta_+-`` of ``tau ((1 - beta) s' - 1)^2 + u' r' beta = 0``.

    ``Delta = u'r' (u'r' - 4 tau s' (s' - 1))`` and
    ``beta_+- = 1 - 1/s' + (-u'r' +- sqrt(Delta)) / (2 tau s'^2)``.
    Each root is flagged by whether it satisfies ``(1 - beta) s'(p) > 1``.
    """
    ds, dr, du = _derivs(cfg, p, e)
    ur = du * dr
    tau = cfg.tau
    delta = ur * (ur - 4.0 * tau * ds * (ds - 1.0))
    if delta < 0.0 or ds == 0.0:
        return DoubleZero(delta, None, None)
    root = math.sqrt(delta)
    base = 1.0 - 1.0 / ds
    b_minus = base + (-ur - root) / (2.0 * tau * ds * ds)
    b_plus = base + (-ur + root) / (2.0 * tau * ds * ds)
    return DoubleZero(
        delta, b_minus, b_plus,
        minus_admissible=(1.0 - b_minus) * ds > 1.0,
        plus_admissible=(1.0 - b_plus) * ds > 1.0,
    )


@dataclass(frozen=True)
class HopfLocus:
    beta_star: float
    gamma: float
    omega0: float


def hopf_locus(cfg: ModelConfig, p: float = 0.0, e: float = 0.0,
               gamma: Optional[float] = None) -> HopfLocus:
    """Beta on the trace-zero line ``gamma = tau ((1 - beta) s'(p) - 1)``.

    Requires ``1 < (1 - beta) s' < 1 + 1/tau``, ``beta`` strictly inside
    ``(beta_-, min(beta_+, 1))`` and a positive determinant; raises
    :class:`Infeasible` naming the failed constraint otherwise.
    """
    gamma = cfg.gamma if gamma is None else float(gamma)
    ds, _, _ = _derivs(cfg, p, e)
    tau = cfg.tau
    if ds <= 1.0:
        raise Infeasible("amplifier condition violated: s'(p) <= 1")
    if not 0.0 <= gamma < tau * (ds - 1.0):
        raise Infeasible("no beta in [0, 1]: gamma outside [0, tau (s'(p) - 1))")
    beta = 1.0 - (1.0 + gamma / tau) / ds
    gain = (1.0 - beta) * ds
    if not 1.0 < gain < 1.0 + 1.0 / tau:
        raise Infeasible("1 < (1-beta)s'(p) < 1 + 1/tau violated")
    dz = beta_double_zero(cfg, p, e)
    if dz.beta_minus is None:
        raise Infeasible("no double-zero roots (Delta_beta < 0)")
    upper = min(dz.beta_plus, 1.0)
    if not dz.beta_minus + BOUNDARY_TOL < beta < upper - BOUNDARY_TOL:
        raise Infeasible("beta not in (beta_-, min(beta_+, 1))")
    j = fsoe.jacobian_fsoe(cfg.with_beta(beta).with_gamma(gamma), (p, e))
    if j.det <= BOUNDARY_TOL:
        raise Infeasible("determinant not positive: no complex pair")
    return HopfLocus(beta, gamma, math.sqrt(j.det))


@dataclass(frozen=True)
class SingularityConditions:
    gamma_zero: Optional[float]
    gamma_zero_reason: Optional[str]
    beta_minus: Optional[float]
    beta_plus: Optional[float]
    delta_beta: float
    minus_admissible: bool
    plus_admissible: bool
    gamma_hopf: Optional[float]
    omega0: Optional[float]
    hopf_reason: Optional[str]


def singularity_conditions(cfg: ModelConfig, p: float = 0.0, e: float = 0.0) -> SingularityConditions:
    """All three conditions at the configured beta, with feasibility flags.

    ``gamma_hopf`` is ``tau ((1 - beta) s'(p) - 1)`` when that gamma is admissible,
    and ``omega0`` the resulting ``sqrt(det)``.
    """
    zero = gamma_for_zero_eigenvalue(cfg, p, e)
    dz = beta_double_zero(cfg, p, e)
    ds, _, _ = _derivs(cfg, p, e)
    gamma_h = cfg.tau * ((1.0 - cfg.beta) * ds - 1.0)
    try:
        loc = hopf_locus(cfg, p, e, gamma=gamma_h)
        gamma_hopf, omega0, hopf_reason = gamma_h, loc.omega0, None
    except Infeasible as exc:
        gamma_hopf, omega0, hopf_reason = None, None, exc.constraint
    return SingularityConditions(
        zero.gamma, zero.reason, dz.beta_minus, dz.beta_plus, dz.delta_beta,
        dz.minus_admissible, dz.plus_admissible, gamma_hopf, omega0, hopf_reason,
    )


# ---------------------------------------------------------------------------
# normal-form coefficients at the origin

@dataclass(frozen=True)
class PitchforkInfo:
    beta_star: float
    gamma_star: float
    eigenvector_v: tuple[float, float]
    coefficient_c: float
    coefficient_c_tau: float

    @property
    def degenerate(self) -> bool:
        return abs(self.coefficient_c_tau) <= DEGENERATE_TOL


def pitchfork_coefficient(cfg: ModelConfig, beta_star: float, gamma_star: float) -> PitchforkInfo:
    """Kernel vector ``v = (1, u'(0)/gamma*)`` and the cubic coefficient.

    ``c = (1-b) s''' + b r''' u'^3 / g^3 + (b r' / g) u'''`` (all at 0) and the
    time-constant weighted form ``c_tau`` that carries ``1/tau_x`` on the first
    two terms and ``1/tau_e`` on the last. Both agree when ``tau_x = tau_e = 1``;
    the sign of ``c_tau`` decides nondegeneracy.
    """
    _, s1, _, s3 = (float(v) for v in eval_with_derivatives(cfg.s, 0.0))
    _, r1, _, r3 = (float(v) for v in eval_with_derivatives(cfg.r, 0.0))
    _, u1, _, u3 = (float(v) for v in eval_with_derivatives(cfg.u, 0.0))
    b, g = float(beta_star), float(gamma_star)
    if g <= 0.0:
        raise NotSingular("gamma* must be positive")
    residual = g * ((1.0 - b) * s1 - 1.0) + u1 * r1 * b
    if abs(residual) > PRECONDITION_TOL:
        raise NotSingular(f"zero-eigenvalue condition residual {residual:.3e} at origin")
    c = (1.0 - b) * s3 + b * r3 * u1**3 / g**3 + b * r1 * u3 / g
    c_tau = ((1.0 - b) * s3 + b * r3 * u1**3 / g**3) / cfg.tau_x + b * r1 * u3 / (cfg.tau_e * g)
    return PitchforkInfo(b, g, (1.0, u1 / g), c, c_tau)


class CycleSide(str, enum.Enum):
    BELOW = "BelowBetaStar"
    ABOVE = "AboveBetaStar"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class HopfInfo:
    beta_star: float
    gamma_star: float
    omega0: float
    a: float
    h21: complex
    c1: complex
    supercritical_side: CycleSide
    near_double_zero: bool


def hopf_coefficient(cfg: ModelConfig, beta_star: float, gamma_star: float) -> HopfInfo:
    """Cubic Hopf coefficient at the origin.

    With ``a = gamma*/tau_x``, ``w = omega0`` and ``B = beta* r'(0)``::

        h21 = u'[(1-beta*) s''' B^3 / tau_x^3 + beta* r''' (iw + a)(iw - a)^2]
              - u''' (iw + a) B^3 / tau_x^2

    The bifurcating cycle is on the ``beta < beta*`` side whenever
    ``Re(h21) != 0``.
    """
    _, s1, _, s3 = (float(v) for v in eval_with_derivatives(cfg.s, 0.0))
    _, r1, _, r3 = (float(v) for v in eval_with_derivatives(cfg.r, 0.0))
    _, u1, _, u3 = (float(v) for v in eval_with_derivatives(cfg.u, 0.0))
    b, g = float(beta_star), float(gamma_star)
    tx = cfg.tau_x
    residual = g - cfg.tau * ((1.0 - b) * s1 - 1.0)
    if abs(residual) > PRECONDITION_TOL:
        raise NotHopfPoint(f"trace-zero condition residual {residual:.3e} at origin")
    j = fsoe.jacobian_fsoe(cfg.with_beta(b).with_gamma(g), (0.0, 0.0))
    if j.det <= 0.0:
        raise NotHopfPoint(f"det = {j.det:.3e} <= 0: no purely imaginary pair")
    w = math.sqrt(j.det)
    a = g / tx
    big_b = b * r1
    iw = 1j * w
    h21 = (u1 * ((1.0 - b) * s3 * big_b**3 / tx**3 + b * r3 * (iw + a) * (iw - a) ** 2)
           - u3 * (iw + a) * big_b**3 / tx**2)
    side = CycleSide.BELOW if abs(h21.real) > DEGENERATE_TOL else CycleSide.UNDETERMINED
    return HopfInfo(b, g, w, a, h21, h21 / 2, side, w < NEAR_DOUBLE_ZERO)


# ---------------------------------------------------------------------------
# limit cycles

@dataclass(frozen=True)
class CycleInfo:
    p_min: float
    p_max: float
    period: float

    @property
    def amplitude(self) -> float:
        """Half the peak-to-peak excursion of p."""
        return 0.5 * (self.p_max - self.p_min)


CYCLE_OPTS = SolverOptions.adaptive(1e-9, max_step=0.1)


def limit_cycle_amplitude(cfg: ModelConfig, beta: Optional[float] = None, t_transient: float = 300.0,
                          t_measure: float = 200.0, tol_cycle: float = 1e-3,
                          perturbation: float = 0.01, period_rtol: float = 0.01,
                          opts: SolverOptions = CYCLE_OPTS) -> Optional[CycleInfo]:
    """Attracting cycle reached from the slightly perturbed origin, if any.

    Integrates from ``(perturbation, e0)`` where ``e0`` is the origin
    equilibrium's environment value, drops ``t <= t_transient`` and measures
    the extrema of ``p`` over ``t_measure``. Upward crossings of the plane
    ``e = e0`` give the period; at least three crossings whose successive
    periods agree within `period_rtol` are required. Returns ``None`` when the
    spread of ``p`` is below `tol_cycle` or no steady period is found.
    """
    if beta is not None:
        cfg = cfg.with_beta(beta)
    if cfg.gamma <= 0.0:
        raise DivisionByZero("gamma must be positive for cycle detection")
    e0 = float(cfg.u(0.0) / cfg.gamma - cfg.ebar)
    plane = EventPlane(index=1, threshold=e0, direction=1)
    run_opts = SolverOptions(
        method=opts.method, step=opts.step, abs_tol=opts.abs_tol, rel_tol=opts.rel_tol,
        max_steps=opts.max_steps, max_step=opts.max_step, event_plane=plane)
    traj = integrate(fsoe.make_rhs(cfg), [perturbation, e0], 0.0, t_transient + t_measure, run_opts)

    keep = traj.times > t_transient
    p = traj.states[keep, 0]
    if p.size == 0:
        return None
    p_min, p_max = float(p.min()), float(p.max())
    if p_max - p_min < tol_cycle:
        return None
    crossings = np.array([t for t, _ in traj.events if t > t_transient])
    if crossings.size < 3:
        return None
    periods = np.diff(crossings)
    if np.any(np.abs(np.diff(periods)) > period_rtol * periods[:-1]):
        return None
    return CycleInfo(p_min, p_max, float(periods.mean()))


# ---------------------------------------------------------------------------
# beta sweep

class Kind(str, enum.Enum):
    PITCHFORK = "Pitchfork"
    HOPF = "Hopf"
    FOLD = "Fold"


class Detection(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    NUMERIC = "Numeric"


@dataclass(frozen=True)
class BifurcationPoint:
    beta: float
    kind: Kind
    detection: Detection
    omega0: Optional[float] = None
    coefficient: Optional[float] = None


@dataclass(frozen=True)
class BranchPoint:
    beta: float
    p_star: float
    e_star: float
    trace: float
    det: float
    stability: fsoe.Stability


@dataclass
class Branch:
    branch_id: int
    points: list[BranchPoint] = field(default_factory=list)


@dataclass
class BifurcationDiagram:
    beta_grid: np.ndarray
    branches: list[Branch]
    bifurcation_points: list[BifurcationPoint]
    cycle_amplitudes: dict[int, Optional[CycleInfo]]  # grid index -> cycle
    gaps: dict[int, str] = field(default_factory=dict)  # grid index -> failure message

    def points_of(self, kind: Kind, detection: Optional[Detection] = None) -> list[BifurcationPoint]:
        return [b for b in self.bifurcation_points
                if b.kind is kind and (detection is None or b.detection is detection)]


@dataclass(frozen=True)
class _Column:
    equilibria: list
    origin_trace: float
    origin_det: float
    cycle: Optional[CycleInfo]
    error: Optional[str]


def _column(cfg: ModelConfig, grid_n: int, want_cycle: bool, cycle_kw: dict) -> _Column:
    eqs = fsoe.equilibria(cfg, grid_n)
    j0 = fsoe.origin_jacobian(cfg)
    cycle, error = None, None
    if want_cycle and (j0.trace > 0.0 or j0.det < 0.0):
        try:
            cycle = limit_cycle_amplitude(cfg, **cycle_kw)
        except SolverFailure as exc:
            error = f"{type(exc).__name__}: {exc}"
    return _Column(eqs, j0.trace, j0.det, cycle, error)


def _column_task(args):
    return _column(*args)


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    """Bisection on a boolean predicate: ``f(lo)`` true, ``f(hi)`` false."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _assign_branches(grid, columns, max_jump: float) -> list[Branch]:
    branches: list[Branch] = [Branch(0)]
    active: dict[int, float] = {}  # branch id -> p at the previous grid point
    for beta, col in zip(grid, columns):
        new_active = {}
        others = []
        for eq in col.equilibria:
            rec = BranchPoint(float(beta), eq.p_star, eq.e_star, eq.jac.trace, eq.jac.det, eq.stability)
            if fsoe.is_origin(eq):
                branches[0].points.append(rec)
                new_active[0] = eq.p_star
            else:
                others.append(rec)
        pairs = sorted(
            ((abs(rec.p_star - p_prev), k, bid) for k, rec in enumerate(others)
             for bid, p_prev in active.items() if bid != 0),
        )
        used_rec, used_branch = set(), set()
        for dist, k, bid in pairs:
            if dist > max_jump or k in used_rec or bid in used_branch:
                continue
            used_rec.add(k)
            used_branch.add(bid)
            branches[bid].points.append(others[k])
            new_active[bid] = others[k].p_star
        for k, rec in enumerate(others):
            if k not in used_rec:
                bid = len(branches)
                branches.append(Branch(bid, [rec]))
                new_active[bid] = rec.p_star
        active = new_active
    return [b for b in branches if b.points]


def sweep_beta(cfg_base: ModelConfig, beta_min: float = 0.0, beta_max: float = 1.0, steps: int = 500,
               cycles: bool = False, cycle_kw: Optional[dict] = None, jobs: int = 1,
               grid_n: int = fsoe.DEFAULT_GRID, refine_tol: float = REFINE_TOL,
               branch_jump: float = 0.15) -> BifurcationDiagram:
    """Equilibria, stability and bifurcations over ``steps`` evenly spaced betas.

    Between neighbouring grid points: a sign change of the origin determinant
    is a pitchfork, a sign change of the origin trace with positive
    determinant a Hopf point, and any other change of the equilibrium count
    is reported as ``|change| / 2`` folds. Each is refined by bisection to
    `refine_tol`. Closed-form pitchfork and Hopf betas inside the range are
    added alongside. With ``cycles=True`` the limit cycle is measured at every
    grid beta where the origin is unstable.
    """
    if not 0.0 <= beta_min < beta_max <= 1.0:
        raise ValueError("need 0 <= beta_min < beta_max <= 1")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if cfg_base.gamma <= 0.0:
        raise DivisionByZero("gamma must be positive for equilibrium analysis")
    cycle_kw = dict(cycle_kw or {})
    grid = np.linspace(beta_min, beta_max, steps)
    tasks = [(cfg_base.with_beta(float(b)), grid_n, cycles, cycle_kw) for b in grid]
    jobs = max(1, int(jobs))
    if jobs > 1 and cycles:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            columns = list(pool.map(_column_task, tasks, chunksize=max(1, steps // (4 * jobs))))
    else:
        columns = [_column(*t) for t in tasks]

    gaps = {i: c.error for i, c in enumerate(columns) if c.error}
    for i, msg in gaps.items():
        log.warning("cycle measurement failed at beta=%.6g: %s", grid[i], msg)
    points: list[BifurcationPoint] = []

    def det_at(b):
        return fsoe.origin_jacobian(cfg_base.with_beta(b)).det

    def trace_at(b):
        return fsoe.origin_jacobian(cfg_base.with_beta(b)).trace

    def count_at(b):
        return len(fsoe.find_fixed_points(cfg_base.with_beta(b), grid_n))

    for i in range(steps - 1):
        lo, hi = float(grid[i]), float(grid[i + 1])
        a, b = columns[i], columns[i + 1]
        pitchfork_here = a.origin_det * b.origin_det < 0.0 or a.origin_det == 0.0
        if pitchfork_here:
            d_lo = a.origin_det
            beta_pf = lo if d_lo == 0.0 else _bisect(lambda x: det_at(x) * d_lo > 0.0, lo, hi, refine_tol)
            points.append(BifurcationPoint(beta_pf, Kind.PITCHFORK, Detection.NUMERIC))
        if (a.origin_trace * b.origin_trace < 0.0 or a.origin_trace == 0.0) \
                and a.origin_det > 0.0 and b.origin_det > 0.0:
            t_lo = a.origin_trace
            beta_h = lo if t_lo == 0.0 else _bisect(lambda x: trace_at(x) * t_lo > 0.0, lo, hi, refine_tol)
            det_h = det_at(beta_h)
            points.append(BifurcationPoint(beta_h, Kind.HOPF, Detection.NUMERIC,
                                           omega0=math.sqrt(det_h) if det_h > 0 else None))
        n_lo, n_hi = len(a.equilibria), len(b.equilibria)
        if n_lo != n_hi and not pitchfork_here:
            beta_f = _bisect(lambda x: count_at(x) == n_lo, lo, hi, refine_tol)
            for _ in range(max(1, abs(n_hi - n_lo) // 2)):
                points.append(BifurcationPoint(beta_f, Kind.FOLD, Detection.NUMERIC))

    try:
        b_pf = beta_for_zero_eigenvalue(cfg_base)
        if beta_min <= b_pf <= beta_max:
            info = pitchfork_coefficient(cfg_base, b_pf, cfg_base.gamma)
            points.append(BifurcationPoint(b_pf, Kind.PITCHFORK, Detection.CLOSED_FORM,
                                           coefficient=info.coefficient_c))
    except (Infeasible, NotSingular) as exc:
        log.info("no closed-form pitchfork: %s", exc)
    try:
        loc = hopf_locus(cfg_base)
        if beta_min <= loc.beta_star <= beta_max:
            info = hopf_coefficient(cfg_base, loc.beta_star, loc.gamma)
            points.append(BifurcationPoint(loc.beta_star, Kind.HOPF, Detection.CLOSED_FORM,
                                           omega0=loc.omega0, coefficient=info.h21.real))
    except (Infeasible, NotHopfPoint) as exc:
        log.info("no closed-form Hopf point: %s", exc)

    points.sort(key=lambda q: (q.beta, q.kind.value, q.detection.value))
    cyc = {i: c.cycle for i, c in enumerate(columns)} if cycles else {}
    return BifurcationDiagram(grid, _assign_branches(grid, columns, branch_jump), points, cyc, gaps)


def default_jobs() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
