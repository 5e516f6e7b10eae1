"""Planar dynamics of fully synchronized opinions coupled with the environment.

State ``(p, e)``: common opinion ``p`` and environment deviation ``e``::

    tau_x p' = -p + beta r(e) + (1 - beta) s(p)
    tau_e e' = -gamma e + u(p) - gamma ebar

Equilibria are ``(p*, u(p*)/gamma - ebar)`` with ``p*`` a fixed point of the
instrumental function ``g(x) = beta r(u(x)/gamma - ebar) + (1 - beta) s(x)``.
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DivisionByZero
from .model_functions import ModelConfig, eval_with_derivatives
from .ode_solvers import SolverOptions, Trajectory, integrate

ZERO_TOL = 1e-12
DEDUP_DIST = 1e-8
TANGENCY_TOL = 1e-6
DEFAULT_GRID = 2001


class Stability(str, enum.Enum):
    STABLE_NODE = "StableNode"
    STABLE_FOCUS = "StableFocus"
    UNSTABLE_NODE = "UnstableNode"
    UNSTABLE_FOCUS = "UnstableFocus"
    SADDLE = "Saddle"
    CENTER = "Center"
    DEGENERATE = "Degenerate"

    @property
    def is_stable(self) -> bool:
        return self in (Stability.STABLE_NODE, Stability.STABLE_FOCUS)


@dataclass(frozen=True)
class FsoeState:
    p: float
    e: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.e])


@dataclass(frozen=True)
class Jacobian2:
    a11: float
    a12: float
    a21: float
    a22: float

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def discriminant(self) -> float:
        return self.trace**2 - 4.0 * self.det

    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])


@dataclass(frozen=True)
class Equilibrium:
    p_star: float
    e_star: float
    jac: Jacobian2
    stability: Stability


def rhs_fsoe(cfg: ModelConfig, st) -> tuple[float, float]:
    """Vector field at ``st`` (an :class:`FsoeState` or a ``(p, e)`` pair)."""
    p, e = (st.p, st.e) if isinstance(st, FsoeState) else st
    dp = (-p + cfg.beta * cfg.r(e) + (1.0 - cfg.beta) * cfg.s(p)) / cfg.tau_x
    de = (-cfg.gamma * e + cfg.u(p) - cfg.gamma * cfg.ebar) / cfg.tau_e
    return float(dp), float(de)


def make_rhs(cfg: ModelConfig):
    """Scalar-math closure of :func:`rhs_fsoe` in the ``f(t, y)`` form used by the solvers."""
    beta, gamma, ebar = cfg.beta, cfg.gamma, cfg.ebar
    inv_tx, inv_te = 1.0 / cfg.tau_x, 1.0 / cfg.tau_e
    s, r, u = cfg.s.scalar(), cfg.r.scalar(), cfg.u.scalar()

    def f(t, y):
        p, e = float(y[0]), float(y[1])
        return np.array([
            (-p + beta * r(e) + (1.0 - beta) * s(p)) * inv_tx,
            (-gamma * e + u(p) - gamma * ebar) * inv_te,
        ])

    return f


def simulate_fsoe(cfg: ModelConfig, st0, t_end: float,
                  opts: SolverOptions = SolverOptions(), t0: float = 0.0) -> Trajectory:
    y0 = st0.as_array() if isinstance(st0, FsoeState) else np.asarray(st0, dtype=float)
    return integrate(make_rhs(cfg), y0, t0, t_end, opts)


def _require_gamma(cfg: ModelConfig):
    if cfg.gamma == 0.0:
        raise DivisionByZero("gamma = 0: the equilibrium environment u(p)/gamma - ebar is undefined")


def instrumental_g(cfg: ModelConfig, x):
    """``g(x) = beta r(u(x)/gamma - ebar) + (1 - beta) s(x)``; vectorised over `x`."""
    _require_gamma(cfg)
    return cfg.beta * cfg.r(cfg.u(x) / cfg.gamma - cfg.ebar) + (1.0 - cfg.beta) * cfg.s(x)


def _bisect_brackets(h, lo: np.ndarray, hi: np.ndarray, tol: float) -> np.ndarray:
    """Vectorised bisection of sign-change brackets of `h`."""
    h_lo = h(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        h_mid = h(mid)
        done = (np.abs(h_mid) <= tol) | (hi - lo <= 4 * np.finfo(float).eps)
        if np.all(done):
            return mid
        left = np.sign(h_mid) == np.sign(h_lo)
        lo = np.where(done, lo, np.where(left, mid, lo))
        hi = np.where(done, hi, np.where(left, hi, mid))
        h_lo = np.where(left, h_mid, h_lo)
    return 0.5 * (lo + hi)


def find_fixed_points(cfg: ModelConfig, grid_n: int = DEFAULT_GRID, tol: float = 1e-12) -> list[float]:
    """All fixed points of `g` in [-1, 1], sorted.

    Sign changes of ``g(x) - x`` on a uniform grid are refined by bisection.
    Grid-level near-zeros without a sign change (``|g - x| < 1e-6`` at a local
    minimum of ``|g - x|``) are treated as tangential roots: ``|g - x|`` is
    minimised locally and the minimiser kept if it reaches `tol`.
    Roots closer than 1e-8 are merged.
    """
    if grid_n < 101:
        raise ValueError("grid_n must be at least 101")
    _require_gamma(cfg)

    def h(x):
        return instrumental_g(cfg, x) - x

    xs = np.linspace(-1.0, 1.0, grid_n)
    hs = h(xs)
    roots = list(xs[hs == 0.0])

    sign_change = hs[:-1] * hs[1:] < 0.0
    idx = np.nonzero(sign_change)[0]
    if idx.size:
        roots.extend(_bisect_brackets(h, xs[idx], xs[idx + 1], tol).tolist())

    a = np.abs(hs)
    for i in range(1, grid_n - 1):
        if not (0.0 < a[i] < TANGENCY_TOL and a[i] <= a[i - 1] and a[i] <= a[i + 1]):
            continue
        if sign_change[i - 1] or sign_change[i]:
            continue
        res = minimize_scalar(lambda x: abs(float(h(x))), bounds=(xs[i - 1], xs[i + 1]),
                              method="bounded", options={"xatol": 1e-13})
        xm, hm = float(res.x), float(h(res.x))
        if abs(hm) <= tol:
            roots.append(xm)
        elif np.sign(hm) != np.sign(hs[i]):
            # sign probe: a close pair of crossings hidden between grid points
            pair = _bisect_brackets(h, np.array([xs[i - 1], xm]), np.array([xm, xs[i + 1]]), tol)
            roots.extend(pair.tolist())

    roots.sort()
    out: list[float] = []
    for x in roots:
        if not out or x - out[-1] > DEDUP_DIST:
            out.append(float(x))
    return out


def jacobian_fsoe(cfg: ModelConfig, st) -> Jacobian2:
    p, e = (st.p, st.e) if isinstance(st, FsoeState) else st
    ds = eval_with_derivatives(cfg.s, p)[1]
    dr = eval_with_derivatives(cfg.r, e)[1]
    du = eval_with_derivatives(cfg.u, p)[1]
    return Jacobian2(
        a11=float(((1.0 - cfg.beta) * ds - 1.0) / cfg.tau_x),
        a12=float(cfg.beta * dr / cfg.tau_x),
        a21=float(du / cfg.tau_e),
        a22=-cfg.gamma / cfg.tau_e,
    )


def eigenvalues_2x2(j: Jacobian2) -> tuple[complex, complex]:
    """Roots of ``X^2 - tr X + det``, descending real part then imaginary part."""
    root = cmath.sqrt(j.discriminant)
    lams = [(j.trace + root) / 2, (j.trace - root) / 2]
    lams.sort(key=lambda z: (z.real, z.imag), reverse=True)
    return lams[0], lams[1]


def classify_stability(j: Jacobian2) -> Stability:
    tr, det = j.trace, j.det
    if abs(det) <= ZERO_TOL:
        return Stability.DEGENERATE
    if det < 0:
        return Stability.SADDLE
    if abs(tr) <= ZERO_TOL:
        return Stability.CENTER
    focus = j.discriminant < 0
    if tr < 0:
        return Stability.STABLE_FOCUS if focus else Stability.STABLE_NODE
    return Stability.UNSTABLE_FOCUS if focus else Stability.UNSTABLE_NODE


def equilibrium_at(cfg: ModelConfig, p_star: float) -> Equilibrium:
    _require_gamma(cfg)
    e_star = float(cfg.u(p_star) / cfg.gamma - cfg.ebar)
    jac = jacobian_fsoe(cfg, (p_star, e_star))
    return Equilibrium(float(p_star), e_star, jac, classify_stability(jac))


def equilibria(cfg: ModelConfig, grid_n: int = DEFAULT_GRID) -> list[Equilibrium]:
    return [equilibrium_at(cfg, p) for p in find_fixed_points(cfg, grid_n)]


def origin_jacobian(cfg: ModelConfig) -> Jacobian2:
    return jacobian_fsoe(cfg, (0.0, 0.0))


def is_origin(eq: Equilibrium, tol: float = 1e-9) -> bool:
    return abs(eq.p_star) <= tol and abs(eq.e_star) <= tol

