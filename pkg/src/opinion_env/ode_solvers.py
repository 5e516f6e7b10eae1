"""Explicit initial-value integrators.

Two methods are provided:

* ``RK4Fixed`` -- classical fourth-order Runge-Kutta on a uniform grid,
* ``Adaptive45`` -- the Dormand-Prince 5(4) embedded pair with local error
  control (local extrapolation, FSAL reuse of the last stage).

Both can record crossings of a single coordinate through a threshold
("event plane"); crossings are located by bisecting the bracketing step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import MaxStepsExceeded, NonFiniteState, StepUnderflow

RHS = Callable[[float, np.ndarray], np.ndarray]

EVENT_TIME_TOL = 1e-10
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class Method(str, enum.Enum):
    RK4_FIXED = "RK4Fixed"
    ADAPTIVE45 = "Adaptive45"


@dataclass(frozen=True)
class EventPlane:
    """Crossing of ``y[index]`` through ``threshold``.

    ``direction`` is +1 for upward crossings, -1 for downward, 0 for both.
    """

    index: int
    threshold: float = 0.0
    direction: int = 1


@dataclass(frozen=True)
class SolverOptions:
    method: Method = Method.ADAPTIVE45
    step: float = 1e-2
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_steps: int = 1_000_000
    max_step: float = math.inf
    event_plane: Optional[EventPlane] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")

    @classmethod
    def rk4(cls, step: float, **kw) -> "SolverOptions":
        return cls(method=Method.RK4_FIXED, step=step, **kw)

    @classmethod
    def adaptive(cls, tol: float = 1e-9, **kw) -> "SolverOptions":
        return cls(method=Method.ADAPTIVE45, abs_tol=tol, rel_tol=tol, **kw)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)
    events: list[tuple[float, np.ndarray]] = field(default_factory=list)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def event_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.events])

    def __len__(self):
        return len(self.times)


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp_step(rhs: RHS, t: float, y: np.ndarray, h: float, k0: np.ndarray):
    """One Dormand-Prince step; returns (y_new, error_vector, f(t+h, y_new))."""
    k = np.empty((7, y.size))
    k[0] = k0
    for i in range(1, 7):
        k[i] = rhs(t + _C[i] * h, y + h * np.dot(_A[i], k[:i]))
    # row 6 of A equals B5, so the last stage is f at the new point (FSAL)
    return y + h * np.dot(_A[6], k[:6]), h * np.dot(_E, k), k[6]


def _rk4_step(rhs: RHS, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + h / 2 * k1)
    k3 = rhs(t + h / 2, y + h / 2 * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _crossed(a: float, b: float, direction: int) -> bool:
    if direction >= 0 and a < 0.0 <= b:
        return True
    if direction <= 0 and a > 0.0 >= b:
        return True
    return False


def _locate_event(advance, t, y, h, plane: EventPlane):
    """Bisect the step fraction until the crossing is bracketed to EVENT_TIME_TOL."""
    g0 = y[plane.index] - plane.threshold
    lo, hi = 0.0, h
    y_hi = advance(h)
    while hi - lo > EVENT_TIME_TOL:
        mid = 0.5 * (lo + hi)
        y_mid = advance(mid)
        if _crossed(g0, y_mid[plane.index] - plane.threshold, plane.direction):
            hi, y_hi = mid, y_mid
        else:
            lo = mid
    return t + hi, y_hi


def integrate(rhs: RHS, y0, t0: float, t1: float, opts: SolverOptions = SolverOptions()) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from `t0` to `t1`.

    Every accepted step is recorded. Raises :class:`StepUnderflow`,
    :class:`MaxStepsExceeded` or :class:`NonFiniteState`.
    """
    if not t1 > t0:
        raise ValueError("t1 must be greater than t0")
    y = np.array(y0, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise NonFiniteState("initial state is not finite")
    if opts.method is Method.RK4_FIXED:
        return _integrate_rk4(rhs, y, t0, t1, opts)
    return _integrate_dp(rhs, y, t0, t1, opts)


def _integrate_rk4(rhs, y, t0, t1, opts):
    n_steps = math.ceil((t1 - t0) / opts.step - 1e-12)
    if n_steps > opts.max_steps:
        raise MaxStepsExceeded(f"{n_steps} fixed steps requested, limit {opts.max_steps}")
    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, y.size))
    times[0], states[0] = t0, y
    events = []
    plane = opts.event_plane
    t = t0
    for i in range(1, n_steps + 1):
        t_next = t1 if i == n_steps else t0 + i * opts.step
        h = t_next - t
        y_new = _rk4_step(rhs, t, y, h)
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteState(f"non-finite state at t={t_next}")
        if plane is not None and _crossed(y[plane.index] - plane.threshold,
                                          y_new[plane.index] - plane.threshold, plane.direction):
            events.append(_locate_event(lambda s, t=t, y=y: _rk4_step(rhs, t, y, s), t, y, h, plane))
        t, y = t_next, y_new
        times[i], states[i] = t, y
    return Trajectory(times, states, events)


def _initial_step(rhs, t0, y, f0, order, atol, rtol):
    # Hairer, Norsett & Wanner, Solving ODEs I, II.4
    scale = atol + rtol * np.abs(y)
    d0 = np.max(np.abs(y) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = rhs(t0 + h0, y + h0 * f0)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1)


def _integrate_dp(rhs, y, t0, t1, opts):
    atol, rtol = opts.abs_tol, opts.rel_tol
    span = t1 - t0
    h_min = 1e-14 * span
    plane = opts.event_plane
    times, states, events = [t0], [y.copy()], []

    t = t0
    f = np.asarray(rhs(t, y), dtype=float)
    h = min(_initial_step(rhs, t, y, f, 5, atol, rtol), opts.max_step, span)
    rejected = False
    n_steps = 0
    while t < t1:
        if n_steps >= opts.max_steps:
            raise MaxStepsExceeded(f"reached {opts.max_steps} steps at t={t}")
        last = t + h >= t1
        if last:
            h = t1 - t
        y_new, err_vec, f_new = _dp_step(rhs, t, y, h, f)
        # max norm: identical components give identical step sequences
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale))
        if not math.isfinite(err) or not np.all(np.isfinite(y_new)):
            err = math.inf
        if err <= 1.0:
            n_steps += 1
            if plane is not None and _crossed(y[plane.index] - plane.threshold,
                                              y_new[plane.index] - plane.threshold,
                                              plane.direction):
                events.append(_locate_event(
                    lambda s, t=t, y=y, f=f: _dp_step(rhs, t, y, s, f)[0], t, y, h, plane))
            t = t1 if last else t + h
            y, f = y_new, f_new
            times.append(t)
            states.append(y)
            fac = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
            if rejected:
                fac = min(fac, 1.0)
            h = min(h * fac, opts.max_step)
            rejected = False
        else:
            fac = MIN_FACTOR if not math.isfinite(err) else max(MIN_FACTOR, SAFETY * err ** -0.2)
            h *= fac
            rejected = True
            if h < h_min:
                if not np.all(np.isfinite(y_new)):
                    raise NonFiniteState(f"non-finite state near t={t}")
                raise StepUnderflow(f"step size {h:.3e} below {h_min:.3e} at t={t}")
    return Trajectory(np.array(times), np.array(states), events)
