"""Full networked opinion-environment dynamics.

State ``y = (x_0, ..., x_{N-1}, e)``::

    tau_x x_i' = -x_i + beta r(e) + (1 - beta) (1/d_i) sum_j a_ij s(x_j)
    tau_e e'   = -gamma e + u(mean(x)) - gamma ebar

The control is applied to the opinion average, which coincides with ``u(p)``
on consensus states ``x = p 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeMismatch
from .graph import Graph, apply_normalized_adjacency
from .model_functions import ModelConfig
from .ode_solvers import SolverOptions, Trajectory, integrate

# accuracy budget for the invariance checks is owned by the integrator
INVARIANCE_OPTS = SolverOptions.adaptive(1e-10)


@dataclass(frozen=True)
class NetworkState:
    x: np.ndarray
    e: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "e", float(self.e))

    @classmethod
    def consensus(cls, n: int, p: float, e: float) -> "NetworkState":
        return cls(np.full(n, float(p)), e)

    @classmethod
    def from_array(cls, y) -> "NetworkState":
        y = np.asarray(y, dtype=float)
        return cls(y[:-1], y[-1])

    def as_array(self) -> np.ndarray:
        return np.append(self.x, self.e)


def rhs_network(cfg: ModelConfig, g: Graph, st: NetworkState) -> NetworkState:
    """Time derivative, returned in :class:`NetworkState` form."""
    if st.x.shape != (g.n,):
        raise SizeMismatch(f"state has {st.x.size} opinions, graph has {g.n} vertices")
    return NetworkState.from_array(make_rhs(cfg, g)(0.0, st.as_array()))


def make_rhs(cfg: ModelConfig, g: Graph):
    """Solver-form ``f(t, y)`` of the vector field; unchecked inner loop of :func:`rhs_network`."""
    beta, gamma, ebar, n = cfg.beta, cfg.gamma, cfg.ebar, g.n
    inv_tx, inv_te = 1.0 / cfg.tau_x, 1.0 / cfg.tau_e
    s, r, u = cfg.s, cfg.r, cfg.u
    src, dst, deg = g._src, g._dst, g._deg

    def f(t, y):
        x, e = y[:n], y[n]
        sx = s(x)
        avg = sx + np.bincount(src, weights=sx[dst] - sx[src], minlength=n) / deg
        out = np.empty_like(y)
        out[:n] = (beta * r(e) - x + (1.0 - beta) * avg) * inv_tx
        out[n] = (-gamma * e + u(x.sum() / n) - gamma * ebar) * inv_te
        return out

    return f


def simulate_network(cfg: ModelConfig, g: Graph, st0: NetworkState, t_end: float,
                     opts: SolverOptions = SolverOptions()) -> Trajectory:
    if st0.x.shape != (g.n,):
        raise SizeMismatch(f"state has {st0.x.size} opinions, graph has {g.n} vertices")
    return integrate(make_rhs(cfg, g), st0.as_array(), 0.0, t_end, opts)


def sync_error(x) -> float:
    """``max_ij |x_i - x_j|``."""
    x = np.asarray(x, dtype=float)
    return float(np.max(x) - np.min(x))


def sync_error_series(traj: Trajectory) -> np.ndarray:
    xs = traj.states[:, :-1]
    return xs.max(axis=1) - xs.min(axis=1)


def check_forward_invariance(cfg: ModelConfig, g: Graph, p0: float, e0: float, t_end: float,
                             opts: SolverOptions = INVARIANCE_OPTS) -> float:
    """Largest synchronization error along the run started at ``(p0 1, e0)``."""
    traj = simulate_network(cfg, g, NetworkState.consensus(g.n, p0, e0), t_end, opts)
    return float(np.max(sync_error_series(traj)))


def check_odd_dynamics(cfg: ModelConfig, g: Graph, st: NetworkState) -> float:
    """``||F(-y) + F(y)||_inf``; zero up to rounding when the odd-symmetry assumption holds."""
    plus = rhs_network(cfg, g, st).as_array()
    minus = rhs_network(cfg, g, NetworkState(-st.x, -st.e)).as_array()
    return float(np.max(np.abs(plus + minus)))
