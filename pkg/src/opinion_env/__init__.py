"""Opinion dynamics coupled with an environment: simulation and bifurcation analysis."""

from .model_functions import ModelConfig, SmoothFunction, reference_config
from .graph import Graph, build_graph
from .fsoe import Equilibrium, FsoeState, Jacobian2, Stability, equilibria, find_fixed_points
from .network_dynamics import NetworkState
from .ode_solvers import SolverOptions, Trajectory, integrate

__all__ = [
    "ModelConfig", "SmoothFunction", "reference_config", "Graph", "build_graph",
    "Equilibrium", "FsoeState", "Jacobian2", "Stability", "equilibria", "find_fixed_points",
    "NetworkState", "SolverOptions", "Trajectory", "integrate",
]
__version__ = "0.1.0"
