"""Smooth odd function families and the scalar model configuration.

The coupled model uses three scalar maps:

* ``s`` -- signal function, opinion -> perceived behaviour,
* ``r`` -- environment response, deviation -> opinion forcing,
* ``u`` -- control, synchronized opinion -> environment forcing.

Each is either ``tanh(k x)`` or an affine map, with closed-form derivatives
up to third order so that the normal-form coefficients can be evaluated at
machine precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

ODD_TOL = 1e-10


class FunctionKind(str, enum.Enum):
    TANH_GAIN = "TanhGain"
    AFFINE = "Affine"


@dataclass(frozen=True)
class SmoothFunction:
    """``tanh(gain * x)`` or ``slope * x + offset``.

    ``gain_or_slope`` is the gain for :attr:`FunctionKind.TANH_GAIN` and the
    slope for :attr:`FunctionKind.AFFINE`; ``offset`` is ignored by the tanh
    family. Works on floats and numpy arrays alike.
    """

    kind: FunctionKind
    gain_or_slope: float
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FunctionKind(self.kind))
        if not math.isfinite(self.gain_or_slope) or not math.isfinite(self.offset):
            raise ValueError("function parameters must be finite")

    @classmethod
    def tanh(cls, gain: float) -> "SmoothFunction":
        return cls(FunctionKind.TANH_GAIN, float(gain))

    @classmethod
    def affine(cls, slope: float, offset: float = 0.0) -> "SmoothFunction":
        return cls(FunctionKind.AFFINE, float(slope), float(offset))

    def __call__(self, x):
        if self.kind is FunctionKind.TANH_GAIN:
            return np.tanh(self.gain_or_slope * x)
        return self.gain_or_slope * x + self.offset

    def scalar(self):
        """Plain-float version of :meth:`__call__` for hot integration loops."""
        k, c = self.gain_or_slope, self.offset
        if self.kind is FunctionKind.TANH_GAIN:
            return lambda x: math.tanh(k * x)
        return lambda x: k * x + c

    def derivative(self, x, order: int = 1):
        return eval_with_derivatives(self, x)[order]

    def to_dict(self) -> dict:
        if self.kind is FunctionKind.TANH_GAIN:
            return {"kind": self.kind.value, "gain": self.gain_or_slope}
        return {"kind": self.kind.value, "slope": self.gain_or_slope, "offset": self.offset}


def eval_with_derivatives(f: SmoothFunction, x):
    """Return ``(f, f', f'', f''')`` evaluated at `x`.

    Closed form for both families. For ``t = tanh(k x)``::

        f'   = k (1 - t^2)
        f''  = -2 k^2 t (1 - t^2)
        f''' = -2 k^3 (1 - t^2)(1 - 3 t^2)
    """
    if f.kind is FunctionKind.TANH_GAIN:
        k = f.gain_or_slope
        t = np.tanh(k * x)
        sech2 = 1.0 - t * t
        return (
            t,
            k * sech2,
            -2.0 * k * k * t * sech2,
            -2.0 * k**3 * sech2 * (1.0 - 3.0 * t * t),
        )
    zero = 0.0 * x
    return (f.gain_or_slope * x + f.offset, f.gain_or_slope + zero, zero, zero)


@dataclass(frozen=True)
class ModelConfig:
    """Scalar parameters and function families of the coupled model.

    ``ebar`` is the environment threshold; the simulated environment variable
    is the deviation ``e = e_tilde - ebar``.
    """

    s: SmoothFunction
    r: SmoothFunction
    u: SmoothFunction
    beta: float = 0.0
    gamma: float = 0.2
    ebar: float = 0.5
    tau_x: float = 1.0
    tau_e: float = 1.0

    @property
    def tau(self) -> float:
        """Ratio ``tau_e / tau_x``."""
        return self.tau_e / self.tau_x

    def with_beta(self, beta: float) -> "ModelConfig":
        return replace(self, beta=float(beta))

    def with_gamma(self, gamma: float) -> "ModelConfig":
        return replace(self, gamma=float(gamma))


def reference_config(beta: float = 0.0, gamma: float = 0.2, ebar: float = 0.5,
                     recentered: bool = True) -> ModelConfig:
    """The reference setup: s = tanh(3x), r = tanh(-3x), u affine with unit slope.

    With ``recentered=True`` (the default) ``u(x) = x + gamma*ebar`` so that
    ``u(0) = gamma*ebar`` and the origin is an equilibrium. ``recentered=False``
    gives the literal ``u(x) = x - gamma*ebar`` variant.
    """
    offset = gamma * ebar if recentered else -gamma * ebar
    return ModelConfig(
        s=SmoothFunction.tanh(3.0),
        r=SmoothFunction.tanh(-3.0),
        u=SmoothFunction.affine(1.0, offset),
        beta=beta,
        gamma=gamma,
        ebar=ebar,
    )


@dataclass(frozen=True)
class OddnessViolation:
    function: str  # "s", "r" or "u"
    x: float
    residual: float


def check_odd_symmetry(cfg: ModelConfig, sample_count: int = 201,
                       tol: float = ODD_TOL) -> list[OddnessViolation]:
    """Check the odd-symmetry assumption on a uniform grid over [-1, 1].

    ``s`` and ``r`` must be odd; ``u`` must satisfy
    ``u(x) + u(-x) = 2 gamma ebar``. Returns the violations (empty when the
    assumption holds on every sample).
    """
    if sample_count < 2:
        raise ValueError("sample_count must be >= 2")
    xs = np.linspace(-1.0, 1.0, sample_count)
    shift = 2.0 * cfg.gamma * cfg.ebar
    residuals = {
        "s": np.abs(cfg.s(-xs) + cfg.s(xs)),
        "r": np.abs(cfg.r(-xs) + cfg.r(xs)),
        "u": np.abs(cfg.u(-xs) + cfg.u(xs) - shift),
    }
    report = []
    for name, res in residuals.items():
        for x, v in zip(xs, res):
            if v > tol:
                report.append(OddnessViolation(name, float(x), float(v)))
    return report


@dataclass
class ConfigReport:
    hard_errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.hard_errors


def validate_config(cfg: ModelConfig) -> ConfigReport:
    """Parameter-range checks (hard) and the threshold-scale assumption (soft).

    The threshold assumption ``0 < u_min`` and ``ebar in [u_min/gamma,
    u_max/gamma]`` is only warned about, with ``u_min = u(-1)`` and
    ``u_max = u(1)``; the reference numerical setup itself has ``u(-1) < 0``.
    """
    rep = ConfigReport()
    if not 0.0 <= cfg.beta <= 1.0:
        rep.hard_errors.append("beta out of range [0, 1]")
    if not 0.0 <= cfg.gamma <= 1.0:
        rep.hard_errors.append("gamma out of range [0, 1]")
    if not cfg.tau_x > 0.0:
        rep.hard_errors.append("tau_x must be positive")
    if not cfg.tau_e > 0.0:
        rep.hard_errors.append("tau_e must be positive")
    if cfg.ebar < 0.0:
        rep.hard_errors.append("ebar must be non-negative")

    u_min, u_max = float(cfg.u(-1.0)), float(cfg.u(1.0))
    if u_min <= 0.0:
        rep.warnings.append(f"threshold assumption: u_min = u(-1) = {u_min:.6g} is not positive")
    if cfg.gamma > 0.0:
        lo, hi = u_min / cfg.gamma, u_max / cfg.gamma
        if not lo <= cfg.ebar <= hi:
            rep.warnings.append(
                f"threshold assumption: ebar = {cfg.ebar:.6g} outside [{lo:.6g}, {hi:.6g}]")
    return rep
