"""Run-configuration JSON: strict schema, unknown keys rejected.

Example (the reference setup)::

    {
      "s": {"kind": "TanhGain", "gain": 3},
      "r": {"kind": "TanhGain", "gain": -3},
      "u": {"kind": "Affine", "slope": 1, "offset": "gamma*ebar"},
      "gamma": 0.2, "ebar": 0.5, "tau_x": 1, "tau_e": 1
    }

``offset`` accepts a number or one of the symbolic strings ``"gamma*ebar"`` /
``"-gamma*ebar"``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError
from .model_functions import ModelConfig, SmoothFunction, validate_config


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TanhSpec(_Strict):
    kind: Literal["TanhGain"]
    gain: float


class AffineSpec(_Strict):
    kind: Literal["Affine"]
    slope: float
    offset: Union[float, Literal["gamma*ebar", "-gamma*ebar"]] = 0.0


FunctionSpec = Annotated[Union[TanhSpec, AffineSpec], Field(discriminator="kind")]


class RunConfigFile(_Strict):
    s: FunctionSpec
    r: FunctionSpec
    u: FunctionSpec
    gamma: float
    ebar: float
    tau_x: float
    tau_e: float
    beta: Optional[float] = None
    graph: Optional[str] = None


def _function(spec, gamma: float, ebar: float) -> SmoothFunction:
    if isinstance(spec, TanhSpec):
        return SmoothFunction.tanh(spec.gain)
    offset = spec.offset
    if offset == "gamma*ebar":
        offset = gamma * ebar
    elif offset == "-gamma*ebar":
        offset = -gamma * ebar
    return SmoothFunction.affine(spec.slope, float(offset))


def parse_config(data: dict, base_dir: Optional[Path] = None) -> tuple[ModelConfig, Optional[Path], list[str]]:
    """Validate a config mapping.

    Returns the model configuration, the resolved graph path (if any) and the
    soft warnings. Raises :class:`ConfigError` on schema or range violations.
    """
    try:
        doc = RunConfigFile.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None
    cfg = ModelConfig(
        s=_function(doc.s, doc.gamma, doc.ebar),
        r=_function(doc.r, doc.gamma, doc.ebar),
        u=_function(doc.u, doc.gamma, doc.ebar),
        beta=0.0 if doc.beta is None else doc.beta,
        gamma=doc.gamma,
        ebar=doc.ebar,
        tau_x=doc.tau_x,
        tau_e=doc.tau_e,
    )
    report = validate_config(cfg)
    if report.hard_errors:
        raise ConfigError("; ".join(report.hard_errors))
    graph = None
    if doc.graph is not None:
        graph = Path(doc.graph)
        if base_dir is not None and not graph.is_absolute():
            graph = base_dir / graph
    return cfg, graph, report.warnings


def has_beta(data: dict) -> bool:
    return data.get("beta") is not None


def load_config(path) -> tuple[ModelConfig, Optional[Path], list[str], bool]:
    """Read and validate a config file; the last item says whether it set beta."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    cfg, graph, warnings = parse_config(data, path.parent)
    return cfg, graph, warnings, has_beta(data)


REFERENCE_CONFIG = {
    "s": {"kind": "TanhGain", "gain": 3.0},
    "r": {"kind": "TanhGain", "gain": -3.0},
    "u": {"kind": "Affine", "slope": 1.0, "offset": "gamma*ebar"},
    "gamma": 0.2,
    "ebar": 0.5,
    "tau_x": 1.0,
    "tau_e": 1.0,
}
