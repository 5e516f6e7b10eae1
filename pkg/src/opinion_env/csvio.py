"""CSV emission with fixed headers and 17 significant digits."""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Optional

from .bifurcation import BifurcationDiagram
from .fsoe import Equilibrium
from .ode_solvers import Trajectory

EQUILIBRIA_HEADER = ["beta", "p_star", "e_star", "trace", "det", "stability"]
DIAGRAM_HEADER = ["beta", "branch_id", "p_star", "e_star", "trace", "det", "stability",
                  "cycle_p_min", "cycle_p_max", "cycle_period"]
POINTS_HEADER = ["beta", "kind", "detection", "omega0", "coefficient"]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return format(v, ".17g")
    return str(getattr(v, "value", v))


def to_csv(header: list[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def fsoe_trajectory_csv(traj: Trajectory) -> str:
    return to_csv(["t", "p", "e"], ([float(t), float(s[0]), float(s[1])] for t, s in zip(traj.times, traj.states)))


def network_trajectory_csv(traj: Trajectory, with_sync_error: bool = False) -> str:
    n = traj.states.shape[1] - 1
    header = ["t"] + [f"x_{i}" for i in range(n)] + ["e"]
    if with_sync_error:
        header.append("sync_error")

    def rows():
        for t, s in zip(traj.times, traj.states):
            row = [float(t)] + [float(v) for v in s]
            if with_sync_error:
                row.append(float(s[:-1].max() - s[:-1].min()))
            yield row

    return to_csv(header, rows())


def portrait_csv(runs: list[Trajectory]) -> str:
    def rows():
        for k, traj in enumerate(runs):
            for t, s in zip(traj.times, traj.states):
                yield [k, float(t), float(s[0]), float(s[1])]

    return to_csv(["run_id", "t", "p", "e"], rows())


def equilibria_csv(beta: float, eqs: list[Equilibrium]) -> str:
    return to_csv(EQUILIBRIA_HEADER, ([float(beta), e.p_star, e.e_star, e.jac.trace, e.jac.det, e.stability]
                                      for e in eqs))


def diagram_csv(d: BifurcationDiagram) -> str:
    index = {float(b): i for i, b in enumerate(d.beta_grid)}

    def rows():
        recs = [(pt.beta, br.branch_id, pt) for br in d.branches for pt in br.points]
        recs.sort(key=lambda r: (r[0], r[1]))
        for beta, bid, pt in recs:
            cyc: Optional[object] = d.cycle_amplitudes.get(index.get(beta)) if bid == 0 else None
            yield [beta, bid, pt.p_star, pt.e_star, pt.trace, pt.det, pt.stability,
                   getattr(cyc, "p_min", None), getattr(cyc, "p_max", None), getattr(cyc, "period", None)]

    return to_csv(DIAGRAM_HEADER, rows())


def points_csv(d: BifurcationDiagram) -> str:
    return to_csv(POINTS_HEADER, ([p.beta, p.kind, p.detection, p.omega0, p.coefficient]
                                  for p in d.bifurcation_points))
