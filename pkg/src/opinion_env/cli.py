"""Command-line front end.

Exit codes: 0 success, 1 failed verification checks, 2 configuration or usage
error, 3 numerical failure. The config argument is a JSON file path or the
word ``reference`` for the built-in reference setup.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bifurcation as bf
from . import csvio, fsoe
from .config import REFERENCE_CONFIG, load_config, parse_config
from .errors import ConfigError, DivisionByZero, GraphError, SolverFailure
from .graph import load_graph
from .network_dynamics import NetworkState, simulate_network, sync_error_series
from .ode_solvers import Method, SolverOptions
from .verify import all_passed, format_table, run_verify

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("opinion_env")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _load(args):
    if args.config == "reference":
        cfg, graph, warnings = parse_config(dict(REFERENCE_CONFIG))
        beta_set = False
    else:
        cfg, graph, warnings, beta_set = load_config(args.config)
    for w in warnings:
        log.warning(w)
    beta = getattr(args, "beta", None)
    if beta is not None:
        if not 0.0 <= beta <= 1.0:
            raise ConfigError("beta out of range [0, 1]")
        cfg = cfg.with_beta(beta)
    elif getattr(args, "needs_beta", False) and not beta_set:
        raise ConfigError("beta is required: pass --beta or set it in the config file")
    return cfg, graph


def _write(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _solver_opts(args, **extra) -> SolverOptions:
    if args.method == Method.RK4_FIXED.value:
        return SolverOptions.rk4(args.step, **extra)
    return SolverOptions.adaptive(args.tol, **extra)


def cmd_simulate(args) -> int:
    cfg, _ = _load(args)
    traj = fsoe.simulate_fsoe(cfg, (args.p0, args.e0), args.t_end, _solver_opts(args))
    _write(csvio.fsoe_trajectory_csv(traj), args.out)
    return EXIT_OK


def cmd_equilibria(args) -> int:
    cfg, _ = _load(args)
    eqs = fsoe.equilibria(cfg)
    _write(csvio.equilibria_csv(cfg.beta, eqs), args.out)
    return EXIT_OK


def cmd_diagram(args) -> int:
    cfg, _ = _load(args)
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if not 0.0 <= args.beta_min < args.beta_max <= 1.0:
        raise UsageError("need 0 <= --beta-min < --beta-max <= 1")
    diagram = bf.sweep_beta(cfg, args.beta_min, args.beta_max, args.steps,
                            cycles=args.cycles == "on", jobs=args.jobs)
    prefix = args.out
    Path(f"{prefix}_diagram.csv").write_text(csvio.diagram_csv(diagram), encoding="utf-8", newline="\n")
    Path(f"{prefix}_points.csv").write_text(csvio.points_csv(diagram), encoding="utf-8", newline="\n")
    for p in diagram.bifurcation_points:
        log.info("%s (%s) at beta = %.10f", p.kind.value, p.detection.value, p.beta)
    return EXIT_OK


def portrait_lattice(grid: int, e_lo: float, e_hi: float) -> list[tuple[float, float]]:
    if grid == 1:
        return [(0.0, 0.5 * (e_lo + e_hi))]
    ps = np.linspace(-1.0, 1.0, grid)
    es = np.linspace(e_lo, e_hi, grid)
    return [(float(p), float(e)) for p in ps for e in es]


def cmd_portrait(args) -> int:
    cfg, _ = _load(args)
    if args.grid < 1:
        raise UsageError("--grid must be positive")
    opts = SolverOptions.adaptive(args.tol)
    runs = [fsoe.simulate_fsoe(cfg, y0, args.t_end, opts)
            for y0 in portrait_lattice(args.grid, args.e_lo, args.e_hi)]
    _write(csvio.portrait_csv(runs), args.out)
    return EXIT_OK


def parse_x0(spec: str, n: int) -> np.ndarray:
    kind, _, value = spec.partition(":")
    try:
        if kind == "consensus":
            p = float(value)
            if not -1.0 <= p <= 1.0:
                raise UsageError("consensus opinion must lie in [-1, 1]")
            return np.full(n, p)
        if kind == "random":
            seed = int(value) if value else 42
            return np.random.default_rng(seed).uniform(-1.0, 1.0, n)
    except ValueError:
        pass
    raise UsageError(f"bad --x0 '{spec}': use consensus:<p> or random:<seed>")


def cmd_network(args) -> int:
    cfg, graph_path = _load(args)
    path = args.graph or graph_path
    if path is None:
        raise UsageError("a graph is required: pass --graph or set 'graph' in the config")
    try:
        g = load_graph(path)
    except OSError as exc:
        raise ConfigError(f"cannot read graph {path}: {exc.strerror}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid graph {path}: {exc}") from None
    st0 = NetworkState(parse_x0(args.x0, g.n), args.e0)
    traj = simulate_network(cfg, g, st0, args.t_end, SolverOptions.adaptive(args.tol))
    _write(csvio.network_trajectory_csv(traj, args.with_sync_error), args.out)
    log.info("max sync error %.3g, final %.3g",
             float(sync_error_series(traj).max()), float(sync_error_series(traj)[-1]))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg, _ = _load(args)
    checks = run_verify(cfg, seed=args.seed)
    print(format_table(checks))
    ok = all_passed(checks)
    print("ALL CHECKS PASSED" if ok else "SOME CHECKS FAILED")
    return EXIT_OK if ok else EXIT_CHECKS


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opinion-env", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, beta=True, needs_beta=True):
        p.add_argument("config", help="config JSON path, or 'reference'")
        if beta:
            p.add_argument("--beta", type=float)
        p.set_defaults(needs_beta=needs_beta)

    def solver(p):
        p.add_argument("--method", choices=[m.value for m in Method], default=Method.ADAPTIVE45.value)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--step", type=float, default=1e-2)

    p = sub.add_parser("simulate", help="planar trajectory CSV (t,p,e)")
    common(p)
    p.add_argument("--p0", type=float, default=0.01)
    p.add_argument("--e0", type=float, default=0.0)
    p.add_argument("--t-end", type=float, default=100.0)
    solver(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equilibria", help="equilibria CSV at one beta")
    common(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("diagram", help="bifurcation diagram and points CSVs")
    common(p, beta=False, needs_beta=False)
    p.add_argument("--beta-min", type=float, default=0.0)
    p.add_argument("--beta-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--cycles", choices=["on", "off"], default="on")
    p.add_argument("--jobs", type=int, default=bf.default_jobs())
    p.add_argument("--out", default="diagram", help="output prefix")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("portrait", help="trajectories from a lattice of initial states")
    common(p)
    p.add_argument("--grid", type=int, default=5)
    p.add_argument("--t-end", type=float, default=100.0)
    p.add_argument("--e-lo", type=float, default=-2.0)
    p.add_argument("--e-hi", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("verify", help="run the invariant suite")
    common(p, beta=False, needs_beta=False)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("network", help="full network trajectory CSV")
    common(p)
    p.add_argument("--graph")
    p.add_argument("--x0", default="random:42", help="consensus:<p> or random:<seed>")
    p.add_argument("--e0", type=float, default=0.0)
    p.add_argument("--t-end", type=float, default=100.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--with-sync-error", action="store_true", help="append a sync_error column")
    p.add_argument("--out")
    p.set_defaults(func=cmd_network)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, GraphError, UsageError, DivisionByZero) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
