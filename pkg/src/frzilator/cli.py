"""Command-line front end.

    frzilator simulate --gamma 0.1 --eps 0.01 --x0 0.3,0.3,0.3 --t-end 50
    frzilator singular-cycle --gamma 0.1 -o gamma0.csv
    frzilator limit-cycle --gamma 0.1 --eps 0.01
    frzilator verify-charts --samples 1000 --seed 7
    frzilator scan --gamma-grid 0.08,0.1 --eps-ladder 0.01,0.005
    frzilator convergence --eps-ladder 0.0075,0.005,0.0035,0.0025

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 no convergence.
Errors are reported on stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io
from .config import SUBCOMMANDS, RunConfig, parse_config
from .errors import FrzError, ValidationError
from .integrator import integrate
from .model import Params, VectorField
from .poincare import ConvergenceRow, convergence_study, find_limit_cycle, fit_contraction
from .singular_cycle import build_singular_cycle, hausdorff
from .verify import run_checks


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="key = value configuration file")
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--rel-tol", type=float)
    sp.add_argument("--abs-tol", type=float)
    sp.add_argument("-o", "--output", help="output file (default: stdout)")


def _sections(sp: argparse.ArgumentParser) -> None:
    for k in ("delta1", "delta2", "delta3"):
        sp.add_argument(f"--{k}", type=float)
    sp.add_argument("--half-width", type=float, help="half side of the section rectangles")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frzilator", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate one trajectory; CSV t,f,c,e")
    _common(sp)
    sp.add_argument("--x0", help="initial state f,c,e")
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--field", help="auxiliary, original, layer or linear")

    sp = sub.add_parser("singular-cycle", help="the eps = 0 cycle; CSV seg_index,kind,f,c,e")
    _common(sp)
    sp.add_argument("--corner-rule", help="fold-exit (default) or immediate")
    sp.add_argument("--n-points", type=int)

    sp = sub.add_parser("limit-cycle", help="attracting cycle via the return map; JSON report")
    _common(sp)
    _sections(sp)
    sp.add_argument("--orbit-csv", help="also write the recorded orbit as CSV")

    sp = sub.add_parser("verify-charts", help="randomised invariant checks; PASS/FAIL table")
    _common(sp)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)

    sp = sub.add_parser("scan", help="limit cycles over a gamma x eps grid; CSV")
    _common(sp)
    _sections(sp)
    sp.add_argument("--gamma-grid", help="comma-separated gamma values")
    sp.add_argument("--eps-ladder", help="comma-separated eps values")
    sp.add_argument("--workers", type=int)

    sp = sub.add_parser("convergence", help="eps ladder study; CSV eps,hausdorff,period,K_fit")
    _common(sp)
    _sections(sp)
    sp.add_argument("--eps-ladder", help="comma-separated, strictly decreasing eps values")
    sp.add_argument("--workers", type=int)
    return ap


_NOT_CONFIG = {"command", "config", "orbit_csv"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    overrides = {k: v for k, v in vars(ns).items() if k not in _NOT_CONFIG}
    return parse_config(ns.config, overrides)


# --- subcommands -----------------------------------------------------------


def cmd_simulate(cfg: RunConfig, ns) -> int:
    tr = integrate(VectorField.parse(cfg.field), np.array(cfg.x0), cfg.params, cfg.t_end, cfg.integrator())
    io.write_table(cfg.output, ("t", "f", "c", "e"),
                   ((t, *s) for t, s in zip(tr.times, tr.states)))
    return 0


def cmd_singular_cycle(cfg: RunConfig, ns) -> int:
    cyc = build_singular_cycle(Params(cfg.gamma, 0.0), cfg.corner_rule, cfg.n_points)
    io.write_table(cfg.output, ("seg_index", "kind", "f", "c", "e"), cyc.rows())
    return 0


def cmd_limit_cycle(cfg: RunConfig, ns) -> int:
    res = find_limit_cycle(cfg.params, cfg.poincare())
    gamma0 = build_singular_cycle(Params(cfg.gamma, 0.0))
    io.write_json(cfg.output, res.report(gamma0))
    if getattr(ns, "orbit_csv", None):
        io.write_table(ns.orbit_csv, ("seg_index", "kind", "f", "c", "e"), res.orbit.rows())
    return 0


def cmd_verify_charts(cfg: RunConfig, ns) -> int:
    rows = run_checks(cfg.params, cfg.samples, cfg.seed)
    io.write_table(cfg.output, ("check", "samples", "max_residual", "threshold", "status"),
                   ((r.name, r.samples, r.max_residual, r.threshold, r.status) for r in rows))
    return 0 if all(r.passed for r in rows) else 3


def _scan_cell(args):
    cfg, g, e = args
    gamma0 = build_singular_cycle(Params(g, 0.0))
    try:
        r = find_limit_cycle(Params(g, e), cfg.poincare(g), fd_check=False)
    except FrzError as exc:
        return (g, e, type(exc).__name__, np.nan, np.nan, np.nan, np.nan)
    return (g, e, "ok", r.period, r.log_contraction, hausdorff(r.orbit.polyline(), gamma0.polyline()),
            float(r.fixed_point[0]))


def cmd_scan(cfg: RunConfig, ns) -> int:
    gammas = cfg.gamma_grid or (cfg.gamma,)
    epss = cfg.eps_ladder or (cfg.eps,)
    cells = [(cfg, g, e) for g in gammas for e in epss]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            rows = list(ex.map(_scan_cell, cells))
    else:
        rows = [_scan_cell(c) for c in cells]
    io.write_table(cfg.output, ("gamma", "eps", "status", "period", "log_contraction", "hausdorff", "fixed_f"), rows)
    return 0


def cmd_convergence(cfg: RunConfig, ns) -> int:
    if cfg.eps_ladder is None:
        raise ValidationError("eps_ladder", "the convergence study needs an eps ladder")
    rows: list[ConvergenceRow] = convergence_study(cfg.params, cfg.eps_ladder, cfg.poincare(), cfg.workers)
    K, _, _ = fit_contraction([r.eps for r in rows], [r.log_contraction for r in rows])
    io.write_table(cfg.output, ("eps", "hausdorff", "period", "K_fit"),
                   ((r.eps, r.hausdorff, r.period, K) for r in rows))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "singular-cycle": cmd_singular_cycle,
    "limit-cycle": cmd_limit_cycle,
    "verify-charts": cmd_verify_charts,
    "scan": cmd_scan,
    "convergence": cmd_convergence,
}
assert set(COMMANDS) == set(SUBCOMMANDS)


def error_json(exc: BaseException, code: int) -> str:
    body = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("key", "reason", "line_no"):
        if hasattr(exc, attr):
            body[attr] = getattr(exc, attr)
    return io.dumps(body)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[ns.command](cfg, ns)
    except FrzError as exc:
        sys.stderr.write(error_json(exc, exc.exit_code))
        return exc.exit_code
    except BrokenPipeError:
        # reader closed the pipe early (e.g. ``| head``); not an error
        sys.stdout = open(os.devnull, "w")
        return 0
    except OSError as exc:
        sys.stderr.write(error_json(exc, 2))
        return 2


if __name__ == "__main__":
    sys.exit(main())
