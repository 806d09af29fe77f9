"""Command-line entry point.

Exit status: 0 success, 1 usage or input error, 2 numerical-verification
failure (including a run halted by vacuum or non-finite values).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from typing import List, Optional

import numpy as np

from . import _backend
from .analysis import GaussianDatum, fit_decay, state_l2, state_sobolev_norm
from .config import ConfigError, RunConfig, load_config
from .dynamics import SolverConfig, solve
from .errors import FormatError, NonFiniteError, NSKError, RegimeError, VacuumError
from .experiments import lowfreq_sup_series, run_checks
from .field import random_state
from .green import propagate
from .model import Case, classify_phase
from .snapshot import read_snapshot, write_snapshot
from .spectrum import roots

log = logging.getLogger("nskorteweg")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_path(cfg: RunConfig, args, name: str) -> str:
    base = args.out or cfg.get("output.dir", ".")
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, f"{cfg.get('output.prefix', 'run')}_{name}")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


# --------------------------------------------------------------------------
def cmd_spectrum(cfg: RunConfig, args) -> int:
    p = cfg.params()
    if p.excluded:
        print("warning: Case 5 (gamma = 0, A^2 < kappa) is an excluded regime with no global theory",
              file=sys.stderr)
    r = np.linspace(cfg.get("spectrum.rmin", 0.0), cfg.get("spectrum.rmax", 10.0),
                    cfg.get("spectrum.count", 201))
    lp, lm = roots(p, r)
    rows = [(x, a.real, a.imag, b.real, b.imag, p.case.name) for x, a, b in zip(r, lp, lm)]
    path = _out_path(cfg, args, "spectrum.csv")
    _write_csv(path, ["xi", "re_lambda_plus", "im_lambda_plus", "re_lambda_minus",
                      "im_lambda_minus", "case"], rows)
    print(path)
    return EXIT_OK


def cmd_phase(cfg: RunConfig, args) -> int:
    law = cfg.law()
    if law is None:
        raise ConfigError("phase needs an explicit pressure law (power, vdw or polynomial)")
    rows = []
    for rho in cfg.get("phase.densities", (1.0,)):
        rep = classify_phase(law, rho)
        rows.append((rho, rep.phase.value, "" if rep.a1 is None else rep.a1,
                     "" if rep.a2 is None else rep.a2))
    path = _out_path(cfg, args, "phase.csv")
    _write_csv(path, ["density", "phase", "a1", "a2"], rows)
    print(path)
    return EXIT_OK


def _initial(cfg: RunConfig, params, grid):
    snap = cfg.get("init.snapshot")
    if snap:
        state = read_snapshot(snap, expected_digest=params.digest()).state
        if state.grid != grid:
            raise ConfigError(f"snapshot grid {state.grid} differs from configured grid {grid}")
        return state
    return random_state(grid, cfg.get("init.amplitude", 1e-3), cfg.get("init.decay", 2.0),
                        cfg.get("init.seed", 0))


def cmd_propagate(cfg: RunConfig, args) -> int:
    p = cfg.params()
    g = cfg.grid(p.n)
    state = _initial(cfg, p, g)
    T = cfg.get("propagate.time", 1.0)
    count = max(cfg.get("propagate.samples", 11), 2)
    rows = []
    for t in np.linspace(0.0, T, count):
        s = propagate(state, float(t), p)
        rows.append((s.t, state_l2(s), state_sobolev_norm(s, cfg.get("solver.sobolev_s", 1.0))))
    final = propagate(state, T, p)
    write_snapshot(_out_path(cfg, args, "propagated.nsks"), final, p.digest())
    path = _out_path(cfg, args, "norms.csv")
    _write_csv(path, ["t", "l2", "hs"], rows)
    print(path)
    return EXIT_OK


def _solver_config(cfg: RunConfig) -> SolverConfig:
    cfg.require_section("solver")
    try:
        return SolverConfig(
            dt=cfg.require("solver.dt"), steps=cfg.require("solver.steps"),
            scheme=cfg.get("solver.scheme", "ETD2"), dealias=cfg.get("solver.dealias", True),
            floor=cfg.get("solver.floor", 0.1), cadence=cfg.get("solver.cadence", 1),
            override=cfg.get("solver.override", False), korteweg=cfg.get("solver.korteweg", "reformulated"),
            sobolev_s=cfg.get("solver.sobolev_s", 1.0))
    except ValueError as err:
        raise ConfigError(f"solver: {err}") from err


def _dump_trajectory(cfg, args, traj, digest):
    for i, s in enumerate(traj.states):
        write_snapshot(_out_path(cfg, args, f"{i:05d}.nsks"), s, digest)
    path = _out_path(cfg, args, "diagnostics.csv")
    _write_csv(path, ["t", "mass", "l2", "hs", "min_density"], traj.rows())
    return path


def cmd_solve(cfg: RunConfig, args) -> int:
    p = cfg.params()
    g = cfg.grid(p.n)
    sc = _solver_config(cfg)
    state = _initial(cfg, p, g)
    try:
        traj = solve(state, p, sc)
    except (VacuumError, NonFiniteError) as err:
        path = _dump_trajectory(cfg, args, err.trajectory, p.digest())
        print(f"run halted: {err}; partial diagnostics in {path}", file=sys.stderr)
        return EXIT_FAIL
    print(_dump_trajectory(cfg, args, traj, p.digest()))
    return EXIT_OK


def cmd_decay(cfg: RunConfig, args) -> int:
    p = cfg.params()
    if p.case != Case.CASE1 or p.n != 2:
        raise ConfigError("decay experiment needs n = 2 and Case 1 parameters")
    datum = GaussianDatum(cfg.get("decay.sigma", 1.0), cfg.get("decay.density", 1.0),
                          cfg.get("decay.momentum", (1.0, 1.0)))
    times = np.geomspace(cfg.get("decay.tmin", 1e2), cfg.get("decay.tmax", 1e4),
                         cfg.get("decay.samples", 9))
    sups = lowfreq_sup_series(p, datum, times)
    fit = fit_decay(times, sups)
    expected = cfg.get("decay.expected_slope", -1.0)
    tol = cfg.get("decay.tolerance", 0.1)
    ok = abs(fit.slope - expected) <= tol
    _write_csv(_out_path(cfg, args, "decay.csv"), ["t", "norm", "band"],
               [(t, v, "low") for t, v in zip(times, sups)])
    report = {"slope": fit.slope, "expected_slope": expected, "tolerance": tol,
              "max_residual": fit.max_residual, "pass": ok}
    with open(_out_path(cfg, args, "decay.json"), "w") as fh:
        json.dump(report, fh, indent=2)
    print(json.dumps(report))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(cfg: RunConfig, args) -> int:
    level = args.level or cfg.get("verify.level", "quick")
    if level not in ("quick", "full"):
        raise ConfigError(f"verify.level must be 'quick' or 'full', got {level!r}")
    records = run_checks(level)
    ok = all(r["pass"] for r in records)
    report = {"level": level, "pass": ok, "checks": records}
    text = json.dumps(report, indent=2)
    if args.out:
        with open(_out_path(cfg, args, "verify.json"), "w") as fh:
            fh.write(text)
    print(text)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "spectrum": cmd_spectrum,
    "phase": cmd_phase,
    "propagate": cmd_propagate,
    "solve": cmd_solve,
    "decay": cmd_decay,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nskorteweg", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None, help="numba worker threads")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("-c", "--config", help="config file (default: shipped reference config)")
        sp.add_argument("-s", "--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key")
        sp.add_argument("-o", "--out", help="output directory")
        if name == "verify":
            sp.add_argument("--level", choices=("quick", "full"))
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads is not None:
        if args.threads < 1:
            parser.error("--threads must be >= 1")
        _backend.set_threads(args.threads)
    try:
        cfg = load_config(args.config, args.set)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, FormatError, RegimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except NSKError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
