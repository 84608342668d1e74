"""Command-line front end.

Every subcommand writes into one output directory: a ``manifest.json``
(config echo, versions, timings) plus CSV and JSON results. Exit codes are
0 on success, 2 for configuration errors, 3 when a solver hypothesis
appears to fail (NotReached / MissingSolution) and 4 for other numerical
failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig, parse_config, validate
from .eigen import eigenvalue, spectrum
from .errors import McShootError, MissingSolution, NotReached
from .integrator import integrate_cauchy, write_csv
from .limit import classical_criteria, compute_limit, energy_continuity_check
from .phase import orbit_period, phase_portrait, write_polylines
from .problem import check_structural
from .regularization import RegularizedOperator
from .shooting import solve_approx

log = logging.getLogger("mcshoot")

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERIC = 0, 2, 3, 4


def _dump(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_plain)
        fh.write("\n")


def _plain(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# --------------------------------------------------------------------------- modes
def _run_eig(cfg: RunConfig, out: Path) -> dict:
    a = cfg.problem().weight
    res = spectrum(a, cfg.k)
    write_csv(out / "eigenvalues.csv", ["k", "lambda_k", "prufer_terminal", "bisection_width"],
              [(r.k, r.lambda_k, r.prufer_terminal, r.bisection_width) for r in res])
    return {"eigenvalues": [asdict(r) for r in res]}


def _run_rotation(cfg: RunConfig, out: Path) -> dict:
    pb = cfg.problem()
    op = RegularizedOperator(cfg.n)
    if cfg.d_range is not None:
        lo, hi, count = cfg.d_range
        ds = np.linspace(lo, hi, int(count))
    elif cfg.d is not None:
        ds = np.array([cfg.d])
    else:
        raise ConfigError("d", "rotation needs d or d_range")
    rows = []
    for d in ds:
        t = integrate_cauchy(op, pb, float(d), cfg.tol)
        rows.append((float(d), t.rotation))
        if len(ds) == 1:
            t.to_csv(out / "trajectory.csv")
    write_csv(out / "rotation.csv", ["d", "rotation"], rows)
    return {"rotations": [{"d": d, "rotation": r} for d, r in rows]}


def _run_solve(cfg: RunConfig, out: Path) -> dict:
    pb = cfg.problem()
    sols = solve_approx(RegularizedOperator(cfg.n), pb, cfg.k, cfg.tol)
    for s in sols:
        s.trajectory.to_csv(out / f"solution_{s.side}_j{s.j}.csv")
    report = {"solutions": [s.summary() for s in sols]}
    _dump(out / "solutions.json", report)
    return report


def _run_limit(cfg: RunConfig, out: Path) -> dict:
    pb = cfg.problem()
    r = compute_limit(pb, cfg.j, cfg.side, cfg.ladder, cfg.tol, cfg.delta_jump, cfg.limit_tol, cfg.energy_tol)
    r.write(out)
    worst, ok = energy_continuity_check(r, cfg.energy_tol)
    return {"classification": r.classification, "energy_continuity": {"max_mismatch": worst, "pass": ok}}


def _run_phase(cfg: RunConfig, out: Path) -> dict:
    pb = cfg.problem()
    if not pb.weight.is_constant:
        raise ConfigError("weight.family", "phase mode needs a constant weight")
    a = pb.weight.a0
    pp = phase_portrait(a, pb.nl, cfg.levels)
    for i, curves in enumerate(pp.curves):
        write_polylines(out / f"level_{i:03d}.txt", curves)
    report = {
        "a": a,
        "h_levels": pp.h_levels,
        "components": [len(c) for c in pp.curves],
        "homoclinic_exists": pp.homoclinic_exists,
        "homoclinic_value": pp.homoclinic_value,
        "breakdown_levels": pp.breakdown_levels,
    }
    try:
        report["period"] = {"amplitude": cfg.amplitude, "value": orbit_period(a, pb.nl, cfg.amplitude),
                            "linear": 2 * math.pi / math.sqrt(a * pb.nl.fprime_u0)}
    except McShootError as exc:
        report["period"] = {"amplitude": cfg.amplitude, "error": str(exc)}
    _dump(out / "phase.json", report)
    return report


def _run_check(cfg: RunConfig, out: Path) -> dict:
    pb = cfg.problem()
    report = {
        "structural": check_structural(pb.nl),
        "c_a": pb.weight.C_a,
        "lambda_2": eigenvalue(pb.weight, 2).lambda_k,
        "fprime_u0": pb.nl.fprime_u0,
        "criteria": classical_criteria(pb).to_dict(),
    }
    _dump(out / "criteria.json", report)
    return report


def _run_verify(cfg: RunConfig, out: Path) -> dict:
    from .verify import run_suite

    checks = run_suite()
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}")
    report = {"checks": [asdict(c) for c in checks], "all_passed": all(c.passed for c in checks)}
    _dump(out / "verify.json", report)
    return report


MODES = {
    "eig": _run_eig,
    "rotation": _run_rotation,
    "solve-approx": _run_solve,
    "limit": _run_limit,
    "phase": _run_phase,
    "check": _run_check,
    "verify": _run_verify,
}


def _hypothesis_report(cfg: RunConfig, exc: Exception) -> dict:
    """Which hypothesis most likely fails when the near-u0 rotation is too small."""
    pb = cfg.problem()
    k = cfg.j if cfg.mode == "limit" else cfg.k
    lam_next = eigenvalue(pb.weight, k + 1).lambda_k
    fp = pb.nl.fprime_u0
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "hypothesis": f"f'(u0) > lambda_{k + 1}",
        "fprime_u0": fp,
        f"lambda_{k + 1}": lam_next,
        "hypothesis_holds": fp > lam_next,
    }


def run(cfg: RunConfig) -> int:
    """Dispatch one validated configuration; returns the process exit code."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config": cfg.to_dict(),
        "versions": {"mcshoot": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
    }
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        manifest["result"] = MODES[cfg.mode](cfg, out)
        if cfg.mode == "verify" and not manifest["result"]["all_passed"]:
            code = 1
    except ConfigError:
        raise
    except (NotReached, MissingSolution) as exc:
        report = _hypothesis_report(cfg, exc)
        _dump(out / "hypothesis.json", report)
        print(json.dumps(report, indent=2, default=_plain), file=sys.stderr)
        manifest["error"] = report
        code = EXIT_HYPOTHESIS
    except McShootError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        manifest["error"] = {"error": type(exc).__name__, "message": str(exc)}
        code = EXIT_NUMERIC
    manifest["timings"] = {"wall_seconds": time.perf_counter() - t0}
    manifest["exit_code"] = code
    _dump(out / "manifest.json", manifest)
    return code


# --------------------------------------------------------------------------- argument parsing
def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with a single configuration object")
    common.add_argument("--out", dest="output", help="output directory")
    common.add_argument("--weight", dest="weight.family", choices=["constant", "affine", "exponential", "cosine"])
    for name in ("a0", "a1", "sigma", "eps"):
        common.add_argument(f"--{name}", dest=f"weight.{name}", type=float)
    common.add_argument("--lam", dest="nonlinearity.lam", type=float)
    common.add_argument("--p", dest="nonlinearity.p", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mcshoot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="mode", required=True)
    s = sub.add_parser("eig", parents=[common], help="Neumann eigenvalues of the weight")
    s.add_argument("--k", type=int)
    s = sub.add_parser("rotation", parents=[common], help="rotation number of Cauchy orbits")
    s.add_argument("--n", type=float)
    s.add_argument("--d", type=float)
    s.add_argument("--d-range", dest="d_range", type=float, nargs=3, metavar=("LO", "HI", "COUNT"))
    s = sub.add_parser("solve-approx", parents=[common], help="2k regularized solutions")
    s.add_argument("--n", type=float)
    s.add_argument("--k", type=int)
    s = sub.add_parser("limit", parents=[common], help="track a family along the n-ladder")
    s.add_argument("--j", type=int)
    s.add_argument("--side", choices=["below", "above"])
    s.add_argument("--ladder", type=float, nargs="+")
    s.add_argument("--delta-jump", dest="delta_jump", type=float)
    s.add_argument("--limit-tol", dest="limit_tol", type=float)
    s.add_argument("--energy-tol", dest="energy_tol", type=float)
    s = sub.add_parser("phase", parents=[common], help="autonomous phase portrait")
    s.add_argument("--levels", type=float, nargs="+")
    s.add_argument("--amplitude", type=float)
    sub.add_parser("check", parents=[common], help="evaluate sufficient criteria only")
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    return p


def build_config(args: argparse.Namespace) -> RunConfig:
    """Config file first, then explicit flags on top."""
    raw = {}
    if args.config:
        base = parse_config(args.config)
        raw = json.loads(json.dumps(base.to_dict()))
    raw["mode"] = args.mode
    for key, value in vars(args).items():
        if key in ("config", "mode", "verbose") or value is None:
            continue
        if "." in key:
            group, name = key.split(".")
            raw.setdefault(group, {})[name] = value
        else:
            raw[key] = value
    cfg = parse_config(raw)
    return validate(cfg)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
