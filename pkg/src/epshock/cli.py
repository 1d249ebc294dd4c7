"""Command-line driver: ``epshock {forward,solve,sweep,diagnose}``.

Exit codes: 0 success, 2 guard or sonic degeneracy, 3 exit pressure out of
range, 4 invalid config or arguments, 5 refusal to bisect a non-monotone map.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import ProblemConfig
from .errors import (
    ConfigError,
    DomainError,
    EPShockError,
    IntegrationError,
    NonMonotoneMapError,
    NotSupersonicError,
    OutOfRangeError,
    SonicDegeneracyError,
)
from .flow import SolutionProfile, check_pineq, pineq_peak
from .gas import field_lower_bound_constant, geometry_margin
from .matcher import (
    ShockSolution,
    bernoulli_exit_identities,
    default_workers,
    exit_pressure_map,
    finite_difference_slopes,
    forward_solve,
    match_exit_pressure,
)
from .sensitivity import sign_ledger

EXIT_OK = 0
EXIT_GUARD = 2
EXIT_RANGE = 3
EXIT_CONFIG = 4
EXIT_NONMONOTONE = 5

PROFILE_COLUMNS = ("t", "r", "rho", "u", "p", "E", "M2", "kappa", "B", "branch")
SWEEP_COLUMNS = ("t_s", "p_exit", "F_s", "G_s", "min_field_excess", "status")


def fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_profile(path: Path, prof: SolutionProfile):
    kappa = prof.law.kappa
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_COLUMNS)
        B, r = prof.B, prof.radius
        for i in range(len(prof)):
            w.writerow([fmt(prof.t[i]), fmt(r[i]), fmt(prof.rho[i]), fmt(prof.u[i]),
                        fmt(prof.p[i]), fmt(prof.E[i]), fmt(prof.M2[i]), fmt(kappa),
                        fmt(B[i]), prof.branch])


def write_json(path: Path, payload: dict):
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n",
                    encoding="utf-8")


def solution_summary(sol: ShockSolution) -> dict:
    up_m, up_k = sol.upstream.conservation_residuals()
    dn_m, dn_k = sol.downstream.conservation_residuals()
    j = sol.jump
    return {
        "t_s": sol.t_s,
        "exit_pressure": sol.exit_pressure,
        "jump": {
            "M2_minus": j.M2_minus,
            "M2_plus": j.M2_plus,
            "kappa0": j.kappa0,
            "kappa_s": j.kappa_s,
            "upstream": j.upstream.__dict__,
            "downstream": j.downstream.__dict__,
        },
        "certificates": sol.certificates.as_dict(),
        "residuals": {
            "upstream_mass": up_m,
            "upstream_entropy": up_k,
            "downstream_mass": dn_m,
            "downstream_entropy": dn_k,
            "bernoulli": bernoulli_exit_identities(sol).as_dict(),
        },
        "samples": {"upstream": len(sol.upstream), "downstream": len(sol.downstream)},
    }


def _write_solution(out: Path, sol: ShockSolution):
    write_profile(out / "upstream.csv", sol.upstream)
    write_profile(out / "downstream.csv", sol.downstream)


def cmd_forward(cfg: ProblemConfig, args, report: dict) -> int:
    if args.ts is None:
        raise ConfigError("forward requires --ts")
    if not (0.0 <= args.ts < cfg.T):
        raise ConfigError(f"--ts {args.ts!r} must lie in [0, T={cfg.T!r})")
    sol = forward_solve(cfg, args.ts)
    _write_solution(args.out, sol)
    report["solution"] = solution_summary(sol)
    return EXIT_OK


def _map_rows(pmap):
    return [{"t_s": pt.t_s, "p_exit": pt.p_exit, "F_s": pt.f_s, "G_s": pt.g_s,
             "min_field_excess": pt.min_field_excess, "certified": pt.certified,
             "error": pt.error, "guard": pt.guard, "t_stop": pt.t_stop} for pt in pmap.grid]


def _map_summary(pmap) -> dict:
    return {
        "monotone_decreasing": pmap.monotone_decreasing,
        "range": pmap.range,
        "max_inversion": pmap.max_inversion,
        "n_grid": len(pmap.grid),
        "failures": [r for r in _map_rows(pmap) if r["error"]],
    }


def cmd_solve(cfg: ProblemConfig, args, report: dict) -> int:
    if cfg.p_ex is None:
        raise ConfigError("solve requires p_ex in the config")
    pmap = exit_pressure_map(cfg, workers=default_workers())
    report["map"] = _map_summary(pmap)
    report["force"] = bool(args.force)
    sol = match_exit_pressure(cfg, force=args.force, pmap=pmap)
    _write_solution(args.out, sol)
    report["solution"] = solution_summary(sol)
    report["solution"]["p_ex"] = cfg.p_ex
    report["solution"]["relative_mismatch"] = abs(sol.exit_pressure - cfg.p_ex) / cfg.p_ex
    return EXIT_OK


def cmd_sweep(cfg: ProblemConfig, args, report: dict) -> int:
    n = cfg.n_grid if args.grid is None else args.grid
    if n < 2:
        raise ConfigError("--grid must be at least 2")
    pmap = exit_pressure_map(cfg, n, workers=default_workers())
    with open(args.out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for pt in pmap.grid:
            w.writerow([fmt(pt.t_s), fmt(pt.p_exit), fmt(pt.f_s), fmt(pt.g_s),
                        fmt(pt.min_field_excess),
                        "ok" if pt.ok else pt.error.split(":", 1)[0]])
    report["map"] = _map_summary(pmap)
    return EXIT_OK


def cmd_diagnose(cfg: ProblemConfig, args, report: dict) -> int:
    geom, b, gam = cfg.geometry, cfg.b, cfg.gamma
    diag = {
        "delta0": geometry_margin(gam, geom),
        "beta1": field_lower_bound_constant(geom, b),
        "log_ratio": math.log(geom.r0 / geom.r1),
        "log_ratio_bound": (gam + 1.0) / (2.0 * (gam - 1.0)),
    }
    pmap = exit_pressure_map(cfg, workers=default_workers())
    diag["shock_locations"] = [
        {k: r[k] for k in ("t_s", "F_s", "G_s", "min_field_excess", "certified", "error")}
        for r in _map_rows(pmap)
    ]
    diag["map"] = _map_summary(pmap)
    if gam >= 2.0:
        res = check_pineq(gam)
        diag["pineq"] = {"ok": res.ok, "max_value": res.max_value, "peak_value": res.peak_value,
                         "violating_xi": res.violating_xi, "peak_formula": pineq_peak(gam)}
    else:
        diag["pineq"] = None

    rng = np.random.default_rng(cfg.seed)
    h = cfg.fd_step * cfg.T
    t_s = float(rng.uniform(h, cfg.T * (1.0 - 1e-8) - h))
    sens: dict = {"t_s": t_s, "seed": cfg.seed}
    try:
        sol = forward_solve(cfg, t_s, sensitivity=True)
        fd = finite_difference_slopes(cfg, t_s, h)
        terms = sol.pressure_terms
        X_T = float(sol.sensitivity.X[-1])
        sens.update({
            "dp_dts": terms.dp_dts,
            "dp_dts_fd": fd.dp_dts,
            "dp_rel_error": abs(terms.dp_dts - fd.dp_dts) / abs(fd.dp_dts),
            "X_T": X_T,
            "X_T_fd": fd.drho_dts,
            "X_rel_error": abs(X_T - fd.drho_dts) / abs(fd.drho_dts),
            "dB_cross_check": terms.cross_check,
            "terms": terms._asdict(),
            "initial": sol.sensitivity_ic._asdict(),
            "sign_ledger": sign_ledger(sol.sensitivity_ic, sol.sensitivity, terms),
        })
    except EPShockError as exc:
        sens["error"] = f"{type(exc).__name__}: {exc}"
    diag["sensitivity"] = sens
    report["diagnostics"] = diag
    return EXIT_OK


COMMANDS = {
    "forward": cmd_forward,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "diagnose": cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epshock",
                                     description="Radial transonic shocks for Euler-Poisson flow.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--force", action="store_true")
        if name == "forward":
            p.add_argument("--ts", type=float)
        if name == "sweep":
            p.add_argument("--grid", type=int)
    return parser


def _outcome(code: int, exc: BaseException | None) -> dict:
    d = {"exit_code": code, "status": "ok" if code == EXIT_OK else "error"}
    if exc is not None:
        d["error"] = f"{type(exc).__name__}: {exc}"
        for attr in ("guard", "t_stop", "range", "p_ex"):
            if getattr(exc, attr, None) is not None:
                d[attr if attr != "t_stop" else "t_fail"] = getattr(exc, attr)
    return d


def _classify(exc: BaseException) -> int:
    if isinstance(exc, OutOfRangeError):
        return EXIT_RANGE
    if isinstance(exc, NonMonotoneMapError):
        return EXIT_NONMONOTONE
    if isinstance(exc, (IntegrationError, SonicDegeneracyError, NotSupersonicError)):
        return EXIT_GUARD
    if isinstance(exc, (ConfigError, DomainError)):
        return EXIT_CONFIG
    return EXIT_GUARD


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK

    t0 = time.perf_counter()
    report: dict = {"command": args.command}
    try:
        cfg = ProblemConfig.load(args.config)
    except EPShockError as exc:
        print(f"epshock: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report["config"] = cfg.to_flat()
    args.out.mkdir(parents=True, exist_ok=True)

    exc_seen = None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            code = COMMANDS[args.command](cfg, args, report)
        except EPShockError as exc:
            exc_seen = exc
            code = _classify(exc)
    report["warnings"] = sorted({str(w.message) for w in caught})
    report["outcome"] = _outcome(code, exc_seen)
    report["wall_time"] = time.perf_counter() - t0
    write_json(args.out / "report.json", report)
    if exc_seen is not None:
        print(f"epshock {args.command}: {exc_seen}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
