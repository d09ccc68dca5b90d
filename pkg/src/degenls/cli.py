"""Command-line surface: groundstate, spectrum, evolve, and sweep subcommands.

Exit codes: 0 success, 2 parameter rejection, 64 usage error, 70 internal
numerical failure.  Failures emit a machine-readable JSON object on stdout.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import functionals, spectral
from .config import RunConfig, load_config
from .discretization import (RadialGrid, assemble_operator, build_grid, default_grading,
                             weighted_inner)
from .dynamics import evolve_and_trace
from .exceptions import (DegenlsError, InvalidParameterError, InvalidWindowError,
                         NonConvergenceError)
from .ground_state import ground_state, minimize_weinstein, reconcile, shoot_profile
from .model import ModelParams, classify_by_threshold, exists_window
from .presets import default_r_max, sweep_grid

log = logging.getLogger("degenls")

EXIT_OK = 0
EXIT_PARAMS = 2
EXIT_USAGE = 64
EXIT_NUMERIC = 70


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _profile_rows(profile):
    return ([_fmt(r), _fmt(v)] for r, v in zip(profile.grid.nodes, profile.values))


def _emit_error(code: str, message: str) -> None:
    print(json.dumps({"error": code, "message": message}))


def _resolve_grid(cfg: RunConfig, params: ModelParams) -> RadialGrid:
    r_max = cfg.r_max if cfg.r_max > 0 else default_r_max(params)
    gamma = cfg.grid_gamma if cfg.grid_gamma > 0 else default_grading(params.a)
    return build_grid(params.d, r_max, cfg.n, gamma)


def _operator_self_check(grid: RadialGrid, a: float, seed: int) -> None:
    """Seeded spot check of discrete self-adjointness; a failed check is a build bug."""
    rng = np.random.default_rng(seed)
    op = assemble_operator(grid, a, sector=0)
    u, v = rng.standard_normal(grid.n), rng.standard_normal(grid.n)
    gap = abs(weighted_inner(grid, op.apply(u), v) - weighted_inner(grid, u, op.apply(v)))
    if gap > 1e-10 * float(np.max(np.abs(op.diag))):
        raise DegenlsError(f"operator self-adjointness check failed: gap {gap:.3e}")


def cmd_groundstate(cfg: RunConfig, out: str) -> int:
    params = cfg.params()
    if not exists_window(params):
        _emit_error("existence-window", f"parameters {params} violate the existence window")
        return EXIT_PARAMS
    grid = _resolve_grid(cfg, params)
    _operator_self_check(grid, params.a, cfg.seed)
    log.info("minimizing at d=%d a=%g p=%g on N=%d r_max=%g",
             params.d, params.a, params.p, cfg.n, grid.r_max)
    report = minimize_weinstein(params.with_omega(1.0), grid,
                                tol=cfg.tol, max_iter=cfg.max_iter)
    if params.omega == 1.0:
        wave = report.profile(params)
    else:
        wave = ground_state(params, grid, tol=cfg.tol, max_iter=cfg.max_iter)
    identities = functionals.evaluate_identities(params, wave)

    _write_csv(os.path.join(out, "profile.csv"), ["rho", "phi"], _profile_rows(wave))
    with open(os.path.join(out, "minimizer_report.json"), "w") as fh:
        fh.write(json.dumps({
            "j_min": report.j_min, "lambda": report.lam, "kappa": report.kappa,
            "iterations": report.iterations, "residual": report.residual,
        }, indent=2, sort_keys=True))
    with open(os.path.join(out, "identity_report.json"), "w") as fh:
        fh.write(identities.to_json())

    if cfg.shoot:
        shot = shoot_profile(params, grid, tol=1e-10)
        _write_csv(os.path.join(out, "shooting_profile.csv"), ["rho", "phi"],
                   _profile_rows(shot))
        rec = reconcile(wave, shot)
        with open(os.path.join(out, "reconcile_report.json"), "w") as fh:
            fh.write(json.dumps({
                "max_abs": rec.max_abs, "rel_max": rec.rel_max,
                "rel_weighted": rec.rel_weighted, "agree": rec.agree,
            }, indent=2, sort_keys=True))

    worst = max(identities.pohozaev_1, identities.pohozaev_2)
    if worst >= cfg.pohozaev_threshold:
        _emit_error("pohozaev-residual",
                    f"identity residual {worst:.3e} above {cfg.pohozaev_threshold:.1e}")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, out: str) -> int:
    params = cfg.params()
    if not exists_window(params):
        _emit_error("existence-window", f"parameters {params} violate the existence window")
        return EXIT_PARAMS
    grid = _resolve_grid(cfg, params)
    wave = ground_state(params, grid, tol=cfg.tol, max_iter=cfg.max_iter)
    report = spectral.slope_and_classify(params, wave, l_max=cfg.l_max)
    with open(os.path.join(out, "spectral_report.json"), "w") as fh:
        fh.write(report.to_json())
    if cfg.eigenfunctions:
        rows = []
        header = ["rho"]
        columns = [grid.nodes]
        for sign, tag in ((+1, "plus"), (-1, "minus")):
            op = spectral.assemble_linearized(params, wave, sector=0, sign=sign)
            vals, vecs = spectral.eigenpairs(op, 3)
            for k in range(3):
                header.append(f"l_{tag}_{k}")
                columns.append(vecs[:, k])
        for i in range(grid.n):
            rows.append([_fmt(col[i]) for col in columns])
        _write_csv(os.path.join(out, "eigenfunctions.csv"), header, rows)
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, out: str) -> int:
    params = cfg.params()
    if not exists_window(params):
        _emit_error("existence-window", f"parameters {params} violate the existence window")
        return EXIT_PARAMS
    grid = _resolve_grid(cfg, params)
    wave = ground_state(params, grid, tol=cfg.tol, max_iter=cfg.max_iter)
    if cfg.lambda_scale != 1.0:
        u0 = functionals.l2_scale(wave, cfg.lambda_scale, grid=grid)
    else:
        u0 = wave
    log.info("evolving to t=%g with dt=%g (lambda=%g)", cfg.t_final, cfg.dt, cfg.lambda_scale)
    trace = evolve_and_trace(params, u0, cfg.t_final, cfg.dt,
                             record_every=cfg.record_every)
    trace.to_csv(os.path.join(out, "trace.csv"))
    _write_csv(os.path.join(out, "final_state.csv"), ["rho", "re_u", "im_u"],
               ([_fmt(r), _fmt(v.real), _fmt(v.imag)]
                for r, v in zip(grid.nodes, trace.final_u)))
    with open(os.path.join(out, "evolution_summary.json"), "w") as fh:
        fh.write(json.dumps({
            "blowup_flag": bool(trace.blowup_flag),
            "blowup_time": None if np.isnan(trace.blowup_time) else trace.blowup_time,
            "halt_reason": trace.halt_reason,
            "final_time": float(trace.times[-1]),
            "mass_drift": float(abs(trace.mass[-1] - trace.mass[0]) / trace.mass[0]),
            "energy_drift": float(abs(trace.energy[-1] - trace.energy[0])
                                  / max(abs(trace.energy[0]), 1e-300)),
        }, indent=2, sort_keys=True))
    return EXIT_OK


SWEEP_HEADER = ["a", "p", "p_c", "slope", "n_plus", "gap_minus",
                "verdict_spectral", "verdict_threshold",
                "pohozaev_1", "pohozaev_2", "error"]


def _sweep_point(args) -> tuple[float, float, list[str]]:
    d, a, p, n, tail_decades, tol = args
    try:
        params = ModelParams(d, a, p, 1.0)
    except InvalidParameterError as exc:
        return a, p, [_fmt(a), _fmt(p), "", "", "", "", "", "", "", "", str(exc)]
    if not exists_window(params):
        return a, p, [_fmt(a), _fmt(p), "", "", "", "", "", "", "", "",
                      "existence-window"]
    try:
        grid = sweep_grid(params, n=n, tail_decades=tail_decades)
        wave = ground_state(params, grid, tol=tol)
        identities = functionals.evaluate_identities(params, wave)
        report = spectral.slope_and_classify(params, wave)
        threshold = classify_by_threshold(params)
        return a, p, [
            _fmt(a), _fmt(p), _fmt(report.threshold), _fmt(report.slope),
            str(report.n_plus), _fmt(report.gap_minus), report.verdict,
            threshold.verdict, _fmt(identities.pohozaev_1),
            _fmt(identities.pohozaev_2), "",
        ]
    except DegenlsError as exc:
        return a, p, [_fmt(a), _fmt(p), "", "", "", "", "", "",
                      "", "", f"{type(exc).__name__}: {exc}"]


def cmd_sweep(cfg: RunConfig, out: str, threads: int) -> int:
    points = [(cfg.sweep_d, a, p, cfg.sweep_n, cfg.sweep_tail_decades, cfg.tol)
              for a in cfg.sweep_a_values for p in cfg.sweep_p_values]
    results = {}
    if threads > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for a, p, row in pool.map(_sweep_point, points):
                results[(a, p)] = row
    else:
        for point in points:
            a, p, row = _sweep_point(point)
            results[(a, p)] = row
            log.info("sweep point a=%g p=%g done", a, p)
    ordered = [results[key] for key in sorted(results)]
    _write_csv(os.path.join(out, "sweep.csv"), SWEEP_HEADER, ordered)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degenls",
        description="Solitary waves of the power-degenerate NLS: profiles, "
                    "identities, spectral stability, evolution.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("groundstate", "solve the wave profile and verify identities"),
            ("spectrum", "classify spectral stability of the wave"),
            ("evolve", "run the radial time evolution and virial trace"),
            ("sweep", "reproduce the stability phase diagram over (a, p)")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the INI config file")
        cmd.add_argument("--out", default=".", help="output directory (created if missing)")
        cmd.add_argument("--threads", type=int, default=None,
                         help="worker processes (default: env DEGENLS_THREADS or 1)")
        cmd.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(name)s: %(message)s")
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("DEGENLS_THREADS", "1"))

    if not os.path.isfile(args.config):
        print(f"usage error: config file not found: {args.config}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
    except (InvalidParameterError, configparser.Error, ValueError) as exc:
        print(f"usage error: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE

    os.makedirs(args.out, exist_ok=True)
    try:
        if args.command == "groundstate":
            return cmd_groundstate(cfg, args.out)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.out)
        if args.command == "evolve":
            return cmd_evolve(cfg, args.out)
        return cmd_sweep(cfg, args.out, threads)
    except (InvalidWindowError, InvalidParameterError) as exc:
        _emit_error("existence-window" if isinstance(exc, InvalidWindowError)
                    else "invalid-parameter", str(exc))
        return EXIT_PARAMS
    except NonConvergenceError as exc:
        _emit_error("non-convergence", str(exc))
        return EXIT_NUMERIC
    except DegenlsError as exc:
        _emit_error("numerical-failure", f"{type(exc).__name__}: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
