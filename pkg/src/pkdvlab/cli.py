"""Command line interface.

Subcommands: ``simulate`` (PDE run with per-snapshot fits and diagnostics),
``compare`` (PDE vs effective ODE overlay), ``converge`` (h sweep with
log-log slopes), ``spectrum`` (operator verification report) and ``fit``
(fit a stored snapshot).  Exit codes: 0 success, 1 configuration or input
validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io as io_mod
from . import operators as ops
from . import plots
from .config import ConfigError, RunConfig, parse_config, parse_config_file
from .etdrk4 import SolverBlowupError
from .fitting import FitError, orthogonality_refit, peak_fit
from .runs import compare_run, convergence_study, run_simulation

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class _NumericalFailure(RuntimeError):
    pass


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = parse_config_file(args.config)
    if getattr(args, "set", None):
        text = "\n".join(args.set)
        cfg = parse_config(text, base=cfg)
    if getattr(args, "h", None) is not None and not isinstance(args.h, list):
        cfg = cfg.with_overrides(potential_h=args.h).validate()
    return cfg


def _outdir(args) -> str:
    out = args.out or "pkdv_out"
    os.makedirs(out, exist_ok=True)
    return out


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args)
    try:
        run = run_simulation(cfg, with_diagnostics=True)
    except SolverBlowupError as exc:
        if exc.partial is not None and exc.partial.snapshots:
            io_mod.write_snapshots_csv(os.path.join(out, "snapshots.csv"), exc.partial.snapshots)
            print(f"flushed {len(exc.partial.snapshots)} partial snapshot(s) to {out}",
                  file=sys.stderr)
        raise
    io_mod.write_snapshots_csv(os.path.join(out, "snapshots.csv"), run.snapshots)
    io_mod.write_fit_csv(os.path.join(out, "fit.csv"), run.fit_rows)
    io_mod.write_diagnostics_csv(os.path.join(out, "diagnostics.csv"), run.records)
    plots.save_svg(
        plots.waterfall_figure(run.snapshots, title=f"h = {cfg.potential_h}"),
        os.path.join(out, "waterfall.svg"),
    )
    io_mod.write_manifest(
        out,
        cfg,
        ["snapshots.csv", "fit.csv", "diagnostics.csv", "waterfall.svg"],
        extra={"dt": run.dt, "n_steps": run.n_steps},
    )
    print(f"simulate: {len(run.snapshots)} snapshots, {run.n_steps} steps -> {out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args)
    run = run_simulation(cfg, with_diagnostics=False)
    comp = compare_run(cfg, run=run)
    io_mod.write_fit_csv(os.path.join(out, "fit.csv"), run.fit_rows)
    io_mod.write_compare_csv(os.path.join(out, "compare.csv"), comp)
    io_mod.write_ode_csv(os.path.join(out, "ode_trajectory.csv"), comp.trajectory)
    summary = {"sup_errors": comp.sup_errors(), "terminal_errors": comp.terminal_errors()}
    io_mod.write_json(os.path.join(out, "compare_summary.json"), summary)
    plots.save_svg(plots.compare_figure(comp), os.path.join(out, "overlay.svg"))
    io_mod.write_manifest(
        out,
        cfg,
        ["fit.csv", "compare.csv", "ode_trajectory.csv", "ode_trajectory.csv.meta.json",
         "compare_summary.json", "overlay.svg"],
        extra=summary,
    )
    print("compare:", " ".join(f"{k}={v:.4g}" for k, v in comp.sup_errors().items()))
    return EXIT_OK


def _cmd_converge(args) -> int:
    cfg = _load_config(args)
    if not args.h or len(args.h) < 3:
        raise ConfigError("converge needs at least 3 --h values")
    out = _outdir(args)
    report = convergence_study(cfg, args.h, workers=args.workers)
    io_mod.write_json(os.path.join(out, "convergence.json"), report.to_json_dict())
    plots.save_svg(plots.convergence_figure(report), os.path.join(out, "convergence.svg"))
    io_mod.write_manifest(out, cfg, ["convergence.json", "convergence.svg"])
    for key, (slope, ci) in sorted(report.slopes.items()):
        print(f"converge: {key} slope = {slope:.3f} +- {ci:.3f}")
    if report.failures:
        print(f"converge: {len(report.failures)} failed run(s): {report.failures}")
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    out = _outdir(args)
    grid = ops.default_operator_grid(n=args.n, half_width=args.half_width)
    op = ops.hessian_operator(grid)
    vals, vecs = ops.eigenpairs(op, 8)
    y = grid.x
    constants = ops.constants_check(grid)
    checks = {
        "eigenvalues_low": list(map(float, vals[:3])),
        "eigenvalue_targets": [-5.0, 0.0, 3.0],
        "continuum_edge_next": float(vals[3]),
        "ground_state_sup_err": float(np.max(np.abs(vecs[:, 0] - ops.analytic_ground_state(y)))),
        "kernel_state_sup_err": float(np.max(np.abs(vecs[:, 1] - ops.analytic_kernel_state(y)))),
    }
    from .solitons import theta

    th = theta(y)
    minima = {
        "l2_constrained": ops.constrained_min_rayleigh(op, [th, y * th], "l2"),
        "h1_constrained": ops.constrained_min_rayleigh(op, [th, y * th], "h1"),
        "unconstrained": ops.constrained_min_rayleigh(op, [], "l2"),
        "mm_form_constrained": ops.mm_positivity_check(grid),
        "mm_form_unconstrained": ops.mm_positivity_check(grid, constrained=False),
    }
    report = {"grid": {"n": grid.n, "length": grid.length}, "checks": checks,
              "constants": constants, "constrained_minima": minima}
    io_mod.write_json(os.path.join(out, "spectrum.json"), report)
    plots.save_svg(plots.spectrum_figure(vals), os.path.join(out, "spectrum.svg"))

    rows = [
        ("eigenvalue[0] = -5", abs(vals[0] + 5.0) < 1e-6),
        ("eigenvalue[1] = 0", abs(vals[1]) < 1e-6),
        ("eigenvalue[2] = 3", abs(vals[2] - 3.0) < 1e-6),
        ("continuum edge >= 4 - 1e-3", vals[3] >= 4.0 - 1e-3),
        ("ground state matches", checks["ground_state_sup_err"] < 1e-6),
        ("kernel state matches", checks["kernel_state_sup_err"] < 1e-6),
        ("L2 coercivity in [2, 3]", 2.0 <= minima["l2_constrained"] <= 3.0),
        ("H1 coercivity >= 2/11", minima["h1_constrained"] >= 2.0 / 11.0),
        ("virial form minimum > 0", minima["mm_form_constrained"] > 0.0),
    ]
    for name, entry in sorted(constants.items()):
        rows.append((f"constant {name} = {entry['computed']:.6g}", entry["ok"]))
    for name, ok in rows:
        print(f"{'PASS' if ok else 'FAIL':4s}  {name}")
    return EXIT_OK if all(ok for _, ok in rows) else EXIT_NUMERICAL


def _cmd_fit(args) -> int:
    snap = io_mod.read_snapshots_csv(args.snapshot, row=args.row)
    pk = peak_fit(snap)
    rf = orthogonality_refit(snap, pk.params, tol=args.tol)
    print(f"{'':12s}{'peak fit':>18s}{'refit':>18s}")
    print(f"{'center':12s}{pk.a_tilde:>18.10f}{rf.params.a:>18.10f}")
    print(f"{'scale':12s}{pk.c_tilde:>18.10f}{rf.params.c:>18.10f}")
    print(f"refit iterations: {rf.iters}")
    print(f"orthogonality residuals: {rf.residuals[0]:.3e}, {rf.residuals[1]:.3e}")
    print(f"|a_refit - a_tilde| = {abs(rf.params.a - pk.a_tilde):.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pkdv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_h=True):
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--out", help="output directory (default pkdv_out)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a single config entry (repeatable)")
        if with_h:
            p.add_argument("--h", type=float, help="override potential.h")

    p_sim = sub.add_parser("simulate", help="run the PDE and write snapshots/fits/diagnostics")
    common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_cmp = sub.add_parser("compare", help="overlay the PDE fit trajectory with the effective ODE")
    common(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)

    p_conv = sub.add_parser("converge", help="h sweep with log-log slope fits")
    common(p_conv, with_h=False)
    p_conv.add_argument("--h", type=float, action="append",
                        help="h value (repeat >= 3 times)")
    p_conv.add_argument("--workers", type=int, default=None,
                        help="parallel processes across h values")
    p_conv.set_defaults(func=_cmd_converge)

    p_spec = sub.add_parser("spectrum", help="operator spectrum and constants report")
    p_spec.add_argument("--out", help="output directory (default pkdv_out)")
    p_spec.add_argument("--n", type=int, default=512, help="grid points for the eigensolve")
    p_spec.add_argument("--half-width", type=float, default=20.0, help="half width of the box")
    p_spec.set_defaults(func=_cmd_spectrum)

    p_fit = sub.add_parser("fit", help="fit a stored snapshot (peak fit and refit)")
    p_fit.add_argument("snapshot", help="snapshots.csv file")
    p_fit.add_argument("--row", type=int, default=-1, help="snapshot row (default last)")
    p_fit.add_argument("--tol", type=float, default=1e-9, help="refit residual tolerance")
    p_fit.set_defaults(func=_cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        # unreadable/invalid inputs (bad snapshot file, bad overrides)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverBlowupError, FitError, _NumericalFailure, RuntimeError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
