"""Command-line front end: ``sel-lab sweep | validate | qfunc | figure``."""

from __future__ import annotations

import argparse
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import quasiprob, validation
from .errors import ConfigError, SelLabError
from .liouvillian import LaserParams, solve_steady_state
from .sweep import (
    OUTPUT_CHOICES,
    SweepSpec,
    TauRule,
    columns_for,
    load_config,
    parse_grid,
    run_sweep,
    sweep_csv,
    sweep_rows_as_dicts,
    write_csv,
)

log = logging.getLogger("sellab")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
        log.info("wrote %s", out)


def _figure_path(out, suffix: str) -> Path:
    base = Path(out) if out else Path("sel-lab")
    return base.with_name(base.stem + suffix + ".png")


def cmd_sweep(args) -> int:
    try:
        spec = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = run_sweep(spec, jobs=args.jobs)
    _emit(sweep_csv(spec, rows), args.out)
    if args.plot or spec.plot:
        from .plotting import plot_sweep

        path = plot_sweep({spec.tau_rule.kind: rows}, _figure_path(args.out, "_sweep"), spec.eta)
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_validate(args) -> int:
    checks = validation.run_validation(args.level)
    report = validation.format_report(checks, args.level)
    sys.stdout.write(report)
    if args.report:
        Path(args.report).write_text(report, encoding="utf-8", newline="\n")
    return EXIT_OK if validation.all_passed(checks) else EXIT_VALIDATION


def qfunc_report(grid, limit=None, omega=None, eta=None, tau=None) -> dict:
    """Columns of the Q-function report, keyed by CSV header."""
    I = np.asarray(grid, dtype=float)
    cols = {"I": I}
    if limit == 1:
        q1, _ = quasiprob.limit_solutions()
        cols["Q"] = q1(I)
        cols["limit_ode_residual"] = quasiprob.limit_ode_residual_curve(1, q1, I)
    elif limit == 2:
        _, q2 = quasiprob.limit_solutions()
        cols["Q"] = q2(I)
        cols["limit_ode_residual"] = quasiprob.limit_ode_residual_curve(2, q2, I)
        recon, _ = quasiprob.p_to_q_transform(I)
        cols["Q_from_P_transform"] = recon
        cols["transform_error"] = recon - cols["Q"]
    else:
        params = LaserParams.from_dimensionless(omega, eta, tau)
        rho, trunc = solve_steady_state(params)
        qset = quasiprob.husimi_radial(rho, trunc)
        q1, q2 = quasiprob.limit_solutions()
        cols["Q"] = qset.q(I)
        cols["D"] = qset.d(I)
        cols["rho_sigma"] = qset.rho_sigma(I)
        cols["Q1_closed_form"] = q1(I)
        cols["Q2_closed_form"] = q2(I)
        eq3 = quasiprob.relation_eq3_residual(qset, params, integral=False)
        first, second = quasiprob.system_eq4_residual(qset, params)
        with np.errstate(all="ignore"):
            cols["eq3_residual"] = eq3.residual(I)
            cols["eq4_first_residual"] = first.residual(I)
            cols["eq4_second_residual"] = second.residual(I)
        cols["ode5_residual"] = quasiprob.ode5_residual_curve(qset.q, omega, eta, tau, I)
    return cols


def cmd_qfunc(args) -> int:
    try:
        grid = parse_grid(args.grid)
    except ConfigError as exc:
        print(f"bad --grid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.limit is None and None in (args.omega, args.eta, args.tau):
        print("qfunc needs --limit or all of --omega, --eta, --tau", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cols = qfunc_report(grid, args.limit, args.omega, args.eta, args.tau)
    except (SelLabError, ValueError) as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    names = list(cols)
    rows = [{k: cols[k][i] for k in names} for i in range(len(grid))]
    buf = io.StringIO()
    write_csv(buf, names, rows, "qfunc")
    _emit(buf.getvalue(), args.out)
    if args.plot:
        from .plotting import plot_qfunc

        title = (f"limit case {args.limit}" if args.limit else
                 rf"$\omega={args.omega:g}, \eta={args.eta:g}, \tau={args.tau:g}$")
        plot_qfunc(cols, _figure_path(args.out, "_qfunc"), title)
    return EXIT_OK


def cmd_figure(args) -> int:
    try:
        grid = parse_grid(args.omega_grid)
        specs = {rule: SweepSpec(grid, TauRule(rule), args.eta) for rule in ("equal", "double")}
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    curves = {rule: run_sweep(spec, jobs=args.jobs) for rule, spec in specs.items()}
    rows = [r for rule in ("equal", "double") for r in curves[rule]]
    buf = io.StringIO()
    write_csv(buf, columns_for(OUTPUT_CHOICES), sweep_rows_as_dicts(rows), "sweep")
    _emit(buf.getvalue(), args.out)
    from .plotting import plot_sweep

    plot_sweep(curves, _figure_path(args.out, "_figure"), args.eta)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sel-lab",
                                     description="Single-emitter laser steady states and checks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="pump-rate sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--plot", action="store_true", help="also render <out>_sweep.png")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the validation checks")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--report")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("qfunc", help="tabulate phase-averaged quasi-probabilities")
    p.add_argument("--omega", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--limit", type=int, choices=(1, 2))
    p.add_argument("--grid", default="0:0.1:6", help="start:step:end (default 0:0.1:6)")
    p.add_argument("--out")
    p.add_argument("--plot", action="store_true", help="also render <out>_qfunc.png")
    p.set_defaults(func=cmd_qfunc)

    p = sub.add_parser("figure", help="<n> and Mandel Q vs omega for tau = omega and tau = 2 omega")
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--omega-grid", default="0.05:0.05:1.5")
    p.add_argument("--out", help="CSV path (default: stdout); figure goes to <out>_figure.png")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
