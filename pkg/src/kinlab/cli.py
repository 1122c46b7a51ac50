"""Command line entry point: ``kinlab <subcommand> [--config PATH] [--out DIR] [--seed N] [--quiet]``.

Exit codes: 0 success, 1 usage or configuration error, 2 invariant
violation (including a failed ``verify``), 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .errors import InvariantViolation, NumericalFailure
from .io import default_out_dir, emit_series, metadata_for, read_series

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--out", metavar="DIR", help="output directory (default $KINLAB_OUT or ./kinlab_out)")
    p.add_argument("--seed", type=int, metavar="N", help="seed for the randomized checks")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kinlab", description="Kinetic / nonlinear diffusion numerical laboratory.")
    parser.add_argument("--version", action="version", version=f"kinlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, text in (
        ("simulate-kinetic", "run the kinetic solver and emit its diagnostics"),
        ("simulate-diffusion", "run the limit diffusion solver"),
        ("run-paired", "run both solvers from matched data and emit error/entropy diagnostics"),
        ("sweep-epsilon", "paired runs over a list of eps and a power-law fit of the sup error"),
        ("verify", "run the automated invariant and property suite"),
    ):
        _common(sub.add_parser(name, help=text, description=text))
    fit = sub.add_parser("decay-fit", help="fit an exponential rate to a column of an emitted CSV",
                         description="fit an exponential rate to a column of an emitted CSV")
    fit.add_argument("csv", help="diagnostics CSV written by another subcommand")
    fit.add_argument("--column", default=None, help="column to fit (default l2_sq, error or l2_dev)")
    fit.add_argument("--window", nargs=2, type=float, metavar=("T0", "T1"), help="fit window")
    _common(fit)
    return parser


def _load(args) -> ExperimentConfig:
    if args.config:
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
    else:
        cfg = ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _initial(cfg: ExperimentConfig, params):
    from .asymptotics import micro_perturbation
    from .core import cosine_density, discrete_maxwellian

    maxw = discrete_maxwellian(params.vgrid)
    rho = cosine_density(params.grid, cfg.amplitude, cfg.mode)
    f = rho[:, None] * maxw[None, :]
    if cfg.micro_amplitude > 0:
        f = f + micro_perturbation(params, cfg.micro_amplitude, maxw)
    return rho, f


def _meta(cfg, **extra):
    from ._backend import BACKEND

    return metadata_for(cfg.to_dict(), extra={"backend": BACKEND, **extra})


def cmd_simulate_kinetic(cfg, out, say):
    from .kinetic import run_kinetic

    params = cfg.sim_params()
    _, f = _initial(cfg, params)
    try:
        run = run_kinetic(params, f, stride=cfg.stride, snapshot_dt=cfg.snapshot_dt)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    path = emit_series(run.diagnostics, out / "kinetic.csv",
                       _meta(cfg, dt=run.dt, steps=int(round(run.t / run.dt)), mass_drift=run.mass_drift))
    say(f"kinetic run: {len(run.diagnostics)} snapshots, dt={run.dt:.6g}, mass drift {run.mass_drift:.3e} -> {path}")
    return EXIT_OK


def cmd_simulate_diffusion(cfg, out, say):
    from .diffusion import run_diffusion

    params = cfg.sim_params()
    rho, _ = _initial(cfg, params)
    try:
        run = run_diffusion(rho, cfg.alpha, cfg.A, params.grid, cfg.t_end, cfg.diffusion_dt, stride=cfg.stride,
                            snapshot_dt=cfg.snapshot_dt)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    path = emit_series(run.diagnostics, out / "diffusion.csv", _meta(cfg, dt=run.dt, mass_drift=run.mass_drift))
    say(f"diffusion run: {len(run.diagnostics)} snapshots, dt={run.dt:.6g} -> {path}")
    return EXIT_OK


def cmd_run_paired(cfg, out, say):
    from .asymptotics import cosine_profile, identity_defect, micro_dissipation_budget, run_paired
    from .series import DiagnosticSeries

    params = cfg.sim_params()
    try:
        run = run_paired(params, cosine_profile(cfg.amplitude, cfg.mode), cfg.micro_amplitude,
                         snapshot_dt=cfg.snapshot_dt, diffusion_dt=cfg.diffusion_dt)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep = run.report
    table = DiagnosticSeries()
    for k, t in enumerate(run.times):
        table.append(t, error=run.error_series["error"][k], entropy=run.entropy_series["entropy"][k],
                     micro=run.entropy_series["micro"][k], micro_integral=run.micro_time_integral[k],
                     **{name: rep[name][k] for name in rep.names if name != "entropy"})
    budget = micro_dissipation_budget(run)
    path = emit_series(table, out / "paired.csv", _meta(
        cfg, eps_prime=run.eps_prime, sup_error=run.sup_error, micro_budget=budget,
        identity_defect=identity_defect(run)))
    say(f"paired run: sup error {run.sup_error:.6g}, micro budget {budget:.6g}, eps' = {run.eps_prime:.3g} -> {path}")
    return EXIT_OK


def cmd_sweep(cfg, out, say):
    from .asymptotics import cosine_profile, epsilon_sweep

    try:
        res = epsilon_sweep(cfg.sim_params(), cfg.eps_list, cfg.eps_prime_policy,
                            rho_in=cosine_profile(cfg.amplitude, cfg.mode), t_floor=cfg.t_floor,
                            workers=cfg.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    path = emit_series(res.table(), out / "sweep.csv", _meta(
        cfg, fitted_exponent=res.fitted_exponent, fitted_prefactor=res.fitted_prefactor,
        kappa=res.kappa, monotone=res.monotone, flags=res.flags))
    for e, s in zip(res.eps_values, res.sup_errors):
        say(f"eps={e:<8g} sup error {s:.6g}")
    say(f"fitted exponent {res.fitted_exponent:.4f}, prefactor {res.fitted_prefactor:.4g} -> {path}")
    for flag in res.flags:
        say(f"warning: {flag}")
    return EXIT_OK


def cmd_verify(cfg, out, say):
    from .verify import run_verify, write_report

    results = run_verify(cfg.seed, log=say)
    path = write_report(results, out / "verify_report.json", cfg.seed)
    ok = all(r.passed for r in results)
    say(f"{sum(r.passed for r in results)}/{len(results)} criteria passed -> {path}")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_decay_fit(args, say):
    from .diffusion import decay_rate_fit

    try:
        series = read_series(args.csv)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    column = args.column
    if column is None:
        column = next((c for c in ("l2_sq", "error", "l2_dev") if c in series), None)
        if column is None:
            raise UsageError(f"no default column in {args.csv}; pass --column")
    if column not in series:
        raise UsageError(f"column {column!r} not in {args.csv} (have {', '.join(series.names)})")
    try:
        rate, intercept, r2 = decay_rate_fit(series.times, series[column], args.window)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"column={column} rate={rate:.17g} intercept={intercept:.17g} r2={r2:.17g}")
    return EXIT_OK


def _dump(exc, out: Path, say):
    if not exc.dump:
        return
    arrays = {k: np.asarray(v) for k, v in exc.dump.items()}
    out.mkdir(parents=True, exist_ok=True)
    path = out / "failure_dump.npz"
    np.savez(path, **arrays)
    say(f"state written to {path}")


COMMANDS = {
    "simulate-kinetic": cmd_simulate_kinetic,
    "simulate-diffusion": cmd_simulate_diffusion,
    "run-paired": cmd_run_paired,
    "sweep-epsilon": cmd_sweep,
    "verify": cmd_verify,
}

EXPERIMENT_OF = {"simulate-kinetic": "kinetic", "simulate-diffusion": "diffusion", "run-paired": "paired",
                 "sweep-epsilon": "sweep", "verify": "verify"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    say = (lambda *_: None) if args.quiet else (lambda msg: print(msg, flush=True))
    err = lambda msg: print(f"kinlab: {msg}", file=sys.stderr)  # noqa: E731
    out = default_out_dir(args.out)
    try:
        if args.command == "decay-fit":
            return cmd_decay_fit(args, say)
        cfg = _load(args)
        if "experiment" in cfg.lines and EXPERIMENT_OF[args.command] != cfg.experiment:
            raise UsageError(f"config line {cfg.lines['experiment']}: experiment = {cfg.experiment} "
                             f"does not match subcommand {args.command}")
        return COMMANDS[args.command](cfg, out, say)
    except (UsageError, ConfigError) as exc:
        err(f"error: {exc}")
        return EXIT_USAGE
    except InvariantViolation as exc:
        err(f"invariant violation: {exc}")
        _dump(exc, out, err)
        return EXIT_INVARIANT
    except NumericalFailure as exc:
        err(f"numerical failure: {exc}")
        _dump(exc, out, err)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
