"""Command line interface.

Each subcommand runs one experiment driver and writes CSV; ``--svg``
additionally renders a figure next to each CSV.  Exit status: 0 on
success, 2 on configuration problems, 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, NumericalError
from .experiments import (
    ExperimentConfig,
    run_block_powers,
    run_convergence,
    run_heat1d,
    run_hm_error,
    run_policy_bounds,
    run_powers,
    run_stability_report,
    run_sweep_mu,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_common_options(parser: argparse.ArgumentParser, **defaults) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=1000.0,
                        help="scalar mode eigenvalue (default: %(default)s)")
    parser.add_argument("--eps", type=float, default=2e-4,
                        help="hyperbolic-term weight (default: %(default)s)")
    parser.add_argument("--tau", type=float, default=3e-5,
                        help="time step size (default: %(default)s)")
    parser.add_argument("--T", dest="t_final", type=float, default=3e-3,
                        help="final time (default: %(default)s)")
    parser.add_argument("--nx", type=int, default=None,
                        help="interior grid points of the 1D heat problem "
                             "(default: scalar problem)")
    parser.add_argument("--nmax", dest="n_max", type=int, default=None,
                        help="step/power/grid-point budget where applicable")
    parser.add_argument("--mu-min", dest="mu_min", type=float, default=None,
                        help="lower end of the mu sweep")
    parser.add_argument("--mu-max", dest="mu_max", type=float, default=None,
                        help="upper end of the mu sweep")
    parser.add_argument("--mu-points", dest="mu_points", type=int, default=400,
                        help="number of mu grid points (default: %(default)s)")
    parser.add_argument("--halvings", type=int, default=3,
                        help="number of tau halvings (default: %(default)s)")
    parser.add_argument("--out", type=Path, default=None,
                        help="output CSV path (default: <command>.csv)")
    parser.add_argument("--svg", action="store_true",
                        help="also render matplotlib figures as SVG next to the CSV")
    if defaults:
        parser.set_defaults(**defaults)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmscheme",
        description="Experiments for the hyperbolized three-level explicit scheme: "
                    "parameter sweeps, error studies, convergence tables and "
                    "amplification-norm curves, emitted as CSV (optionally SVG).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-mu", help="block entries and eigenvalues over a mu range")
    _add_common_options(p)

    p = sub.add_parser("hm-error", help="perturbation error versus its upper bound")
    _add_common_options(p)

    p = sub.add_parser("converge", help="error versus halving step sizes")
    _add_common_options(p)
    p.add_argument("--mode", choices=("local", "global"), required=True,
                   help="one-step error from exact seeds, or error at the final time")

    p = sub.add_parser("powers", help="norms of stacked-map powers for halving steps")
    _add_common_options(p)

    p = sub.add_parser("block-powers", help="block power norms over a (mu, power) grid")
    _add_common_options(p, mu_points=60)

    p = sub.add_parser("heat1d", help="heat-problem power curves and global convergence")
    _add_common_options(p)

    p = sub.add_parser("stability-report", help="per-mode eigenvalue and growth diagnostics")
    _add_common_options(p)

    p = sub.add_parser("policy-bounds", help="largest stable tau under each eps policy")
    _add_common_options(p)

    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        lam=args.lam,
        eps=args.eps,
        tau=args.tau,
        t_final=args.t_final,
        nx=args.nx,
        n_max=args.n_max,
        mu_min=args.mu_min,
        mu_max=args.mu_max,
        mu_points=args.mu_points,
        halvings=args.halvings,
        svg=args.svg,
    )


def _out_path(args: argparse.Namespace, suffix: str = "") -> Path:
    base = args.out if args.out is not None else Path(f"{args.command.replace('-', '_')}.csv")
    if suffix:
        base = base.with_name(f"{base.stem}_{suffix}{base.suffix or '.csv'}")
    return base


def _emit(table, path: Path, render=None) -> None:
    write_csv(table, path)
    print(f"wrote {path} ({len(table.rows)} rows)")
    if render is not None:
        figure_path = path.with_suffix(".svg")
        render(figure_path)
        print(f"wrote {figure_path}")


def _cmd_sweep_mu(cfg: ExperimentConfig, args) -> None:
    table = run_sweep_mu(cfg)
    render = None
    if cfg.svg:
        from . import figures

        render = lambda p: figures.sweep_mu_figure(table, p)
    _emit(table, _out_path(args), render)


def _cmd_hm_error(cfg: ExperimentConfig, args) -> None:
    table = run_hm_error(cfg)
    render = None
    if cfg.svg:
        from . import figures

        render = lambda p: figures.hm_error_figure(table, p)
    _emit(table, _out_path(args), render)


def _cmd_converge(cfg: ExperimentConfig, args) -> None:
    table = run_convergence(cfg, args.mode)
    out = args.out if args.out is not None else Path(f"converge_{args.mode}.csv")
    write_csv(table.to_table(), out)
    print(f"wrote {out} ({len(table.rows)} rows)")
    print(f"fitted order: {table.fitted_order():.4f}")
    if cfg.svg:
        from . import figures

        figure_path = out.with_suffix(".svg")
        figures.convergence_figure(table, figure_path, label=f"{args.mode} error")
        print(f"wrote {figure_path}")


def _cmd_powers(cfg: ExperimentConfig, args) -> None:
    curves, summary = run_powers(cfg)
    render_curves = render_summary = None
    if cfg.svg:
        from . import figures

        render_curves = lambda p: figures.powers_figure(curves, p)
        render_summary = lambda p: figures.powers_summary_figure(summary, p)
    _emit(curves, _out_path(args), render_curves)
    _emit(summary, _out_path(args, "summary"), render_summary)


def _cmd_block_powers(cfg: ExperimentConfig, args) -> None:
    table = run_block_powers(cfg)
    render = None
    if cfg.svg:
        from . import figures

        render = lambda p: figures.block_powers_figure(table, p)
    _emit(table, _out_path(args), render)


def _cmd_heat1d(cfg: ExperimentConfig, args) -> None:
    curves, summary, table = run_heat1d(cfg)
    render_curves = render_summary = None
    if cfg.svg:
        from . import figures

        render_curves = lambda p: figures.powers_figure(curves, p)
        render_summary = lambda p: figures.powers_summary_figure(summary, p)
    _emit(curves, _out_path(args, "powers"), render_curves)
    _emit(summary, _out_path(args, "powers_summary"), render_summary)
    out = _out_path(args, "convergence")
    write_csv(table.to_table(), out)
    print(f"wrote {out} ({len(table.rows)} rows)")
    print(f"fitted order: {table.fitted_order():.4f}")
    if cfg.svg:
        from . import figures

        figure_path = out.with_suffix(".svg")
        figures.convergence_figure(table, figure_path, label="global error")
        print(f"wrote {figure_path}")


def _cmd_stability_report(cfg: ExperimentConfig, args) -> None:
    per_mode, summary = run_stability_report(cfg)
    render = None
    if cfg.svg:
        from . import figures

        render = lambda p: figures.stability_report_figure(per_mode, p)
    _emit(per_mode, _out_path(args), render)
    _emit(summary, _out_path(args, "summary"))
    tau, eps, tau_bound, stable, margin, max_norm = summary.rows[0]
    print(f"tau = {tau:.6e}, critical step = {tau_bound:.6e}, "
          f"stable = {'yes' if stable else 'no'} (margin {margin:.6e})")
    print(f"max ||S^n|| over n <= {cfg.n_max or 1000}: {max_norm:.6e}")


def _cmd_policy_bounds(cfg: ExperimentConfig, args) -> None:
    table = run_policy_bounds(cfg)
    render = None
    if cfg.svg:
        from . import figures

        render = lambda p: figures.policy_bounds_figure(table, p)
    _emit(table, _out_path(args), render)


_COMMANDS = {
    "sweep-mu": _cmd_sweep_mu,
    "hm-error": _cmd_hm_error,
    "converge": _cmd_converge,
    "powers": _cmd_powers,
    "block-powers": _cmd_block_powers,
    "heat1d": _cmd_heat1d,
    "stability-report": _cmd_stability_report,
    "policy-bounds": _cmd_policy_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
