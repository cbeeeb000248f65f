"""Command-line entry points.

Subcommands: ``run`` (one experiment batch), ``sweep`` (parameter sweep),
``reference`` (generate and cache a reference front), ``table`` (recompute
the summary from persisted runs).  ``--config`` points at an INI file;
explicit flags override file values.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .harness import (
    build_experiment_config,
    format_table,
    load_config_file,
    recompute_summary,
    run_experiment,
    run_sweep,
)
from .reference import generate_reference


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, metavar="PATH",
                   help="INI config file; flags given here override it")
    p.add_argument("--problem", choices=["lame", "do2dk"], default=None)
    p.add_argument("--gamma", type=float, default=None,
                   help="front curvature exponent (lame)")
    p.add_argument("--k", type=float, default=None, help="knee count (do2dk)")
    p.add_argument("--s", type=float, default=None, help="skew parameter (do2dk)")
    p.add_argument("--d", type=int, default=None, help="search space dimension")
    p.add_argument("--n-particles", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="drift strength")
    p.add_argument("--sigma", type=float, default=None, help="diffusion strength")
    p.add_argument("--alpha", type=float, default=None, help="softmax sharpness")
    p.add_argument("--tau", type=float, default=None, help="weight adaptation rate")
    p.add_argument("--dt", type=float, default=None, help="time step")
    p.add_argument("--potential", choices=["none", "riesz", "newtonian", "morse"],
                   default=None)
    p.add_argument("--morse-c", dest="morse_c", type=float, default=None)
    p.add_argument("--diffusion", choices=["iso", "aniso"], default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="base seed")
    p.add_argument("--out", type=str, default=None, metavar="DIR")
    p.add_argument("--metrics-every", dest="metrics_every", type=int, default=None,
                   metavar="K")
    p.add_argument("--gstar", type=str, default=None, metavar="A,B",
                   help="hypervolume reference point")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")
    p.add_argument("--mean-field", action="store_true",
                   help="also track the mean-field error (slow)")


def _collect_opts(args: argparse.Namespace) -> dict:
    opts: dict = {}
    if args.config is not None:
        opts.update(load_config_file(args.config))
    for key in ("problem", "gamma", "k", "s", "d", "n_particles", "k_max",
                "lam", "sigma", "alpha", "tau", "dt", "potential", "morse_c",
                "diffusion", "batch_size", "runs", "seed", "out",
                "metrics_every", "gstar"):
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    if getattr(args, "no_figures", False):
        opts["figures"] = False
    if getattr(args, "mean_field", False):
        opts["mean_field"] = True
    if getattr(args, "axis", None) is not None:
        opts["axis"] = args.axis
    if getattr(args, "values", None) is not None:
        opts["values"] = [float(v) for v in args.values.split(",") if v.strip()]
    return opts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amcbo",
        description="Adaptive multi-objective consensus-based optimization",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment batch")
    _add_common_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--axis", choices=["tau", "sigma", "d", "N", "batch_size"],
                         default=None)
    p_sweep.add_argument("--values", type=str, default=None, metavar="V1,V2,...",
                         help="comma-separated sweep values")

    p_ref = sub.add_parser("reference", help="generate and cache a reference front")
    _add_common_flags(p_ref)
    p_ref.add_argument("--m-points", dest="m_points", type=int, default=100,
                       help="number of reference points")

    p_table = sub.add_parser("table", help="recompute a summary from stored runs")
    p_table.add_argument("--out", type=str, required=True, metavar="DIR",
                         help="experiment output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(message)s",
    )

    if args.command == "table":
        table = recompute_summary(Path(args.out))
        print(format_table(table))
        return 0

    opts = _collect_opts(args)
    config = build_experiment_config(opts)

    if args.command == "run":
        result = run_experiment(config)
        print(format_table(result.summary))
        print(f"artifacts in {config.out_dir}")
        return 0

    if args.command == "sweep":
        if config.sweep_axis is None or not config.sweep_values:
            print("sweep needs --axis and --values (or a [sweep] config section)",
                  file=sys.stderr)
            return 2
        tables = run_sweep(config)
        for value, table in zip(config.sweep_values, tables):
            print(f"# {config.sweep_axis} = {value:g}")
            print(format_table(table))
        print(f"artifacts in {config.out_dir}")
        return 0

    if args.command == "reference":
        problem = config.problem()
        potential = config.solver.potential
        if potential is None or potential.kind == "riesz":
            # generation picks its own Riesz exponent (the image dimension)
            potential = None
        out = Path(opts.get("out", "amcbo_out"))
        front = generate_reference(problem, args.m_points, potential,
                                   cache_dir=out)
        print(f"reference front with {front.points.shape[0]} points cached in {out}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
