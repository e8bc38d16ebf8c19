"""Command-line harness: run experiments, sweep ablations, print ground truth.

Subcommands: run, ablate, moments, report. Output directory resolution:
--out flag, else the DPBOOT_OUT environment variable, else ./dpboot_runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .datasets import truncated_gaussian_moments
from .harness import (
    ExperimentConfig,
    aggregate_records,
    read_records_csv,
    run_experiment,
    write_records_csv,
    write_report_json,
)

PRESETS = {
    # desk-scale grids; *_paper configs match the reported trial counts
    "mean_small": {
        "name": "mean_small",
        "task": "mean",
        "n_grid": [300, 1000],
        "eps_total": 8.0,
        "alpha": 0.05,
        "n_trials": 20,
        "n_resamp": 200,
        "methods": ["nonprivate", "blbquant", "blbvar", "laplace_variance"],
        "blb": {"K": 10.0, "c": 1.0, "sigma_max_sq": 8725.0},  # R ~ 50 around var 3.49
        "data": {"kind": "truncated_gaussian", "mu": 0.0, "var": 4.0, "lo": -6.0, "hi": 4.0},
        "master_seed": 0,
    },
    "mean_paper": {
        "name": "mean_paper",
        "task": "mean",
        "n_grid": [300, 1000, 3000],
        "eps_total": 8.0,
        "alpha": 0.05,
        "n_trials": 160,
        "n_resamp": 625,
        "methods": ["nonprivate", "blbquant", "blbvar", "laplace_variance"],
        "blb": {"K": 10.0, "c": 1.0, "sigma_max_sq": 8725.0},
        "data": {"kind": "truncated_gaussian", "mu": 0.0, "var": 4.0, "lo": -6.0, "hi": 4.0},
        "master_seed": 0,
    },
    "median_small": {
        "name": "median_small",
        "task": "median",
        "n_grid": [1000],
        "eps_total": 8.0,
        "alpha": 0.05,
        "n_trials": 20,
        "n_resamp": 200,
        "methods": ["nonprivate", "blbquant", "blbvar"],
        "blb": {"K": 10.0, "c": 1.0, "sigma_max_sq": 15000.0},  # R ~ 50 around var 5.99
        "data": {"kind": "truncated_gaussian", "mu": 0.0, "var": 4.0, "lo": -6.0, "hi": 4.0},
        "master_seed": 0,
    },
    "median_paper": {
        "name": "median_paper",
        "task": "median",
        "n_grid": [300, 1000, 3000],
        "eps_total": 8.0,
        "alpha": 0.05,
        "n_trials": 80,
        "n_resamp": 625,
        "methods": ["nonprivate", "blbquant", "blbvar"],
        "blb": {"K": 10.0, "c": 1.0, "sigma_max_sq": 15000.0},
        "data": {"kind": "truncated_gaussian", "mu": 0.0, "var": 4.0, "lo": -6.0, "hi": 4.0},
        "master_seed": 0,
    },
    "logreg_small": {
        "name": "logreg_small",
        "task": "logreg",
        "n_grid": [2000],
        "eps_total": 8.0,
        "alpha": 0.05,
        "n_trials": 5,
        "n_resamp": 50,
        "methods": ["blbquant", "blbvar"],
        "blb": {"K": 10.0, "c": 1.0, "sigma_max_sq": 10000.0},
        "data": {"kind": "synthetic_logreg", "pool_n": 50000, "coordinate": 3},
        "master_seed": 0,
    },
    "logreg_paper": {
        # needs the normalized income CSV; see scripts/prepare_adult.py
        "name": "logreg_paper",
        "task": "logreg",
        "n_grid": [2000, 4000, 8000],
        "eps_total": 8.0,
        "alpha": 0.05,
        "n_trials": 80,
        "n_resamp": 625,
        "methods": ["nonprivate", "blbquant", "blbvar"],
        "blb": {"K": 10.0, "c": 1.0, "sigma_max_sq": 10000.0},
        "data": {"kind": "adult_csv", "path": "data/adult.csv", "coordinate": 3},
        "master_seed": 0,
    },
}


def load_config(spec: str) -> ExperimentConfig:
    """Resolve --config: an existing JSON file path, else a preset name."""
    p = Path(spec)
    if p.exists():
        with open(p) as fh:
            return ExperimentConfig.from_dict(json.load(fh))
    if spec in PRESETS:
        return ExperimentConfig.from_dict(dict(PRESETS[spec]))
    if p.suffix:  # looked like a file path
        raise FileNotFoundError(f"config file not found: {spec}")
    raise FileNotFoundError(
        f"no config file or preset named {spec!r}; presets: {sorted(PRESETS)}"
    )


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("DPBOOT_OUT") or "dpboot_runs"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    records, report = run_experiment(cfg)
    out = _out_dir(args)
    stem = f"{cfg.name}_seed{cfg.master_seed}"
    csv_path = out / f"{stem}_trials.csv"
    json_path = out / f"{stem}_report.json"
    write_records_csv(records, csv_path)
    write_report_json(report, json_path)
    for cell in report["cells"]:
        width = cell["mean_width"]
        print(
            f"{cell['method']:>17s} n={cell['n']:<6d} coverage={cell['coverage']:.3f} "
            f"mean_width={'-' if width is None else f'{width:.3f}'} "
            f"failure_rate={cell['failure_rate']:.3f}"
        )
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _cmd_ablate(args) -> int:
    base = load_config(args.config)
    if args.seed is not None:
        base.master_seed = args.seed
    ks = [float(x) for x in args.ks.split(",")] if args.ks else [6.0, 10.0, 14.0]
    cs = [float(x) for x in args.cs.split(",")] if args.cs else [0.3, 1.0, 3.0]
    rs = [float(x) for x in args.rs.split(",")] if args.rs else [10.0, 50.0, 300.0]
    sigma2_unit = base.blb.get("sigma_max_sq", 8725.0) / 50.0**2  # back out the variance scale
    out = _out_dir(args)
    for K in ks:
        for c in cs:
            for R in rs:
                cfg = ExperimentConfig.from_dict(base.to_dict())
                cfg.blb = dict(base.blb, K=K, c=c, sigma_max_sq=sigma2_unit * R * R)
                cfg.name = f"{base.name}_K{K:g}_c{c:g}_R{R:g}"
                records, report = run_experiment(cfg)
                stem = f"{cfg.name}_seed{cfg.master_seed}"
                write_records_csv(records, out / f"{stem}_trials.csv")
                write_report_json(report, out / f"{stem}_report.json")
                for cell in report["cells"]:
                    width = cell["mean_width"]
                    print(
                        f"K={K:<4g} c={c:<4g} R={R:<5g} {cell['method']:>10s} n={cell['n']:<6d} "
                        f"coverage={cell['coverage']:.3f} "
                        f"mean_width={'-' if width is None else f'{width:.3f}'}"
                    )
    return 0


def _cmd_moments(args) -> int:
    m = truncated_gaussian_moments(args.mu, args.var, args.lo, args.hi)
    print(f"mean     {m.mean:.6f}")
    print(f"variance {m.variance:.6f}")
    print(f"median   {m.median:.6f}")
    return 0


def _cmd_report(args) -> int:
    records = read_records_csv(args.records)
    cells = aggregate_records(records)
    if args.json:
        print(json.dumps({"cells": cells}, indent=2, sort_keys=True))
    else:
        for cell in cells:
            width = cell["mean_width"]
            print(
                f"{cell['method']:>17s} n={cell['n']:<6d} eps={cell['eps_total']:g} "
                f"trials={cell['n_trials']:<5d} coverage={cell['coverage']:.3f} "
                f"mean_width={'-' if width is None else f'{width:.3f}'} "
                f"failure_rate={cell['failure_rate']:.3f}"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpboot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config or preset")
    p_run.add_argument("--config", required=True, help="JSON config path or preset name")
    p_run.add_argument("--seed", type=int, default=None, help="override master seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_abl = sub.add_parser("ablate", help="sweep K, c and the variance-cap ratio R")
    p_abl.add_argument("--config", required=True)
    p_abl.add_argument("--ks", default=None, help="comma-separated K values")
    p_abl.add_argument("--cs", default=None, help="comma-separated c values")
    p_abl.add_argument("--rs", default=None, help="comma-separated R values")
    p_abl.add_argument("--seed", type=int, default=None)
    p_abl.add_argument("--out", default=None)
    p_abl.set_defaults(func=_cmd_ablate)

    p_mom = sub.add_parser("moments", help="truncated-Gaussian ground truth")
    p_mom.add_argument("--mu", type=float, default=0.0)
    p_mom.add_argument("--var", type=float, default=4.0)
    p_mom.add_argument("--lo", type=float, default=-6.0)
    p_mom.add_argument("--hi", type=float, default=4.0)
    p_mom.set_defaults(func=_cmd_moments)

    p_rep = sub.add_parser("report", help="re-aggregate a trials CSV")
    p_rep.add_argument("--records", required=True)
    p_rep.add_argument("--json", action="store_true", help="print JSON instead of a table")
    p_rep.set_defaults(func=_cmd_report)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
