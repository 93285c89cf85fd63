"""Command-line interface.

Subcommands:
  simulate CONFIG --out DIR     run one config file (or its sweep)
  preset NAME --out DIR         run a named preset
  analyze ssh ...               edge-state diagnostics from closed form + ED
  analyze pump CONFIG           band / adiabaticity diagnostics of a schedule
  sweep CONFIG [CONFIG ...]     run several configs (or sweep files)

Exit codes: 0 success, 2 configuration or parameter error, 3 capacity
exceeded, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config, read_raw, resolve
from .errors import (CapacityError, ConfigError, NormalizationError,
                     NumericalError, ParameterError, WindowError)
from .presets import PRESET_NAMES, preset_raw


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--tol", type=float, default=None,
                   help="override the observable tolerance")
    p.add_argument("--max-dim", type=int, default=None,
                   help="override the largest allowed state dimension")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for sweep variants")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qxpsim",
        description="constrained-chain simulator: edge oscillations, "
                    "domain-wall pumping, facilitation dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a config file")
    p_sim.add_argument("config", help="path to an INI config")
    _add_run_flags(p_sim)

    p_pre = sub.add_parser("preset", help="run a named preset")
    p_pre.add_argument("name", help=f"one of: {', '.join(PRESET_NAMES)}")
    _add_run_flags(p_pre)

    p_ana = sub.add_parser("analyze", help="static diagnostics")
    ana_sub = p_ana.add_subparsers(dest="analysis", required=True)
    p_ssh = ana_sub.add_parser("ssh", help="edge-state splitting and period")
    p_ssh.add_argument("--lambda-v", type=float, required=True)
    p_ssh.add_argument("--lambda-w", type=float, required=True)
    p_ssh.add_argument("--n", type=int, required=True)
    p_ssh.add_argument("--json", action="store_true")
    p_pump = ana_sub.add_parser("pump", help="band topology of a schedule")
    p_pump.add_argument("config")
    p_pump.add_argument("--json", action="store_true")

    p_swp = sub.add_parser("sweep", help="run one or more config files")
    p_swp.add_argument("configs", nargs="+", help="INI config paths")
    _add_run_flags(p_swp)
    return parser


def _print_report(data: dict, as_json: bool):
    if as_json:
        print(json.dumps(data, indent=2, sort_keys=True, default=str))
        return
    width = max(len(k) for k in data)
    for key in data:
        print(f"{key:<{width}}  {data[key]}")


def _cmd_simulate(args) -> int:
    from .runner import run_experiment, run_sweep

    raw = read_raw(args.config)
    label = Path(args.config).stem
    figures = False if args.no_figures else None
    if "sweep" in raw:
        products = run_sweep(raw, args.out, label=label, jobs=args.jobs,
                             tol=args.tol, max_dim=args.max_dim,
                             figures=figures)
        for p in products:
            print(f"{p.label}: wrote {p.out_dir}")
    else:
        cfg = resolve(raw, label=label)
        p = run_experiment(cfg, args.out, tol=args.tol, max_dim=args.max_dim,
                           figures=figures)
        print(f"{p.label}: wrote {p.out_dir}")
    return 0


def _cmd_preset(args) -> int:
    from .runner import run_experiment, run_sweep

    raw = preset_raw(args.name)
    figures = False if args.no_figures else None
    if "sweep" in raw:
        products = run_sweep(raw, args.out, label=args.name, jobs=args.jobs,
                             tol=args.tol, max_dim=args.max_dim,
                             figures=figures)
        for p in products:
            print(f"{p.label}: wrote {p.out_dir}")
    else:
        cfg = resolve(raw, label=args.name)
        p = run_experiment(cfg, args.out, tol=args.tol, max_dim=args.max_dim,
                           figures=figures)
        print(f"{p.label}: wrote {p.out_dir}")
    return 0


def _cmd_analyze(args) -> int:
    from .runner import analyze_pump, analyze_ssh

    if args.analysis == "ssh":
        report = analyze_ssh(args.lambda_v, args.lambda_w, args.n)
    else:
        report = analyze_pump(load_config(args.config))
    _print_report(report, args.json)
    return 0


def _cmd_sweep(args) -> int:
    from .runner import run_experiment, run_sweep

    figures = False if args.no_figures else None
    for config_path in args.configs:
        raw = read_raw(config_path)
        label = Path(config_path).stem
        out = Path(args.out) / label if len(args.configs) > 1 else Path(args.out)
        if "sweep" in raw:
            for p in run_sweep(raw, out, label=label, jobs=args.jobs,
                               tol=args.tol, max_dim=args.max_dim,
                               figures=figures):
                print(f"{p.label}: wrote {p.out_dir}")
        else:
            cfg = resolve(raw, label=label)
            p = run_experiment(cfg, out, tol=args.tol, max_dim=args.max_dim,
                               figures=figures)
            print(f"{p.label}: wrote {p.out_dir}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "preset": _cmd_preset,
        "analyze": _cmd_analyze,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ParameterError, WindowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, NormalizationError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
