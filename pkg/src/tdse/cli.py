"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .contour import ContourConfig, build_quadrature
from .errors import ConfigError, NumericsError
from .harness import (EXAMPLE_NAMES, ExperimentConfig, convergence_sweep,
                      dump_quadrature_csv, run_example, run_free, run_periodic,
                      sweep_to_csv, write_snapshot)


def _load_config(args, defaults=None) -> ExperimentConfig:
    data = dict(defaults or {})
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    for key in ("M", "steps", "T", "order", "eps", "NE", "h", "q", "nr", "d"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if getattr(args, "serial", False):
        data["serial"] = True
    return ExperimentConfig.from_dict(data)


def _add_common(sp):
    sp.add_argument("--config", help="JSON config file (docs/config.schema.json)")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--serial", action="store_true",
                    help="force single-threaded deterministic execution")
    sp.add_argument("--M", type=int)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--T", type=float)
    sp.add_argument("--order", type=int)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--NE", type=int)
    sp.add_argument("--h", type=float)
    sp.add_argument("--q", type=int)
    sp.add_argument("--nr", type=int)
    sp.add_argument("--d", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tdse", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run-periodic", help="march the periodic solver")
    _add_common(sp)
    sp = sub.add_parser("run-free", help="march the free-space solver")
    _add_common(sp)

    sp = sub.add_parser("convergence", help="time-step convergence sweep")
    _add_common(sp)
    sp.add_argument("--steps-list", type=int, nargs="+", required=True)

    sp = sub.add_parser("transform-test", help="fast-vs-dense transform check")
    sp.add_argument("--trials", type=int, default=20)

    sp = sub.add_parser("example", help="reproduce a preset experiment")
    sp.add_argument("name", choices=EXAMPLE_NAMES)
    sp.add_argument("--out", default=".")
    sp.add_argument("--scale", type=float, default=1.0,
                    help="step-count multiplier (1.0 = desk scale)")

    sp = sub.add_parser("dump-quadrature", help="write contour nodes/weights as CSV")
    _add_common(sp)
    return ap


def _cmd_run(args, kind: str) -> int:
    config = _load_config(args, {"solver": kind})
    runner = run_free if kind == "free" else run_periodic
    report, final, solver = runner(config)
    os.makedirs(args.out, exist_ok=True)
    report.to_json(os.path.join(args.out, f"run_{kind}_report.json"))
    if report.rows:
        report.to_csv(os.path.join(args.out, f"run_{kind}_errors.csv"))
    write_snapshot(os.path.join(args.out, f"run_{kind}_final.snap"), final.t, final.u)
    print(f"{kind} run: {config.steps} steps to T={config.T}; "
          f"{report.metadata['steps_per_second']:.1f} steps/s"
          + (f"; Emax={report.emax:.3e}" if report.rows else ""))
    return 0


def _cmd_convergence(args) -> int:
    config = _load_config(args, {"solver": "free", "reference": "self"})
    rows = convergence_sweep(config, args.steps_list)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "convergence.csv")
    sweep_to_csv(rows, path)
    for r in rows:
        oo = "" if np.isnan(r.observed_order) else f"{r.observed_order:6.2f}"
        print(f"steps={int(r.param):7d}  E={r.E:.3e}  order={oo}")
    print(f"wrote {path}")
    return 0


def _cmd_transform_test(args) -> int:
    from .harness import transform_selftest
    rows = transform_selftest(trials=args.trials)
    ok = True
    for name, err, passed in rows:
        ok &= passed
        print(f"{name:22s} max_rel_err={err:.3e}  {'PASS' if passed else 'FAIL'}")
    return 0 if ok else 3


def _cmd_dump_quadrature(args) -> int:
    config = _load_config(args, {"solver": "free"})
    cfgs = config.contour_configs(config.build_potential(), config.build_field())
    os.makedirs(args.out, exist_ok=True)
    for ax, c in enumerate(cfgs):
        quad = build_quadrature(c)
        path = os.path.join(args.out, f"quadrature_dim{ax}.csv")
        dump_quadrature_csv(quad, path)
        print(f"dim {ax}: N={quad.N} nodes (H={quad.H:.4f}, K={quad.K:.2f}, "
              f"h={quad.h:.4f}) -> {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run-periodic":
            return _cmd_run(args, "periodic")
        if args.command == "run-free":
            return _cmd_run(args, "free")
        if args.command == "convergence":
            return _cmd_convergence(args)
        if args.command == "transform-test":
            return _cmd_transform_test(args)
        if args.command == "example":
            results = run_example(args.name, args.out, scale=args.scale)
            print(json.dumps(results, indent=2, default=str))
            return 0
        if args.command == "dump-quadrature":
            return _cmd_dump_quadrature(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerics error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
