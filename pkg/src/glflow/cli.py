"""Command line entry point: run/validate experiments, fit rates from CSV,
and benchmark the kernel backends."""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="glflow", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a config file")
    run_p.add_argument("--config", required=True)

    val_p = sub.add_parser("validate", help="check a config file")
    val_p.add_argument("--config", required=True)

    rates_p = sub.add_parser("rates", help="log-log rate fit from a CSV")
    rates_p.add_argument("--input", required=True)
    rates_p.add_argument("--x-col", default="eps")
    rates_p.add_argument("--y-col", default="value")

    bench_p = sub.add_parser("bench", help="compare kernel backends")
    bench_p.add_argument("--size", type=int, default=256)
    bench_p.add_argument("--steps", type=int, default=200)

    args = ap.parse_args(argv)
    return {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "rates": _cmd_rates,
        "bench": _cmd_bench,
    }[args.command](args)


def _cmd_run(args) -> int:
    from .harness import parse_config, run_experiment

    cfg = parse_config(args.config)
    summary = run_experiment(cfg)
    status = "PASS" if summary["passed"] else "FAIL"
    print(f"[{status}] {cfg.experiment}: results in {cfg.output_dir}/summary.json "
          f"({summary['runtime_seconds']:.1f}s)")
    return 0 if summary["passed"] else 1


def _cmd_validate(args) -> int:
    from .harness import ConfigError, parse_config

    try:
        cfg = parse_config(args.config)
    except ConfigError as e:
        print(f"invalid: {e}")
        return 1
    print(f"ok: experiment {cfg.experiment}, eps = {list(cfg.epsilon)}")
    return 0


def _cmd_rates(args) -> int:
    from .harness import fit_rate

    with open(args.input) as f:
        header = f.readline().strip().split(",")
        try:
            ix, iy = header.index(args.x_col), header.index(args.y_col)
        except ValueError:
            print(f"columns {args.x_col!r}/{args.y_col!r} not in {header}")
            return 1
        pairs = []
        for line in f:
            if line.strip():
                parts = line.split(",")
                pairs.append((float(parts[ix]), float(parts[iy])))
    fit = fit_rate(pairs)
    print(f"exponent {fit.exponent:.4f}  constant {fit.constant:.6g}  "
          f"residual {fit.residual:.3g}")
    return 0


def _cmd_bench(args) -> int:
    from . import kernels

    n, steps = args.size, args.steps
    rng = np.random.default_rng(0)
    u1 = rng.standard_normal((n, n))
    u2 = rng.standard_normal((n, n))
    coefs = (16.0, -64.0, 48.0, 8.0, -16.0, 8.0)
    print(f"{n}x{n} grid, {steps} force+energy evaluations per backend")
    base = None
    for name in kernels.available_backends():
        mod = kernels.get_backend(name)
        mod.force(u1, u2, 0.01, 0.1, 625.0, 1, coefs, False, False)  # warm up
        t0 = time.perf_counter()
        for _ in range(steps):
            mod.force(u1, u2, 0.01, 0.1, 625.0, 1, coefs, False, False)
            mod.energy_parts(u1, u2, 0.01, 0.1, 1, coefs, False, False)
        dt = time.perf_counter() - t0
        rate = steps / dt
        speedup = "" if base is None else f"  ({base / dt:.1f}x numpy)"
        if base is None:
            base = dt
        print(f"  {name:>8}: {dt:.3f}s  {rate:.1f} eval/s{speedup}")
    if len(kernels.available_backends()) == 1:
        print("  (compiled extension not built; see README)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
