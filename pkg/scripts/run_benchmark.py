#!/usr/bin/env python3
"""Throughput sweep over batch sizes for one kinematic chain.

Measures batched forward kinematics (final transform only) at several batch
sizes, plus the one-pose-at-a-time baseline, and prints a small table.  The
interesting question is where the curve flattens: once per-call overhead is
amortized, ops/s should stop growing with the batch.

Typical run:

    python3 scripts/run_benchmark.py
    python3 scripts/run_benchmark.py --urdf my_robot.urdf --base base --end tool \
        --batch-sizes 1,64,256,1024,4096 --json report.json
"""

import argparse
import json
import pathlib
import sys

from diffkin import FkEngine, extract_chain, parse_urdf, run_bench

HERE = pathlib.Path(__file__).resolve().parent


def pick_endpoints(model, base, end):
    if base is None:
        base = model.root_link
    if end is None:
        leaves = model.leaf_links()
        if len(leaves) != 1:
            sys.exit(f"model has {len(leaves)} leaf links {leaves!r}; pick one with --end")
        end = leaves[0]
    return base, end


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--urdf", default=str(HERE / "arm4.urdf"))
    ap.add_argument("--base", default=None, help="chain base link (default: root)")
    ap.add_argument("--end", default=None, help="chain end link (default: the single leaf)")
    ap.add_argument("--batch-sizes", default="1,256,1024,4096")
    ap.add_argument("--min-seconds", type=float, default=0.5)
    ap.add_argument("--repeats", type=int, default=3, help="repetitions per size; fastest wins")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", default=None, help="also dump the report as JSON here")
    args = ap.parse_args()

    model = parse_urdf(pathlib.Path(args.urdf).read_text())
    base, end = pick_endpoints(model, args.base, args.end)
    chain = extract_chain(model, base, end)
    sizes = [int(s) for s in args.batch_sizes.split(",") if s.strip()]

    print(f"chain {base} -> {end}: {chain.n} segments, {chain.m} dof")
    report = run_bench(
        lambda b: FkEngine(chain, b),
        sizes,
        min_seconds=args.min_seconds,
        rng_seed=args.seed,
        repeats=args.repeats,
    )

    print(f"machine: {report.machine}   threads: {report.threads}")
    print(f"sequential baseline: {report.baseline_ops_per_sec:,.0f} poses/s")
    print()
    print(f"{'batch':>6} {'iters':>7} {'seconds':>8} {'poses/s':>12} {'vs baseline':>12}")
    for m, ratio in zip(report.measurements, report.ratios()):
        print(
            f"{m.batch_size:>6} {m.iterations:>7} {m.seconds:>8.3f}"
            f" {m.ops_per_sec:>12,.0f} {ratio:>11.1f}x"
        )

    ops = [m.ops_per_sec for m in report.measurements]
    knee = next((m.batch_size for m, v in zip(report.measurements, ops) if v > 0.95 * max(ops)), None)
    print(f"\ncurve is within 5% of peak from batch {knee} on")

    if args.json:
        doc = {
            "machine": report.machine,
            "threads": report.threads,
            "baseline_ops_per_sec": report.baseline_ops_per_sec,
            "measurements": [
                {
                    "batch_size": m.batch_size,
                    "iterations": m.iterations,
                    "seconds": m.seconds,
                    "ops_per_sec": m.ops_per_sec,
                }
                for m in report.measurements
            ],
        }
        pathlib.Path(args.json).write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {args.json}")


if __name__ == "__main__":
    main()
