#!/usr/bin/env python3
"""Sweep the MI threshold over quantiles of the cross-feature MI pool.

Reports, per quantile, the resolved threshold, mean context size, and
optionally downstream-utility / DCR columns.
"""
import argparse

from tabmi.dataset import FeatureSchema, load_table, split
from tabmi.engine import fit_engine
from tabmi.sampler import SamplerConfig
from tabmi.sweep import SweepPlan, run_sweep, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", required=True, help="CSV table")
    ap.add_argument("--schema", required=True, help="schema JSON")
    ap.add_argument("--quantiles", default="0,0.25,0.5,0.75,0.9")
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="sweep.csv")
    ap.add_argument("--no-metrics", action="store_true",
                    help="skip utility/DCR columns (much faster)")
    args = ap.parse_args()

    schema = FeatureSchema.from_json(args.schema)
    table = load_table(args.data, schema)
    train, test = split(table, 0.8, seed=args.seed)
    engine = fit_engine(train)

    qs = tuple(float(q) for q in args.quantiles.split(","))
    metrics = () if args.no_metrics else ("utility", "dcr")
    plan = SweepPlan(qs, count=args.count,
                     sampler=SamplerConfig(seed=args.seed), metrics=metrics)
    rows = run_sweep(engine, plan, train, test)
    write_sweep_csv(rows, args.out)
    for r in rows:
        print(f"q={r['quantile']:<5} tau={r['tau']:.6f} "
              f"mean_context={r['mean_context_size']:.3f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
