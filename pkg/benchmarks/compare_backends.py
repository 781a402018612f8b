"""Compiled vs numpy kernels: wall time for the hot paths at several sizes.

    python benchmarks/compare_backends.py --scales 10000,100000,1000000

Each row times one operation on both backends and checks that they select
exactly the same records.
"""
import argparse
import csv
import statistics
import sys
import time

import numpy as np

from dynreserve import kernels
from dynreserve.cd2rp import candidates, solve_cd2rp
from dynreserve.core import DualState
from dynreserve.parallel import map_reduce, plan
from dynreserve.problem import generate_synthetic


def _median_ms(fn, repeats):
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times), out


def bench(n, l, repeats, sweeps, seed):
    p = generate_synthetic(n, l, seed, kind="pack")
    shards = plan(n, 1)
    lam = DualState(np.random.default_rng(seed).uniform(0.0, 2.0, l))
    ops = {
        "evaluate": lambda: map_reduce(p, lam, shards).x,
        "candidates": lambda: candidates(p, lam, 0, shards).values,
        f"cd2rp_{sweeps}_sweeps": lambda: solve_cd2rp(p, max_sweeps=sweeps, shard_plan=shards,
                                                      early_stop=False)[1].x,
    }
    rows = []
    for op, fn in ops.items():
        row = {"n": n, "l": l, "op": op}
        outs = {}
        for name in kernels.available():
            with kernels.using(name):
                row[f"{name}_ms"], outs[name] = _median_ms(fn, 1 if op.startswith("cd2rp") else repeats)
        if "compiled_ms" in row:
            row["speedup"] = row["pure_ms"] / row["compiled_ms"]
        vals = list(outs.values())
        row["identical"] = all(np.array_equal(vals[0], v) for v in vals[1:])
        rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scales", default="10000,100000,1000000")
    ap.add_argument("--l", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--sweeps", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="also write the rows as CSV")
    args = ap.parse_args(argv)

    if "compiled" not in kernels.available():
        print("compiled extension not built; only the numpy backend is timed", file=sys.stderr)
    rows = []
    for n in (int(s) for s in args.scales.split(",")):
        rows.extend(bench(n, args.l, args.repeats, args.sweeps, args.seed))

    cols = ["n", "l", "op"] + [f"{b}_ms" for b in kernels.available()]
    cols += [c for c in ("speedup", "identical") if c in rows[0]]
    print("  ".join(f"{c:>18}" for c in cols))
    for r in rows:
        print("  ".join(f"{r[c]:>18.3f}" if isinstance(r[c], float) else f"{r[c]!s:>18}"
                        for c in cols))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            w.writerows({c: r[c] for c in cols} for r in rows)
    return 0 if all(r["identical"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
