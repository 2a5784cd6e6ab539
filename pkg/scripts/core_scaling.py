"""Saturated execute-phase throughput as the endorser core count grows."""

from dataclasses import replace
from pathlib import Path

import numpy as np

from _common import base, isolate_execute, parser, with_load, write_rows
from eovperf.analysis import estimate_execute
from eovperf.sim import SimConfig, run_simulation


def main():
    ap = parser(__doc__, horizon=20_000)
    ap.add_argument("--cores", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--overload", type=float, default=1.5, help="offered load as a multiple of capacity")
    args = ap.parse_args()
    s0 = isolate_execute(base(args))
    mu = s0.execute.mu_core
    rows = []
    for c in args.cores:
        s = with_load(replace(s0, execute=replace(s0.execute, c=c)), args.overload * c * mu)
        est = estimate_execute(run_simulation(SimConfig(s, seed=args.seed, horizon=args.horizon)))
        rows.append((c, c * mu, est.throughput))
    x = np.array([r[0] for r in rows], dtype=float)
    y = np.array([r[2] for r in rows])
    slope, icpt = np.polyfit(x, y, 1)
    r2 = 1 - np.sum((y - slope * x - icpt) ** 2) / np.sum((y - y.mean()) ** 2)
    write_rows(Path(args.out) / "core_scaling.csv", ("cores", "capacity", "sim_throughput"), rows)
    print(f"linear fit: slope {slope:.3f} tx/s per core, R^2 {r2:.5f}")


if __name__ == "__main__":
    main()
