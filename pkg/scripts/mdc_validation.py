"""Simulated endorser queue wait against the M/D/c approximation over a (c, rho) grid."""

from pathlib import Path

from _common import base, isolate_execute, parser, with_load, write_rows
from dataclasses import replace

from eovperf.analysis import estimate_execute
from eovperf.queueing import QueueLoad, erlang_c_wait, mdc_wait
from eovperf.sim import SimConfig, run_simulation


def main():
    ap = parser(__doc__, horizon=125_000)
    ap.add_argument("--cores", type=int, nargs="+", default=[1, 2, 4])
    ap.add_argument("--rho", type=float, nargs="+", default=[0.3, 0.5, 0.7, 0.9])
    args = ap.parse_args()
    s0 = isolate_execute(base(args))
    rows = []
    for c in args.cores:
        for rho in args.rho:
            mu = s0.execute.mu_core
            lam = rho * c * mu
            s = with_load(replace(s0, execute=replace(s0.execute, c=c)), lam)
            est = estimate_execute(run_simulation(SimConfig(s, seed=args.seed, horizon=args.horizon)))
            load = QueueLoad(lam, mu, c)
            model = mdc_wait(load)
            rows.append((c, rho, model, erlang_c_wait(load), est.mean_queue, abs(est.mean_queue / model - 1)))
    write_rows(Path(args.out) / "mdc_validation.csv", ("c", "rho", "mdc_wait", "mmc_wait", "sim_wait", "rel_error"), rows)


if __name__ == "__main__":
    main()
