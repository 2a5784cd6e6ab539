"""Disk-bound committer throughput against batch size, for HDD and SSD at equal IOPS."""

from dataclasses import replace
from pathlib import Path

from _common import base, parser, with_load, write_rows
from eovperf.analysis import estimate_validate
from eovperf.phases import DiskParams
from eovperf.sim import SimConfig, run_simulation


def main():
    ap = parser(__doc__, horizon=30_000)
    ap.add_argument("--batch", type=int, nargs="+", default=[10, 20, 50, 100])
    ap.add_argument("--iops", type=float, default=125.0)
    ap.add_argument("--seek-ms", type=float, default=8.0)
    ap.add_argument("--load", type=float, default=8000.0, help="total offered load (tx/s)")
    args = ap.parse_args()
    s0 = base(args)
    s0 = replace(
        s0,
        execute=replace(s0.execute, c=16, mu_core=1000.0),
        order=replace(s0.order, mu_order=1e5),
    )
    s0 = with_load(s0, args.load)
    rows = []
    for b in args.batch:
        for kind, seek in (("hdd", args.seek_ms * 1e-3), ("ssd", 0.0)):
            disk = DiskParams(kind, args.iops, b * s0.m, seek)
            s = replace(s0, order=replace(s0.order, batch_size=b), validate=replace(s0.validate, disk=disk, mu=None))
            est = estimate_validate(run_simulation(SimConfig(s, seed=args.seed, horizon=args.horizon)))
            rows.append((b, kind, s.validate.mu_v, est.throughput))
    write_rows(Path(args.out) / "batch_disk.csv", ("batch_size", "disk", "model_mu_v", "sim_throughput"), rows)


if __name__ == "__main__":
    main()
