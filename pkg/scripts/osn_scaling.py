"""Order-phase throughput and leader-to-follower latency as the OSN count grows."""

from dataclasses import replace
from pathlib import Path

from _common import base, parser, with_load, write_rows
from eovperf.analysis import estimate_order
from eovperf.phases import order_latency
from eovperf.sim import SimConfig, run_simulation


def main():
    ap = parser(__doc__, horizon=40_000)
    ap.add_argument("--osns", type=int, nargs="+", default=[1, 3, 5, 9, 15])
    ap.add_argument("--load", type=float, default=300.0, help="total offered load (tx/s)")
    ap.add_argument("--beta-l2f", type=float, default=1e8, help="leader-to-follower bandwidth (bit/s)")
    args = ap.parse_args()
    s0 = with_load(base(args), args.load)
    s0 = replace(s0, order=replace(s0.order, link_l2f=replace(s0.order.link_l2f, beta=args.beta_l2f)))
    rows = []
    for k in args.osns:
        s = s0.with_param("k", k)
        s = replace(s, order=replace(s.order, link_l2f=replace(s.order.link_l2f, fanout=max(1, k - 1))))
        est = estimate_order(run_simulation(SimConfig(s, seed=args.seed, horizon=args.horizon)))
        model = order_latency(s.order, args.load)
        rows.append((k, est.throughput, model.detail["l2f"], est.detail["l2f"], model.total, est.mean_total))
    header = ("k", "sim_throughput", "model_l2f", "sim_l2f", "model_total", "sim_total")
    write_rows(Path(args.out) / "osn_scaling.csv", header, rows)


if __name__ == "__main__":
    main()
