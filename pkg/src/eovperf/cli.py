"""Command line entry point: ``eovperf --mode {analytic,simulate,compare} --scenario FILE``."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

from .analysis import compare, estimate_all
from .errors import ScenarioError, UnstableQueue
from .phases import PHASES, pipeline_predict
from .scenario import ScenarioConfig, load_scenario
from .sim import SimConfig, run_simulation
from .sim.export import write_blocks, write_trace

log = logging.getLogger("eovperf")

MODES = ("analytic", "simulate", "compare")


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) if not isinstance(v, str) else v for v in row])


def write_breakdown(pred, path: Path) -> None:
    header = ("phase", "arrival_rate", "utilization", "throughput", "comm", "service", "queueing", "idle", "total")
    rows = []
    for p in PHASES:
        b = pred.breakdown[p]
        rows.append((p, pred.arrival[p], pred.utilization[p], pred.throughput[p], b.comm, b.service, b.queueing, b.idle, b.total))
    rows.append(("end_to_end", None, None, pred.throughput["validate"], None, None, None, None, pred.total))
    _write_rows(path, header, rows)


def write_estimates(est, path: Path) -> None:
    header = ("phase", "n", "total", "comm", "service", "queueing", "idle", "cv_arrival", "cv_service", "throughput", "p50_total", "p95_total")
    rows = []
    for p in PHASES:
        d = est[p].as_dict()
        rows.append((p, *(d[h] for h in header[1:])))
    _write_rows(path, header, rows)


def write_summary(result, path: Path) -> None:
    cfg = result.config
    rows = [
        ("seed", cfg.seed),
        ("horizon", cfg.horizon),
        ("warmup", cfg.warmup),
        ("submitted", result.submitted),
        ("committed", result.committed),
        ("in_flight", result.in_flight),
        ("blocks", len(result.blocks)),
        ("end_time", result.end_time),
        ("unstable", "yes" if result.unstable else "no"),
        ("saturated_stage", result.saturated_stage or ""),
    ]
    _write_rows(path, ("key", "value"), rows)


def _sim_config(scenario: ScenarioConfig, args) -> SimConfig:
    return SimConfig(scenario, seed=args.seed, horizon=args.horizon, warmup=args.warmup, jitter=args.jitter)


def _run_point(mode: str, scenario: ScenarioConfig, args, out: Path | None) -> tuple[int, dict]:
    """Run one scenario; write artifacts into ``out`` if given. Returns (status, plot values)."""
    values: dict[str, float] = {}
    status = 0
    pred = None
    if mode in ("analytic", "compare"):
        try:
            pred = pipeline_predict(scenario)
        except UnstableQueue as exc:
            if mode == "analytic":
                log.error("unstable scenario: %s", exc)
                values["unstable"] = exc.stage
                return 2, values
            log.warning("model refuses this scenario (%s); comparing without pass/fail", exc)
        if pred is not None:
            for p in PHASES:
                values[f"model_{p}_total"] = pred.breakdown[p].total
                values[f"model_{p}_comm"] = pred.breakdown[p].comm
                values[f"model_{p}_throughput"] = pred.throughput[p]
            values["model_end_to_end"] = pred.total
            if out is not None and mode == "analytic":
                write_breakdown(pred, out / "breakdown.csv")
    if mode in ("simulate", "compare"):
        result = run_simulation(_sim_config(scenario, args))
        if result.unstable:
            log.warning("offered load saturates the %s phase; statistics are truncated", result.saturated_stage)
            values["unstable"] = result.saturated_stage
        est = estimate_all(result)
        for p in PHASES:
            values[f"sim_{p}_total"] = est[p].mean_total
            values[f"sim_{p}_comm"] = est[p].mean_comm
            values[f"sim_{p}_throughput"] = est[p].throughput
        values["sim_end_to_end"] = sum(est[p].mean_total for p in PHASES)
        if out is not None:
            write_estimates(est, out / "estimates.csv")
            write_summary(result, out / "summary.csv")
            if mode == "simulate":
                write_trace(result.trace, out / "trace.csv")
                write_blocks(result.blocks, out / "blocks.csv")
        if mode == "compare":
            report = compare(scenario, result, tolerance=args.tolerance)
            if out is not None:
                report.write_csv(out / "comparison.csv")
            if report.unstable:
                values["unstable"] = report.bottleneck
            elif not report.passed:
                for row in report.failures():
                    log.error("%s: model %.6g vs sim %.6g (rel error %.2f%%)", row.metric, row.analytical, row.simulated, 100 * row.rel_error)
                status = 1
    return status, values


def _run_sweep(mode: str, scenario: ScenarioConfig, args, out: Path) -> int:
    sweep = scenario.sweep
    rows = []
    keys: list[str] = []
    worst = 0
    for x in sweep.values:
        point = scenario.with_param(sweep.param, x)
        status, values = _run_point(mode, point, args, None)
        worst = max(worst, 1 if status == 1 else 0)
        for k in values:
            if k not in keys and k != "unstable":
                keys.append(k)
        rows.append((x, values))
        log.info("%s = %s done", sweep.param, x)
    header = (sweep.param, *keys, "unstable")
    _write_rows(out / f"sweep_{sweep.param}.csv", header, [(x, *(v.get(k) for k in keys), v.get("unstable", "")) for x, v in rows])
    return worst


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eovperf", description=__doc__)
    ap.add_argument("--mode", choices=MODES, required=True)
    ap.add_argument("--scenario", required=True, help="scenario YAML file, or a shipped scenario name")
    ap.add_argument("--seed", type=int, help="simulation seed (unsigned 64-bit)")
    ap.add_argument("--horizon", type=int, help="number of transactions to submit")
    ap.add_argument("--warmup", type=float, default=0.2, help="fraction of submissions excluded from statistics")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--tolerance", type=float, default=0.10, help="relative tolerance for compare")
    ap.add_argument("--jitter", action="store_true", help="exponential jitter on link delays")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.mode != "analytic" and (args.seed is None or args.horizon is None):
        log.error("--seed and --horizon are required for %s mode", args.mode)
        return 2
    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if scenario.sweep is not None:
            return _run_sweep(args.mode, scenario, args, out)
        status, _ = _run_point(args.mode, scenario, args, out)
    except ValueError as exc:
        log.error("%s", exc)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
