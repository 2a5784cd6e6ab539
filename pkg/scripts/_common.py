"""Helpers shared by the experiment scripts."""

from __future__ import annotations

import argparse
import csv
from dataclasses import replace
from pathlib import Path

from eovperf.comm import LinkParams
from eovperf.phases import ValidateParams
from eovperf.scenario import ScenarioConfig, load_scenario

FREE_LINK = LinkParams(0.0, 1e18)


def parser(description: str, horizon: int) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--scenario", default="desk-default")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--horizon", type=int, default=horizon)
    ap.add_argument("--out", default="out/experiments")
    return ap


def base(args) -> ScenarioConfig:
    return load_scenario(args.scenario)


def with_load(s: ScenarioConfig, total: float) -> ScenarioConfig:
    return s.with_param("lambda", total)


def isolate_execute(s: ScenarioConfig) -> ScenarioConfig:
    """Free links and instantaneous order/validate stages, so only the endorsers queue."""
    return replace(
        s,
        execute=replace(s.execute, link=FREE_LINK, link_back=None),
        order=replace(s.order, mu_order=1e7, batch_size=1, link_c2l=FREE_LINK, link_l2f=replace(s.order.link_l2f, alpha=0.0, beta=1e18)),
        validate=ValidateParams(link=FREE_LINK, m=s.m, mu=1e7, var=s.validate.var),
    )


def write_rows(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}")
    widths = [max(len(str(h)), 12) for h in header]
    print("  ".join(str(h).rjust(w) for h, w in zip(header, widths)))
    for row in rows:
        print("  ".join((f"{v:.6g}" if isinstance(v, float) else str(v)).rjust(w) for v, w in zip(row, widths)))
