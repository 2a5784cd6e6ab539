"""Delimited-text export of traces and blocks."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .pipeline import AUX_COLUMNS, TIME_COLUMNS, Block, Trace

TRACE_HEADER = ("tx_id", "client_id", *TIME_COLUMNS, "block_id", *AUX_COLUMNS)
BLOCK_HEADER = ("block_id", "n_tx", "cut_time", "cut_reason", "first_enqueue", "recv_time", "commit_start", "commit_time", "tx_ids")


def fmt(x: float) -> str:
    """Shortest repr that round-trips exactly (at least 9 significant digits when needed)."""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def write_trace(trace: Trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        cols = [trace.columns[c].tolist() for c in (*TIME_COLUMNS, *AUX_COLUMNS)]
        ids, clients, blocks = trace.tx_id.tolist(), trace.client_id.tolist(), trace.block_id.tolist()
        for i in range(len(trace)):
            vals = [fmt(col[i]) for col in cols]
            w.writerow([ids[i], clients[i], *vals[:10], blocks[i], *vals[10:]])


def read_trace(path, warmup_cutoff: float = -math.inf) -> Trace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if tuple(header) != TRACE_HEADER:
        raise ValueError(f"unexpected trace header {header}")
    idx = {name: j for j, name in enumerate(header)}

    def floats(name):
        return np.array([float(r[idx[name]]) if r[idx[name]] else math.nan for r in body])

    return Trace(
        np.array([int(r[idx["tx_id"]]) for r in body], dtype=np.int64),
        np.array([int(r[idx["client_id"]]) for r in body], dtype=np.int64),
        np.array([int(r[idx["block_id"]]) for r in body], dtype=np.int64),
        {c: floats(c) for c in (*TIME_COLUMNS, *AUX_COLUMNS)},
        warmup_cutoff,
    )


def write_blocks(blocks: list[Block], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BLOCK_HEADER)
        for b in blocks:
            w.writerow(
                [
                    b.block_id,
                    len(b.tx_ids),
                    fmt(b.cut_time),
                    b.cut_reason,
                    fmt(b.first_enqueue),
                    fmt(b.recv_time),
                    fmt(b.commit_start),
                    fmt(b.commit_time),
                    " ".join(map(str, b.tx_ids)),
                ]
            )
