"""Discrete-event simulation of the execute-order-validate pipeline.

Stages:

* execute: ``c`` endorser cores, FCFS, deterministic service ``1/mu_core``;
  request and reply each cross a client<->endorser channel.
* order: the client forwards the endorsed transaction to the Raft leader, which
  sequences it (single server, rate ``mu_order``; gamma-distributed when the
  order phase's ``cv_service`` is positive, otherwise deterministic), then
  broadcasts it to ``k - 1`` followers. Consensus is reached once a majority
  has acknowledged. The block cutter then holds it until ``batch_size``
  transactions are pending or ``batch_timeout`` has passed since the first
  pending transaction arrived.
* validate: blocks travel to the committing peer, which commits them one at a
  time in block order; a block of ``n`` transactions takes ``n / mu_v``.

Every transaction is stamped t1..t10 at its phase boundaries. Queue entry and
service start/end times are stamped as well, so the trace carries the
service/queue split directly.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from ..comm import LinkParams
from ..phases import utilizations
from ..scenario import ScenarioConfig
from .channel import Channel
from .engine import EventQueue
from .streams import CHANNEL, SEQUENCER, gamma_with_cv, generator
from .workload import ClientStream

TIMEOUT = "Timeout"
SIZE_REACHED = "SizeReached"

# Queue stages tracked for Little's law: (entry column, exit column).
QUEUE_STAGES = {
    "execute": ("t2", "exec_start"),
    "order": ("t5", "seq_start"),
    "cutter": ("t7", "t8"),
    "validate": ("t9", "commit_start"),
}

TIME_COLUMNS = tuple(f"t{i}" for i in range(1, 11))
AUX_COLUMNS = ("exec_start", "seq_start", "seq_end", "commit_start")


@dataclass(frozen=True)
class SimConfig:
    """One simulation run.

    ``horizon`` is the number of transactions submitted. The run then drains
    every in-flight transaction, unless ``until`` (simulated seconds) stops
    it first. The first ``warmup`` fraction of submissions is excluded from
    statistics.
    """

    scenario: ScenarioConfig
    seed: int = 0
    horizon: int = 100_000
    warmup: float = 0.2
    until: float | None = None
    jitter: bool = False
    rate_window: float = 1.0

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon <= 0:
            raise ValueError(f"horizon must be a positive transaction count, got {self.horizon!r}")
        if not 0 <= self.warmup < 1:
            raise ValueError(f"warmup must be in [0, 1), got {self.warmup!r}")
        if self.until is not None and not self.until > 0:
            raise ValueError("until must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class TxRecord:
    tx_id: int
    client_id: int
    t1: float
    t2: float
    t3: float
    t4: float
    t5: float
    t6: float
    t7: float
    t8: float
    t9: float
    t10: float
    block_id: int = -1
    exec_start: float | None = None
    seq_start: float | None = None
    seq_end: float | None = None
    commit_start: float | None = None

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in TIME_COLUMNS)


@dataclass(frozen=True)
class Block:
    block_id: int
    tx_ids: tuple[int, ...]
    cut_time: float
    cut_reason: str
    first_enqueue: float
    recv_time: float = math.nan
    commit_start: float = math.nan
    commit_time: float = math.nan


@dataclass
class Trace:
    """Column store of transaction records.

    Missing timestamps are NaN; ``block_id`` is -1 until a block is cut.
    Transactions submitted before ``warmup_cutoff`` are dropped by
    :meth:`steady`.
    """

    tx_id: np.ndarray
    client_id: np.ndarray
    block_id: np.ndarray
    columns: dict[str, np.ndarray]
    warmup_cutoff: float = -math.inf

    def __len__(self) -> int:
        return len(self.tx_id)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def times(self) -> np.ndarray:
        return np.column_stack([self.columns[c] for c in TIME_COLUMNS])

    def committed_mask(self) -> np.ndarray:
        return ~np.isnan(self.columns["t10"])

    def select(self, mask: np.ndarray) -> Trace:
        return Trace(
            self.tx_id[mask],
            self.client_id[mask],
            self.block_id[mask],
            {k: v[mask] for k, v in self.columns.items()},
            self.warmup_cutoff,
        )

    def steady(self) -> Trace:
        """Committed transactions submitted at or after the warmup cutoff."""
        return self.select(self.committed_mask() & (self.columns["t1"] >= self.warmup_cutoff))

    def record(self, i: int) -> TxRecord:
        aux = {c: float(self.columns[c][i]) for c in AUX_COLUMNS}
        return TxRecord(
            int(self.tx_id[i]),
            int(self.client_id[i]),
            *(float(self.columns[c][i]) for c in TIME_COLUMNS),
            block_id=int(self.block_id[i]),
            **aux,
        )

    def records(self):
        for i in range(len(self)):
            yield self.record(i)

    @classmethod
    def from_records(cls, records, warmup_cutoff: float = -math.inf) -> Trace:
        """Build a trace from TxRecords.

        Unset auxiliary stamps mean "no queueing": service starts on arrival
        (``exec_start = t2``, ``seq_start = seq_end = t5``,
        ``commit_start = t9``).
        """
        records = list(records)
        defaults = {"exec_start": "t2", "seq_start": "t5", "seq_end": "t5", "commit_start": "t9"}
        cols: dict[str, list] = {c: [] for c in (*TIME_COLUMNS, *AUX_COLUMNS)}
        for r in records:
            for c in TIME_COLUMNS:
                cols[c].append(getattr(r, c))
            for c in AUX_COLUMNS:
                v = getattr(r, c)
                cols[c].append(getattr(r, defaults[c]) if v is None else v)
        return cls(
            np.array([r.tx_id for r in records], dtype=np.int64),
            np.array([r.client_id for r in records], dtype=np.int64),
            np.array([r.block_id for r in records], dtype=np.int64),
            {c: np.asarray(v, dtype=float) for c, v in cols.items()},
            warmup_cutoff,
        )


@dataclass
class QueueMonitor:
    """Time-integrated queue length, over the whole run and after warmup."""

    length: int = 0
    last: float = 0.0
    area_all: float = 0.0
    area_post: float = 0.0
    post_start: float | None = None
    end: float = 0.0

    def change(self, now: float, delta: int) -> None:
        span = self.length * (now - self.last)
        self.area_all += span
        if self.post_start is not None:
            self.area_post += span
        self.length += delta
        self.last = now

    def start_post(self, now: float) -> None:
        self.change(now, 0)
        self.post_start = now

    def close(self, now: float) -> None:
        self.change(now, 0)
        self.end = now


@dataclass
class SimResult:
    config: SimConfig
    trace: Trace
    blocks: list[Block]
    monitors: dict[str, QueueMonitor]
    submitted: int
    committed: int
    end_time: float
    unstable: bool
    saturated_stage: str | None
    utilization: dict[str, float] = field(default_factory=dict)

    @property
    def in_flight(self) -> int:
        return self.submitted - self.committed


class _Run:
    def __init__(self, cfg: SimConfig):
        sc = cfg.scenario
        self.cfg = cfg
        self.m = sc.m
        self.n_max = cfg.horizon
        self.warm_idx = int(math.floor(cfg.warmup * cfg.horizon))
        self.eq = EventQueue()

        ex, od, va = sc.execute, sc.order, sc.validate
        seed = cfg.seed

        def channel(link: LinkParams, idx: int) -> Channel:
            rng = generator(seed, CHANNEL, idx) if cfg.jitter else None
            return Channel(link, cfg.rate_window, sc.comm_variant, rng)

        self.c2e = channel(ex.link, 0)
        self.e2c = channel(ex.link_back or ex.link, 1)
        self.c2l = channel(od.link_c2l, 2)
        self.l2f = channel(replace(od.link_l2f, fanout=max(1, od.followers)), 3)
        self.o2c = channel(va.link, 4)

        self.cores = ex.c
        self.exec_time = 1.0 / ex.mu_core
        self.followers = od.followers
        self.acks = od.quorum_acks
        self.batch_size = od.batch_size
        self.batch_timeout = od.batch_timeout
        if od.var.cv_s > 0:
            self.seq_time = gamma_with_cv(seed, (SEQUENCER, 0), 1.0 / od.mu_order, od.var.cv_s)
        else:
            mean = 1.0 / od.mu_order
            self.seq_time = lambda: mean
        self.commit_rate = va.mu_v

        n = self.n_max
        nan = math.nan
        self.t = [[nan] * n for _ in range(10)]
        self.exec_start = [nan] * n
        self.seq_start = [nan] * n
        self.seq_end = [nan] * n
        self.commit_start = [nan] * n
        self.client = [0] * n
        self.block = [-1] * n

        self.submitted = 0
        self.committed = 0
        self.cutoff = -math.inf

        self.exec_busy = 0
        self.exec_q: deque[int] = deque()
        self.seq_busy = False
        self.seq_q: deque[int] = deque()
        self.batch: list[int] = []
        self.batch_gen = 0
        self.blocks: list[Block] = []
        self.block_recv: dict[int, float] = {}
        self.next_commit = 0
        self.commit_busy = False
        self.mon = {name: QueueMonitor() for name in QUEUE_STAGES}

        self.streams = [ClientStream(seed, i, sc.workload.rate_per_client) for i in range(sc.workload.clients)]
        for s in self.streams:
            self.eq.schedule(s.next_time, self._submit, s)

    # execute -------------------------------------------------------------

    def _submit(self, stream: ClientStream) -> None:
        if self.submitted >= self.n_max:
            return
        now = stream.advance()
        i = self.submitted
        self.submitted += 1
        if i == self.warm_idx:
            self.cutoff = now
            for mon in self.mon.values():
                mon.start_post(now)
        self.t[0][i] = now
        self.client[i] = stream.client_id
        if self.submitted < self.n_max:
            self.eq.schedule(stream.next_time, self._submit, stream)
        self.eq.schedule(now + self.c2e.send(now, self.m), self._endorser_arrive, i)

    def _endorser_arrive(self, i: int) -> None:
        now = self.eq.now
        self.t[1][i] = now
        if self.exec_busy < self.cores:
            self._start_exec(i, now)
        else:
            self.exec_q.append(i)
            self.mon["execute"].change(now, 1)

    def _start_exec(self, i: int, now: float) -> None:
        self.exec_start[i] = now
        self.exec_busy += 1
        self.eq.schedule(now + self.exec_time, self._exec_done, i)

    def _exec_done(self, i: int) -> None:
        now = self.eq.now
        self.t[2][i] = now
        self.exec_busy -= 1
        if self.exec_q:
            self.mon["execute"].change(now, -1)
            self._start_exec(self.exec_q.popleft(), now)
        self.eq.schedule(now + self.e2c.send(now, self.m), self._client_reply, i)

    # order ---------------------------------------------------------------

    def _client_reply(self, i: int) -> None:
        now = self.eq.now
        self.t[3][i] = now
        self.eq.schedule(now + self.c2l.send(now, self.m), self._leader_arrive, i)

    def _leader_arrive(self, i: int) -> None:
        now = self.eq.now
        self.t[4][i] = now
        if not self.seq_busy:
            self._start_seq(i, now)
        else:
            self.seq_q.append(i)
            self.mon["order"].change(now, 1)

    def _start_seq(self, i: int, now: float) -> None:
        self.seq_start[i] = now
        self.seq_busy = True
        self.eq.schedule(now + self.seq_time(), self._seq_done, i)

    def _seq_done(self, i: int) -> None:
        now = self.eq.now
        self.seq_end[i] = now
        self.seq_busy = False
        if self.seq_q:
            self.mon["order"].change(now, -1)
            self._start_seq(self.seq_q.popleft(), now)
        delay = self.l2f.broadcast(now, self.m, self.followers, self.acks)
        self.eq.schedule(now + delay, self._consensus, i)

    def _consensus(self, i: int) -> None:
        now = self.eq.now
        self.t[5][i] = now
        self.t[6][i] = now
        self.batch.append(i)
        self.mon["cutter"].change(now, 1)
        if len(self.batch) == 1:
            self.eq.schedule(now + self.batch_timeout, self._batch_timeout, self.batch_gen)
        if len(self.batch) >= self.batch_size:
            self._cut(now, SIZE_REACHED)

    def _batch_timeout(self, gen: int) -> None:
        if gen == self.batch_gen and self.batch:
            self._cut(self.eq.now, TIMEOUT)

    def _cut(self, now: float, reason: str) -> None:
        txs = self.batch
        self.batch = []
        self.batch_gen += 1
        bid = len(self.blocks)
        t8 = self.t[7]
        for i in txs:
            t8[i] = now
            self.block[i] = bid
        self.mon["cutter"].change(now, -len(txs))
        self.blocks.append(Block(bid, tuple(txs), now, reason, self.t[6][txs[0]]))
        delay = self.o2c.send(now, len(txs) * self.m)
        self.eq.schedule(now + delay, self._block_arrive, bid)

    # validate ------------------------------------------------------------

    def _block_arrive(self, bid: int) -> None:
        now = self.eq.now
        txs = self.blocks[bid].tx_ids
        t9 = self.t[8]
        for i in txs:
            t9[i] = now
        self.block_recv[bid] = now
        self.mon["validate"].change(now, len(txs))
        self._try_commit(now)

    def _try_commit(self, now: float) -> None:
        if self.commit_busy or self.next_commit not in self.block_recv:
            return
        bid = self.next_commit
        txs = self.blocks[bid].tx_ids
        for i in txs:
            self.commit_start[i] = now
        self.mon["validate"].change(now, -len(txs))
        self.commit_busy = True
        self.eq.schedule(now + len(txs) / self.commit_rate, self._commit_done, bid)

    def _commit_done(self, bid: int) -> None:
        now = self.eq.now
        blk = self.blocks[bid]
        t10 = self.t[9]
        for i in blk.tx_ids:
            t10[i] = now
        self.committed += len(blk.tx_ids)
        self.blocks[bid] = Block(
            blk.block_id,
            blk.tx_ids,
            blk.cut_time,
            blk.cut_reason,
            blk.first_enqueue,
            self.block_recv.pop(bid),
            self.commit_start[blk.tx_ids[0]],
            now,
        )
        self.next_commit += 1
        self.commit_busy = False
        self._try_commit(now)

    # ---------------------------------------------------------------------

    def run(self) -> SimResult:
        until = self.cfg.until if self.cfg.until is not None else math.inf
        self.eq.run(until)
        end = self.eq.now
        for mon in self.mon.values():
            if mon.post_start is None:
                mon.start_post(end)
            mon.close(end)
        n = self.submitted
        cols = {f"t{k + 1}": np.array(self.t[k][:n]) for k in range(10)}
        cols["exec_start"] = np.array(self.exec_start[:n])
        cols["seq_start"] = np.array(self.seq_start[:n])
        cols["seq_end"] = np.array(self.seq_end[:n])
        cols["commit_start"] = np.array(self.commit_start[:n])
        trace = Trace(
            np.arange(n, dtype=np.int64),
            np.array(self.client[:n], dtype=np.int64),
            np.array(self.block[:n], dtype=np.int64),
            cols,
            self.cutoff,
        )
        rho = utilizations(self.cfg.scenario)
        saturated = [p for p in ("execute", "order", "validate") if rho[p] >= 1.0]
        return SimResult(
            config=self.cfg,
            trace=trace,
            blocks=list(self.blocks),
            monitors=self.mon,
            submitted=n,
            committed=self.committed,
            end_time=end,
            unstable=bool(saturated),
            saturated_stage=saturated[0] if saturated else None,
            utilization=rho,
        )


def run_simulation(cfg: SimConfig) -> SimResult:
    """Run one seeded simulation. Saturated scenarios run too and come back flagged."""
    return _Run(cfg).run()
