"""Per-phase estimators over simulation traces, and model-vs-simulation comparison.

Phase boundaries follow the timestamp scheme: execute is t1..t4, order t4..t8,
validate t8..t10. Communication and totals come straight from the stamps;
the service/queue split uses the service start/end stamps the simulator logs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyTrace, InsufficientSamples, UnstableQueue, ZeroMean
from .phases import PHASES, bottleneck, pipeline_predict
from .queueing import VariationPair
from .scenario import ScenarioConfig
from .sim.pipeline import QUEUE_STAGES, SimResult, Trace

EPS = 1e-12


@dataclass(frozen=True)
class PhaseEstimates:
    mean_total: float
    mean_comm: float
    mean_service: float
    mean_queue: float
    mean_idle: float
    cv_arrival: float
    cv_service: float
    throughput: float
    n: int
    detail: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "total": self.mean_total,
            "comm": self.mean_comm,
            "service": self.mean_service,
            "queueing": self.mean_queue,
            "idle": self.mean_idle,
            "cv_arrival": self.cv_arrival,
            "cv_service": self.cv_service,
            "throughput": self.throughput,
            **self.detail,
        }


def estimate_cv(samples) -> float:
    """Sample standard deviation (n - 1 denominator) over the sample mean."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {x.size}")
    mean = x.mean()
    if mean == 0:
        raise ZeroMean("coefficient of variation is undefined for zero mean")
    return float(x.std(ddof=1) / mean)


def _cv_or_nan(samples) -> float:
    try:
        return estimate_cv(samples)
    except (InsufficientSamples, ZeroMean):
        return math.nan


def _rate(departures: np.ndarray) -> float:
    if departures.size < 2:
        return math.nan
    span = departures.max() - departures.min()
    return float((departures.size - 1) / span) if span > 0 else math.nan


def _estimates(total, comm, service, queue, idle, arrivals, departures, extra=None) -> PhaseEstimates:
    detail = {
        "p50_total": float(np.percentile(total, 50)),
        "p95_total": float(np.percentile(total, 95)),
    }
    if extra:
        detail.update(extra)
    return PhaseEstimates(
        mean_total=float(total.mean()),
        mean_comm=float(comm.mean()),
        mean_service=float(service.mean()),
        mean_queue=float(queue.mean()),
        mean_idle=float(idle.mean()),
        cv_arrival=_cv_or_nan(np.diff(np.sort(arrivals))),
        cv_service=_cv_or_nan(service),
        throughput=_rate(departures),
        n=int(total.size),
        detail=detail,
    )


def _steady(trace: Trace | SimResult) -> Trace:
    if isinstance(trace, SimResult):
        trace = trace.trace
    s = trace.steady()
    if len(s) == 0:
        raise EmptyTrace("no committed transactions after the warmup cutoff")
    return s


def estimate_execute(trace: Trace | SimResult) -> PhaseEstimates:
    s = _steady(trace)
    t1, t2, t3, t4 = s["t1"], s["t2"], s["t3"], s["t4"]
    start = s["exec_start"]
    comm = (t2 - t1) + (t4 - t3)
    return _estimates(
        total=t4 - t1,
        comm=comm,
        service=t3 - start,
        queue=start - t2,
        idle=np.zeros_like(t1),
        arrivals=t2,
        departures=t4,
        extra={"c2e": float((t2 - t1).mean()), "e2c": float((t4 - t3).mean())},
    )


def estimate_order(trace: Trace | SimResult) -> PhaseEstimates:
    """Order-phase estimates.

    ``c2l`` is t5 - t4. The leader sequences before broadcasting, so the
    pure broadcast latency is t6 - seq_end; ``l2f_raw`` keeps t6 - t5, which
    also contains the leader's queueing and service.
    """
    s = _steady(trace)
    t4, t5, t6, t7, t8 = s["t4"], s["t5"], s["t6"], s["t7"], s["t8"]
    q0, q1 = s["seq_start"], s["seq_end"]
    c2l = t5 - t4
    l2f = t6 - q1
    return _estimates(
        total=t8 - t4,
        comm=c2l + l2f,
        service=q1 - q0,
        queue=q0 - t5,
        idle=t8 - t7,
        arrivals=t5,
        departures=t8,
        extra={"c2l": float(c2l.mean()), "l2f": float(l2f.mean()), "l2f_raw": float((t6 - t5).mean())},
    )


def estimate_validate(trace: Trace | SimResult) -> PhaseEstimates:
    s = _steady(trace)
    t8, t9, t10 = s["t8"], s["t9"], s["t10"]
    start = s["commit_start"]
    return _estimates(
        total=t10 - t8,
        comm=t9 - t8,
        service=t10 - start,
        queue=start - t9,
        idle=np.zeros_like(t8),
        arrivals=t9,
        departures=t10,
    )


ESTIMATORS = {"execute": estimate_execute, "order": estimate_order, "validate": estimate_validate}


def estimate_all(trace: Trace | SimResult) -> dict[str, PhaseEstimates]:
    return {p: f(trace) for p, f in ESTIMATORS.items()}


# --- structural checks ---------------------------------------------------------


@dataclass(frozen=True)
class LittleCheck:
    stage: str
    mean_length: float  # time-average queue length from the event loop
    rate_times_wait: float  # lambda_eff * mean wait from the trace
    exact_area: float
    trace_area: float

    @property
    def rel_gap(self) -> float:
        scale = max(abs(self.mean_length), abs(self.rate_times_wait))
        return abs(self.mean_length - self.rate_times_wait) / scale if scale > 0 else 0.0


def littles_law(result: SimResult) -> dict[str, LittleCheck]:
    """Compare each queue's time-average length with lambda * W.

    ``mean_length`` comes from the simulator's running area integral after
    warmup; ``rate_times_wait`` from per-transaction entry/exit stamps of
    transactions entering the queue after warmup. ``exact_area`` and
    ``trace_area`` are the whole-run versions, which must agree to rounding.
    """
    trace = result.trace
    out = {}
    for stage, (entry_col, exit_col) in QUEUE_STAGES.items():
        mon = result.monitors[stage]
        entry = trace[entry_col]
        exit_ = trace[exit_col]
        entered = ~np.isnan(entry)
        exit_ = np.where(np.isnan(exit_), mon.end, exit_)
        waits = (exit_ - entry)[entered]
        span = mon.end - mon.post_start
        post = entry[entered] >= mon.post_start
        if span > 0:
            length = mon.area_post / span
            lam_w = waits[post].sum() / span
        else:
            length = lam_w = 0.0
        out[stage] = LittleCheck(stage, length, lam_w, mon.area_all, float(waits.sum()))
    return out


def structural_violations(result: SimResult, little_tol: float = 0.05, little_min_n: int = 10_000) -> list[str]:
    """List every broken structural invariant of a run (empty when all hold).

    Checks timestamp order, block integrity, conservation and Little's law.
    The post-warmup Little's law tolerance applies to stable runs with at
    least ``little_min_n`` steady transactions; the whole-run identity is
    checked on every run.
    """
    bad: list[str] = []
    trace = result.trace
    committed = trace.committed_mask()
    times = trace.times[committed]
    if times.size and np.any(np.diff(times, axis=1) < 0):
        rows = np.nonzero(np.any(np.diff(times, axis=1) < 0, axis=1))[0]
        bad.append(f"timestamps out of order for {rows.size} committed tx (first tx {trace.tx_id[committed][rows[0]]})")
    for name, lo, hi in (("exec_start", "t2", "t3"), ("seq_start", "t5", "seq_end"), ("seq_end", "seq_start", "t6"), ("commit_start", "t9", "t10")):
        col = trace[name][committed]
        if np.any(col < trace[lo][committed]) or np.any(col > trace[hi][committed]):
            bad.append(f"{name} outside [{lo}, {hi}]")

    if result.submitted != result.committed + result.in_flight:
        bad.append("submitted != committed + in flight")
    if int(committed.sum()) != result.committed:
        bad.append(f"trace has {int(committed.sum())} committed tx, run reports {result.committed}")

    batch_size = result.config.scenario.order.batch_size
    timeout = result.config.scenario.order.batch_timeout
    seen = np.zeros(len(trace), dtype=np.int64)
    for b in result.blocks:
        if not 1 <= len(b.tx_ids) <= batch_size:
            bad.append(f"block {b.block_id} has {len(b.tx_ids)} tx (batch size {batch_size})")
        if b.cut_reason == "Timeout" and not math.isclose(b.cut_time - b.first_enqueue, timeout, rel_tol=1e-9, abs_tol=1e-9):
            bad.append(f"block {b.block_id} timed out after {b.cut_time - b.first_enqueue} s, not {timeout} s")
        ids = np.asarray(b.tx_ids)
        seen[ids] += 1
        if np.any(trace.block_id[ids] != b.block_id):
            bad.append(f"block {b.block_id} membership disagrees with trace block_id")
    if np.any(seen > 1):
        bad.append(f"{int((seen > 1).sum())} tx appear in more than one block")
    if np.any(seen[committed] != 1):
        bad.append("a committed tx belongs to no block")

    steady_n = int((committed & (trace["t1"] >= trace.warmup_cutoff)).sum())
    for stage, chk in littles_law(result).items():
        if not math.isclose(chk.exact_area, chk.trace_area, rel_tol=1e-9, abs_tol=1e-9):
            bad.append(f"{stage}: queue area {chk.exact_area} != sum of waits {chk.trace_area}")
        if not result.unstable and steady_n >= little_min_n and chk.rel_gap > little_tol:
            bad.append(f"{stage}: Little's law gap {chk.rel_gap:.3%} (L={chk.mean_length:.6g}, lambda*W={chk.rate_times_wait:.6g})")
    return bad


# --- comparison ---------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    analytical: float
    simulated: float
    rel_error: float
    passed: bool | None


def rel_error(sim: float, model: float) -> float:
    return abs(sim - model) / max(sim, EPS)


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    bottleneck: str
    unstable: bool
    tolerance: float
    atol: float

    def __getitem__(self, metric: str) -> ComparisonRow:
        for r in self.rows:
            if r.metric == metric:
                return r
        raise KeyError(metric)

    @property
    def passed(self) -> bool | None:
        if self.unstable:
            return None
        return all(r.passed for r in self.rows)

    def failures(self) -> list[ComparisonRow]:
        return [r for r in self.rows if r.passed is False]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("metric", "analytical", "simulated", "rel_error", "pass"))
            for r in self.rows:
                passed = "n/a" if r.passed is None else ("yes" if r.passed else "no")
                w.writerow((r.metric, repr(r.analytical), repr(r.simulated), repr(r.rel_error), passed))


def _with_trace_cvs(scenario: ScenarioConfig, est: dict[str, PhaseEstimates]) -> ScenarioConfig:
    def pick(e: PhaseEstimates, fallback: VariationPair) -> VariationPair:
        a = e.cv_arrival if math.isfinite(e.cv_arrival) else fallback.cv_a
        s = e.cv_service if math.isfinite(e.cv_service) else fallback.cv_s
        return VariationPair(a, s)

    return replace(
        scenario,
        order=replace(scenario.order, var=pick(est["order"], scenario.order.var)),
        validate=replace(scenario.validate, var=pick(est["validate"], scenario.validate.var)),
    )


def compare(
    scenario: ScenarioConfig,
    trace: Trace | SimResult,
    tolerance: float = 0.10,
    atol: float = 0.0,
) -> ComparisonReport:
    """Pair analytical predictions with trace estimates, metric by metric.

    The order and validate queueing terms use CVs measured from the trace.
    Totals and throughputs pass when their relative error is within
    ``tolerance``. A latency component (comm, service, queueing, idle, ...)
    also passes when its absolute gap is within ``tolerance`` times its
    phase's simulated total, so sub-millisecond terms are judged by what they
    contribute to the phase. ``atol`` is an extra absolute allowance for
    every metric (default 0).
    """
    est = estimate_all(trace)
    model = _with_trace_cvs(scenario, est)
    try:
        pred = pipeline_predict(model)
        unstable = False
        neck = bottleneck(scenario)
    except UnstableQueue as exc:
        pred = None
        unstable = True
        neck = exc.stage or bottleneck(scenario)

    pairs: list[tuple[str, float | None, float]] = []
    for phase in PHASES:
        e = est[phase]
        b = pred.breakdown[phase] if pred else None
        pairs.append((f"{phase}.total", b.total if b else None, e.mean_total))
        pairs.append((f"{phase}.comm", b.comm if b else None, e.mean_comm))
        if phase == "order":
            pairs.append(("order.c2l", b.detail["c2l"] if b else None, e.detail["c2l"]))
            pairs.append(("order.l2f", b.detail["l2f"] if b else None, e.detail["l2f"]))
        pairs.append((f"{phase}.service", b.service if b else None, e.mean_service))
        pairs.append((f"{phase}.queueing", b.queueing if b else None, e.mean_queue))
        if phase == "order":
            pairs.append(("order.idle", b.idle if b else None, e.mean_idle))
        pairs.append((f"{phase}.throughput", pred.throughput[phase] if pred else None, e.throughput))
    pairs.append(("end_to_end.total", pred.total if pred else None, sum(est[p].mean_total for p in PHASES)))

    rows = []
    for metric, model_value, sim_value in pairs:
        if model_value is None:
            rows.append(ComparisonRow(metric, math.nan, sim_value, math.nan, None))
            continue
        err = rel_error(sim_value, model_value)
        gap = abs(sim_value - model_value)
        ok = err <= tolerance or gap <= atol
        phase, part = metric.split(".")
        if part not in ("total", "throughput") and phase in est:
            ok = ok or gap <= tolerance * est[phase].mean_total
        rows.append(ComparisonRow(metric, float(model_value), float(sim_value), float(err), bool(ok)))
    return ComparisonReport(rows, neck, unstable, tolerance, atol)
