import copy
import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eovperf.analysis import (
    compare,
    estimate_all,
    estimate_cv,
    estimate_execute,
    estimate_order,
    estimate_validate,
    littles_law,
)
from eovperf.errors import EmptyTrace, InsufficientSamples, ZeroMean
from eovperf.sim import SimConfig
from eovperf.sim.pipeline import Trace, TxRecord
from factories import free_network, make_scenario
from oracles import md1_pk_wait
from simcheck import checked_run


def single(**times):
    base = {f"t{i}": 0.0 for i in range(1, 11)}
    base.update(times)
    return Trace.from_records([TxRecord(0, 0, **base, block_id=0)])


# single-transaction estimators ----------------------------------------------------


def test_execute_single_tx():
    e = estimate_execute(single(t1=0, t2=0.01, t3=0.02, t4=0.03, t5=0.03, t6=0.03, t7=0.03, t8=0.03, t9=0.03, t10=0.03))
    assert e.mean_comm == pytest.approx(0.02)
    assert e.mean_total == pytest.approx(0.03)
    assert e.mean_service == pytest.approx(0.01)
    assert e.mean_queue == 0.0
    assert e.n == 1
    assert math.isnan(e.throughput) and math.isnan(e.cv_arrival)


def test_order_single_tx():
    tr = single(t4=0, t5=0.01, t6=0.03, t7=0.03, t8=0.5, t9=0.5, t10=0.5)
    e = estimate_order(tr)
    assert e.detail["c2l"] == pytest.approx(0.01)
    assert e.detail["l2f"] == pytest.approx(0.02)
    assert e.mean_total == pytest.approx(0.5)
    assert e.mean_idle == pytest.approx(0.47)


def test_validate_single_tx():
    e = estimate_validate(single(t9=0.012, t10=0.02))
    assert e.mean_comm == pytest.approx(0.012)
    assert e.mean_total == pytest.approx(0.02)
    assert e.mean_service == pytest.approx(0.008)


def test_empty_steady_trace():
    tr = single(t4=0.1)
    tr.warmup_cutoff = 1.0
    with pytest.raises(EmptyTrace):
        estimate_execute(tr)


# coefficient of variation ------------------------------------------------------------


def test_cv_constant_is_zero():
    assert estimate_cv([2.5] * 10) == 0.0


def test_cv_two_points():
    assert estimate_cv([1.0, 3.0]) == pytest.approx(0.70710678, rel=1e-8)


def test_cv_exponential():
    x = np.random.default_rng(21).exponential(3.0, 100_000)
    assert estimate_cv(x) == pytest.approx(1.0, abs=0.03)


def test_cv_errors():
    with pytest.raises(InsufficientSamples):
        estimate_cv([1.0])
    with pytest.raises(ZeroMean):
        estimate_cv([-1.0, 1.0])


@given(
    st.lists(st.floats(0.01, 1e3), min_size=2, max_size=50),
    st.floats(1e-3, 1e3),
)
def test_cv_scale_invariant(xs, k):
    assert estimate_cv(np.array(xs) * k) == pytest.approx(estimate_cv(xs), rel=1e-9, abs=1e-12)


# estimates from simulation -------------------------------------------------------------


def test_md1_queue_matches_pollaczek_khinchine():
    s = free_network(
        workload={"clients": 1, "rate_per_client": 70.0},
        execute={"cores": 1, "mu_core": 100.0},
        order={"mu_order": 1e6, "batch_size": 1},
        validate={"disk": None, "iops": None, "write_per_io_kb": None, "mu": 1e6},
    )
    r = checked_run(SimConfig(s, seed=31, horizon=60_000))
    e = estimate_execute(r)
    assert e.mean_queue == pytest.approx(md1_pk_wait(70.0, 100.0), rel=0.10)
    assert e.throughput == pytest.approx(70.0, rel=0.03)
    assert e.cv_service == 0.0


def _desk_run(seed=32, horizon=20_000):
    return checked_run(SimConfig(make_scenario(), seed=seed, horizon=horizon))


def test_accounting_identity():
    r = _desk_run()
    for e in estimate_all(r).values():
        parts = e.mean_comm + e.mean_service + e.mean_queue + e.mean_idle
        assert parts == pytest.approx(e.mean_total, rel=0, abs=1e-9)


def test_littles_law_whole_run_exact():
    r = _desk_run()
    for chk in littles_law(r).values():
        assert chk.exact_area == pytest.approx(chk.trace_area, rel=1e-9, abs=1e-9)
        assert chk.rel_gap < 0.05


def test_compare_is_pure():
    s = make_scenario()
    r = _desk_run()
    before_s = copy.deepcopy(s)
    before_cols = {k: v.copy() for k, v in r.trace.columns.items()}
    a = compare(s, r)
    b = compare(s, r)
    assert s == before_s
    for k, v in before_cols.items():
        assert np.array_equal(v, r.trace.columns[k], equal_nan=True)
    assert [(x.metric, x.analytical, x.simulated) for x in a.rows] == [(x.metric, x.analytical, x.simulated) for x in b.rows]


def test_compare_desk_scenario_passes(tmp_path):
    r = _desk_run(horizon=40_000)
    rep = compare(make_scenario(), r)
    assert rep.passed, [(x.metric, x.rel_error) for x in rep.failures()]
    assert rep.bottleneck == "execute"
    path = tmp_path / "c.csv"
    rep.write_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["metric", "analytical", "simulated", "rel_error", "pass"]
    assert {row[4] for row in rows[1:]} == {"yes"}
    assert rep["end_to_end.total"].analytical == pytest.approx(
        sum(rep[f"{p}.total"].analytical for p in ("execute", "order", "validate"))
    )


def test_compare_saturated_scenario_unstable():
    s = make_scenario(execute={"cores": 1})
    r = checked_run(SimConfig(s, seed=33, horizon=4000))
    rep = compare(s, r)
    assert rep.unstable
    assert rep.passed is None
    assert rep.bottleneck == "execute"
    assert all(row.passed is None and math.isnan(row.analytical) for row in rep.rows)


def test_compare_zero_load_limits():
    s = make_scenario(
        workload={"clients": 1, "rate_per_client": 0.5},
        order={"batch_size": 1},
    )
    r = checked_run(SimConfig(s, seed=34, horizon=2000))
    rep = compare(s, r)
    for metric in ("execute.comm", "order.comm", "validate.comm", "order.c2l", "order.l2f"):
        assert rep[metric].rel_error < 0.02, metric
    mu_v = s.validate.mu_v
    assert rep["validate.total"].simulated == pytest.approx(0.010 + 1 / mu_v, rel=0.05)
