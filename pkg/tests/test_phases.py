from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eovperf.comm import LinkParams
from eovperf.errors import UnstableQueue
from eovperf.phases import (
    DiskParams,
    ExecuteParams,
    OrderParams,
    ValidateParams,
    execute_latency,
    execute_throughput,
    order_idle_time,
    order_latency,
    order_throughput,
    pipeline_predict,
    validate_latency,
    validate_service_rate,
)
from eovperf.queueing import VariationPair
from factories import make_scenario

M = 3 * 8192
KB = 8192
NET = LinkParams(0.010, 1e10)


def order_params(**kw):
    base = dict(
        k=3,
        mu_order=1000.0,
        link_c2l=NET,
        link_l2f=NET,
        batch_timeout=1.0,
        batch_size=20,
        m=M,
        var=VariationPair(1, 1),
    )
    base.update(kw)
    return OrderParams(**base)


# execute ---------------------------------------------------------------------


def test_execute_throughput_flow_conservation():
    p = ExecuteParams(4, 100.0, NET, M)
    assert execute_throughput(p, 150) == pytest.approx(150)


def test_execute_throughput_doubles_with_cores_at_fixed_rho():
    p1 = ExecuteParams(1, 100.0, NET, M)
    p2 = ExecuteParams(2, 100.0, NET, M)
    rho = 0.6
    assert execute_throughput(p2, rho * 200) == pytest.approx(2 * execute_throughput(p1, rho * 100))


def test_execute_throughput_unstable():
    with pytest.raises(UnstableQueue) as exc:
        execute_throughput(ExecuteParams(1, 100.0, NET, M), 100)
    assert exc.value.stage == "execute"


def test_execute_latency_zero_load():
    b = execute_latency(ExecuteParams(4, 100.0, LinkParams(0.010, 1e9), M), 1e-9)
    assert b.total == pytest.approx(0.030, rel=1e-6)


def test_execute_latency_md1():
    b = execute_latency(ExecuteParams(1, 1.0, LinkParams(0.0, 1e18), M), 0.5)
    assert b.total == pytest.approx(1.5, rel=1e-9)
    assert b.service == 1.0
    assert b.queueing == pytest.approx(0.5, rel=1e-12)


@given(st.integers(1, 32), st.floats(1, 1e4), st.floats(0.01, 0.99))
def test_execute_breakdown_sums(c, mu, rho):
    b = execute_latency(ExecuteParams(c, mu, NET, M), rho * c * mu)
    assert min(b.comm, b.service, b.queueing, b.idle) >= 0
    assert b.total == b.comm + b.service + b.queueing + b.idle


@given(st.integers(1, 64), st.floats(1, 1e4), st.floats(0.01, 0.99))
def test_execute_throughput_linear_in_cores(c, mu, rho):
    one = execute_throughput(ExecuteParams(1, mu, NET, M), rho * mu)
    assert execute_throughput(ExecuteParams(c, mu, NET, M), rho * c * mu) == pytest.approx(c * one, rel=1e-12)


# order -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "timeout, size, lam, expected",
    [(1.0, 20, 100, 0.1), (1.0, 1000, 100, 0.5), (1.0, 1, 100, 0.005), (1.0, 1, 0.1, 0.5)],
)
def test_order_idle_time(timeout, size, lam, expected):
    p = order_params(batch_timeout=timeout, batch_size=size)
    assert order_idle_time(p, lam) == pytest.approx(expected, rel=1e-12)


@given(st.floats(1e-3, 1e5), st.floats(1e-3, 10), st.integers(1, 500))
def test_order_idle_time_capped(lam, timeout, size):
    p = order_params(batch_timeout=timeout, batch_size=size)
    assert 0 < order_idle_time(p, lam) <= timeout / 2


def test_order_idle_time_continuous_at_branch_switch():
    p = order_params(batch_timeout=1.0, batch_size=20)
    # Branches meet where batch_size / lam == timeout, i.e. lam = 20.
    lo = order_idle_time(p, 20 * (1 - 1e-9))
    hi = order_idle_time(p, 20 * (1 + 1e-9))
    assert abs(lo - hi) < 1e-8


def test_order_comm_difference_between_k():
    lam = 300.0
    l2f = LinkParams(0.010, 1e8)
    b3 = order_latency(order_params(k=3, link_l2f=l2f), lam)
    b15 = order_latency(order_params(k=15, link_l2f=l2f), lam)
    assert b15.comm - b3.comm == pytest.approx(12 * M * lam / 1e8, rel=1e-9)


@given(st.sampled_from([1, 3, 5, 7, 9, 11, 13, 15, 21]), st.floats(1, 900))
def test_order_comm_affine_in_followers(k, lam):
    l2f = LinkParams(0.010, 1e9)
    b = order_latency(order_params(k=k, link_l2f=l2f), lam)
    c2l = 0.010 + M * lam / 1e10
    expected = c2l + (0.010 + (k - 1) * M * lam / 1e9 if k > 1 else 0.0)
    assert b.comm == pytest.approx(expected, rel=1e-12)


def test_order_latency_zero_load_limits():
    b = order_latency(order_params(batch_timeout=1.0), 1e-9)
    assert b.comm == pytest.approx(0.020, rel=1e-6)
    assert b.idle == pytest.approx(0.5)
    assert b.queueing == pytest.approx(0, abs=1e-12)


def test_order_queueing_mm1_oracle():
    b = order_latency(order_params(var=VariationPair(1, 1)), 500.0)
    assert b.queueing == pytest.approx(0.001, rel=1e-12)


def test_order_throughput_independent_of_k():
    for k in (3, 9, 15):
        assert order_throughput(order_params(k=k), 600) == pytest.approx(600)
    with pytest.raises(UnstableQueue):
        order_throughput(order_params(), 1000)
    assert order_throughput(order_params(), 1e-12) == pytest.approx(0, abs=1e-9)


def test_order_params_reject_even_k():
    with pytest.raises(ValueError, match="odd"):
        order_params(k=4)


# validate --------------------------------------------------------------------


def test_validate_service_rate_ssd():
    d = DiskParams("ssd", iops=200, d=150 * KB)
    assert validate_service_rate(d, 3 * KB) == pytest.approx(10000)


def test_validate_service_rate_hdd():
    d = DiskParams("hdd", iops=125, d=150 * KB, seek=0.008)
    assert d.r_disk == pytest.approx(62.5)
    assert validate_service_rate(d, 3 * KB) == pytest.approx(62.5 * 50)


def test_validate_service_rate_linear_in_d():
    a = DiskParams("ssd", iops=300, d=10 * KB)
    b = DiskParams("ssd", iops=300, d=20 * KB)
    assert validate_service_rate(b, M) == pytest.approx(2 * validate_service_rate(a, M))


@given(st.floats(1, 1e5), st.floats(1e-6, 0.05), st.floats(1e3, 1e7))
def test_ssd_beats_hdd_at_equal_iops(iops, seek, d):
    ssd = DiskParams("ssd", iops, d)
    hdd = DiskParams("hdd", iops, d, seek)
    assert validate_service_rate(ssd, M) > validate_service_rate(hdd, M)


def test_ssd_with_seek_rejected():
    with pytest.raises(ValueError):
        DiskParams("ssd", 100, M, seek=0.001)


def test_validate_latency():
    p = ValidateParams(link=NET, m=M, mu=1000.0, var=VariationPair(1, 1))
    zero = validate_latency(p, 1e-9)
    assert zero.total == pytest.approx(0.010 + 1 / 1000, rel=1e-6)
    half = validate_latency(p, 500)
    assert half.queueing == pytest.approx(1 / 1000, rel=1e-12)
    assert half.total == half.comm + half.service + half.queueing + half.idle


# pipeline --------------------------------------------------------------------


def test_pipeline_flow_conservation_and_total():
    s = make_scenario()
    pred = pipeline_predict(s)
    for p in ("execute", "order", "validate"):
        assert pred.throughput[p] == pytest.approx(s.offered_load)
    assert pred.total == pytest.approx(sum(b.total for b in pred.breakdown.values()))


def test_pipeline_names_validate_bottleneck():
    s = make_scenario(validate={"disk": "ssd", "iops": 1, "write_per_io_kb": 3})
    with pytest.raises(UnstableQueue) as exc:
        pipeline_predict(s)
    assert exc.value.stage == "validate"


def test_pipeline_names_execute_bottleneck():
    s = make_scenario(execute={"cores": 1})
    with pytest.raises(UnstableQueue) as exc:
        pipeline_predict(s)
    assert exc.value.stage == "execute"


def test_stability_margin_refuses_near_saturation():
    s = make_scenario(workload={"clients": 1, "rate_per_client": 399.7})
    with pytest.raises(UnstableQueue):
        pipeline_predict(s)


def test_pipeline_per_message_variant():
    s = make_scenario()
    loaded = pipeline_predict(s)
    conventional = pipeline_predict(replace(s, comm_variant="per_message"))
    assert conventional.breakdown["execute"].comm == pytest.approx(2 * (0.010 + M / 1e10))
    assert loaded.breakdown["execute"].comm != conventional.breakdown["execute"].comm
