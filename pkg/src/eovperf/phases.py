"""Analytical throughput and latency models of the execute, order and validate phases.

The execute phase is an M/D/c endorsing peer, the order phase a G/G/1 leader
followed by the block cutter, and the validate phase a G/G/1 committing peer
whose service rate comes from disk IO. Phases are composed in series: each
phase's throughput is the next phase's arrival rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from .comm import LOAD, LinkParams, MessageLoad, link_latency, round_trip_latency
from .errors import UnstableQueue
from .queueing import QueueLoad, VariationPair, kingman_wait, mdc_wait

if TYPE_CHECKING:
    from .scenario import ScenarioConfig

# Predictions are refused, not clamped, at or above this utilization.
STABILITY_MARGIN = 0.999

PHASES = ("execute", "order", "validate")


@dataclass(frozen=True)
class ExecuteParams:
    """Endorsing peer with ``c`` cores each serving ``mu_core`` tx/s."""

    c: int
    mu_core: float
    link: LinkParams
    m: float
    link_back: LinkParams | None = None

    def __post_init__(self):
        if int(self.c) != self.c or self.c < 1:
            raise ValueError(f"core count must be a positive integer, got {self.c!r}")
        if not self.mu_core > 0:
            raise ValueError(f"mu_core must be > 0, got {self.mu_core!r}")
        if not self.m > 0:
            raise ValueError(f"transaction size must be > 0, got {self.m!r}")


@dataclass(frozen=True)
class OrderParams:
    """Raft ordering service with ``k`` OSNs and a block cutter.

    The fanout of ``link_l2f`` is ignored; the leader always broadcasts to
    ``k - 1`` followers.
    """

    k: int
    mu_order: float
    link_c2l: LinkParams
    link_l2f: LinkParams
    batch_timeout: float
    batch_size: int
    m: float
    var: VariationPair = field(default_factory=VariationPair)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be odd and >= 1, got {self.k!r}")
        if not self.mu_order > 0:
            raise ValueError(f"mu_order must be > 0, got {self.mu_order!r}")
        if not self.batch_timeout > 0:
            raise ValueError(f"batch_timeout must be > 0, got {self.batch_timeout!r}")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError(f"batch_size must be a positive integer, got {self.batch_size!r}")
        if not self.m > 0:
            raise ValueError(f"transaction size must be > 0, got {self.m!r}")

    @property
    def followers(self) -> int:
        return self.k - 1

    @property
    def quorum_acks(self) -> int:
        """Follower acknowledgments needed for a majority (the leader votes too)."""
        return math.ceil((self.k + 1) / 2) - 1


HDD = "hdd"
SSD = "ssd"


@dataclass(frozen=True)
class DiskParams:
    """Committer disk. ``seek`` in seconds (HDD only), ``d`` in bits written per IO."""

    kind: str
    iops: float
    d: float
    seek: float = 0.0

    def __post_init__(self):
        if self.kind not in (HDD, SSD):
            raise ValueError(f"disk kind must be 'hdd' or 'ssd', got {self.kind!r}")
        if not self.iops > 0:
            raise ValueError(f"iops must be > 0, got {self.iops!r}")
        if not self.d > 0:
            raise ValueError(f"bits per IO must be > 0, got {self.d!r}")
        if not self.seek >= 0:
            raise ValueError(f"seek must be >= 0, got {self.seek!r}")
        if self.kind == SSD and self.seek != 0:
            raise ValueError("an SSD has no seek latency")

    @property
    def r_disk(self) -> float:
        """IOs per second."""
        if self.kind == HDD:
            return 1.0 / (self.seek + 1.0 / self.iops)
        return self.iops


@dataclass(frozen=True)
class ValidateParams:
    """Committing peer. ``mu`` overrides the disk-derived service rate when set."""

    link: LinkParams
    m: float
    disk: DiskParams | None = None
    var: VariationPair = field(default_factory=VariationPair)
    mu: float | None = None

    def __post_init__(self):
        if self.disk is None and self.mu is None:
            raise ValueError("validate phase needs either disk parameters or a service rate")
        if self.mu is not None and not self.mu > 0:
            raise ValueError(f"validate service rate must be > 0, got {self.mu!r}")
        if not self.m > 0:
            raise ValueError(f"transaction size must be > 0, got {self.m!r}")

    @property
    def mu_v(self) -> float:
        if self.mu is not None:
            return self.mu
        return validate_service_rate(self.disk, self.m)


@dataclass(frozen=True)
class LatencyBreakdown:
    """Expected per-transaction latency of one phase, in seconds."""

    comm: float
    service: float
    queueing: float
    idle: float = 0.0
    detail: dict = field(default_factory=dict, compare=False)

    @property
    def total(self) -> float:
        return self.comm + self.service + self.queueing + self.idle

    def as_dict(self) -> dict:
        return {
            "comm": self.comm,
            "service": self.service,
            "queueing": self.queueing,
            "idle": self.idle,
            "total": self.total,
        }


def _check_margin(rho: float, stage: str) -> None:
    if rho >= STABILITY_MARGIN:
        raise UnstableQueue(
            f"{stage} phase is unstable: utilization {rho:.6g} >= {STABILITY_MARGIN}", stage=stage
        )


def execute_throughput(p: ExecuteParams, lambda_e: float) -> float:
    rho = lambda_e / (p.c * p.mu_core)
    _check_margin(rho, "execute")
    per_core = p.mu_core * rho
    return p.c * per_core


def execute_latency(p: ExecuteParams, lambda_e: float, variant: str = LOAD) -> LatencyBreakdown:
    load = QueueLoad(lambda_e, p.mu_core, p.c)
    _check_margin(load.rho, "execute")
    comm = round_trip_latency(p.link, MessageLoad(p.m, lambda_e), back=p.link_back, variant=variant)
    return LatencyBreakdown(comm=comm, service=1.0 / p.mu_core, queueing=mdc_wait(load))


def order_idle_time(p: OrderParams, lambda_r: float) -> float:
    """Expected block-cutter wait: half the shorter of the timeout and the fill time."""
    fill_time = p.batch_size / lambda_r
    return min(p.batch_timeout / 2, fill_time / 2)


def order_throughput(p: OrderParams, lambda_r: float) -> float:
    rho = lambda_r / p.mu_order
    _check_margin(rho, "order")
    return p.mu_order * rho


def order_latency(p: OrderParams, lambda_r: float, variant: str = LOAD) -> LatencyBreakdown:
    load = QueueLoad(lambda_r, p.mu_order, 1)
    _check_margin(load.rho, "order")
    msg = MessageLoad(p.m, lambda_r)
    c2l = link_latency(p.link_c2l, msg, variant)
    if p.followers:
        l2f = link_latency(replace(p.link_l2f, fanout=p.followers), msg, variant)
    else:
        l2f = 0.0
    return LatencyBreakdown(
        comm=c2l + l2f,
        service=1.0 / p.mu_order,
        queueing=kingman_wait(load, p.var),
        idle=order_idle_time(p, lambda_r),
        detail={"c2l": c2l, "l2f": l2f},
    )


def validate_service_rate(d: DiskParams, m: float) -> float:
    """Transactions per second the committer's disk sustains: R_disk * d / m."""
    return d.r_disk * d.d / m


def validate_throughput(p: ValidateParams, lambda_v: float) -> float:
    mu = p.mu_v
    rho = lambda_v / mu
    _check_margin(rho, "validate")
    return mu * rho


def validate_latency(p: ValidateParams, lambda_v: float, variant: str = LOAD) -> LatencyBreakdown:
    load = QueueLoad(lambda_v, p.mu_v, 1)
    _check_margin(load.rho, "validate")
    return LatencyBreakdown(
        comm=link_latency(p.link, MessageLoad(p.m, lambda_v), variant),
        service=1.0 / load.mu,
        queueing=kingman_wait(load, p.var),
    )


@dataclass(frozen=True)
class PipelinePrediction:
    arrival: dict[str, float]
    utilization: dict[str, float]
    throughput: dict[str, float]
    breakdown: dict[str, LatencyBreakdown]

    @property
    def total(self) -> float:
        return sum(self.breakdown[p].total for p in PHASES)


def utilizations(scenario: ScenarioConfig) -> dict[str, float]:
    """Per-phase utilization when every phase sees the offered load."""
    lam = scenario.offered_load
    return {
        "execute": lam / (scenario.execute.c * scenario.execute.mu_core),
        "order": lam / scenario.order.mu_order,
        "validate": lam / scenario.validate.mu_v,
    }


def bottleneck(scenario: ScenarioConfig) -> str:
    rho = utilizations(scenario)
    return max(PHASES, key=lambda p: rho[p])


def pipeline_predict(scenario: ScenarioConfig) -> PipelinePrediction:
    """Propagate the offered load through the three phases in series.

    Raises UnstableQueue tagged with the first phase that saturates.
    """
    variant = scenario.comm_variant
    lam_e = scenario.offered_load
    psi_e = execute_throughput(scenario.execute, lam_e)
    lam_r = psi_e
    psi_r = order_throughput(scenario.order, lam_r)
    lam_v = psi_r
    psi_v = validate_throughput(scenario.validate, lam_v)
    return PipelinePrediction(
        arrival={"execute": lam_e, "order": lam_r, "validate": lam_v},
        utilization={
            "execute": lam_e / (scenario.execute.c * scenario.execute.mu_core),
            "order": lam_r / scenario.order.mu_order,
            "validate": lam_v / scenario.validate.mu_v,
        },
        throughput={"execute": psi_e, "order": psi_r, "validate": psi_v},
        breakdown={
            "execute": execute_latency(scenario.execute, lam_e, variant),
            "order": order_latency(scenario.order, lam_r, variant),
            "validate": validate_latency(scenario.validate, lam_v, variant),
        },
    )
