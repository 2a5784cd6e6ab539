"""Alpha-beta communication latency.

The load-dependent form used throughout is ``alpha + fanout * m * lam / beta``:
the bandwidth term scales with the aggregate message rate, so expected latency
grows with offered load. ``variant="per_message"`` switches to the conventional
``alpha + fanout * m / beta`` for sensitivity studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import FanoutNotSupported

LOAD = "load"
PER_MESSAGE = "per_message"
VARIANTS = (LOAD, PER_MESSAGE)


@dataclass(frozen=True)
class LinkParams:
    """Constant overhead ``alpha`` (s), bandwidth ``beta`` (bit/s), receiver count."""

    alpha: float
    beta: float
    fanout: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not (self.beta > 0) or math.isnan(self.beta):
            raise ValueError(f"beta must be > 0, got {self.beta!r}")
        if int(self.fanout) != self.fanout or self.fanout < 1:
            raise ValueError(f"fanout must be a positive integer, got {self.fanout!r}")


@dataclass(frozen=True)
class MessageLoad:
    """Message size ``m`` in bits and message rate ``lam`` per second."""

    m: float
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0):
            raise ValueError(f"message size must be finite and > 0, got {self.m!r}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"message rate must be finite and > 0, got {self.lam!r}")


def link_latency(link: LinkParams, load: MessageLoad, variant: str = LOAD) -> float:
    if variant == LOAD:
        return link.alpha + link.fanout * load.m * load.lam / link.beta
    if variant == PER_MESSAGE:
        return link.alpha + link.fanout * load.m / link.beta
    raise ValueError(f"unknown communication variant {variant!r}; expected one of {VARIANTS}")


def round_trip_latency(
    link: LinkParams,
    load: MessageLoad,
    back: LinkParams | None = None,
    variant: str = LOAD,
) -> float:
    """Request plus reply latency over a point-to-point link.

    Both directions share ``link`` unless ``back`` overrides the reply path.
    """
    if link.fanout > 1 or (back is not None and back.fanout > 1):
        raise FanoutNotSupported("round trips are point-to-point (fanout must be 1)")
    if back is None:
        return 2 * link_latency(link, load, variant)
    return link_latency(link, load, variant) + link_latency(back, load, variant)
