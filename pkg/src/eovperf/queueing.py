"""Mean-value queueing formulas: utilization, Erlang C, M/D/c and Kingman.

All rates are in transactions per second and all returned waits in seconds.
Only expected queue waits are modeled (no distributions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateLoad, UnstableQueue


@dataclass(frozen=True)
class QueueLoad:
    """Arrival rate ``lam``, per-server service rate ``mu`` and ``c`` servers."""

    lam: float
    mu: float
    c: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"arrival rate must be finite and > 0, got {self.lam!r}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"service rate must be finite and > 0, got {self.mu!r}")
        if int(self.c) != self.c or self.c < 1:
            raise ValueError(f"server count must be a positive integer, got {self.c!r}")

    @property
    def rho(self) -> float:
        return utilization(self)


@dataclass(frozen=True)
class VariationPair:
    """Coefficients of variation of inter-arrival and service times."""

    cv_a: float = 1.0
    cv_s: float = 1.0

    def __post_init__(self):
        for name in ("cv_a", "cv_s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")


def utilization(load: QueueLoad) -> float:
    return load.lam / (load.c * load.mu)


def _require_stable(load: QueueLoad) -> float:
    rho = utilization(load)
    if rho >= 1.0:
        raise UnstableQueue(f"utilization {rho:.6g} >= 1 (lam={load.lam}, c*mu={load.c * load.mu})")
    return rho


def erlang_c(c: int, a: float) -> float:
    """Probability of waiting in an M/M/c queue with offered load ``a = lam/mu``.

    Built from the Erlang B recursion B(n) = a B(n-1) / (n + a B(n-1)), which
    never forms a factorial or a power of ``a`` and so is safe for large c.
    """
    b = 1.0
    for n in range(1, c + 1):
        b = a * b / (n + a * b)
    return c * b / (c - a * (1.0 - b))


def erlang_c_wait(load: QueueLoad) -> float:
    """Mean queue wait of an M/M/c queue."""
    _require_stable(load)
    a = load.lam / load.mu
    return erlang_c(load.c, a) / (load.c * load.mu - load.lam)


def cosmetatos_f(c: int) -> float:
    """Server-count term of the M/D/c correction; zero for a single server."""
    return (c - 1) * (math.sqrt(4 + 5 * c) - 2) / (16 * c)


def cosmetatos_g(rho: float) -> float:
    if rho == 0:
        raise DegenerateLoad("g(rho) = (1 - rho)/rho is singular at rho = 0")
    return (1 - rho) / rho


def mdc_correction(c: int, rho: float) -> float:
    """Ratio of the M/D/c mean wait to the M/M/c mean wait."""
    return 0.5 * (1 + cosmetatos_f(c) * cosmetatos_g(rho))


def mdc_wait(load: QueueLoad) -> float:
    """Approximate mean queue wait of an M/D/c queue.

    Scales the Erlang C wait by 1/2 (1 + f(c) g(rho)). For c = 1 this is the
    exact Pollaczek-Khinchine M/D/1 wait.
    """
    rho = _require_stable(load)
    wq = erlang_c_wait(load)
    if wq == 0.0:
        # Erlang C underflowed at vanishing load; the corrected wait is 0 as well.
        return 0.0
    return mdc_correction(load.c, rho) * wq


def kingman_wait(load: QueueLoad, var: VariationPair) -> float:
    """Kingman's G/G/1 mean queue wait approximation."""
    if load.c != 1:
        raise ValueError(f"Kingman's formula is for a single server, got c={load.c}")
    rho = _require_stable(load)
    return (rho / (1 - rho)) * ((var.cv_a**2 + var.cv_s**2) / 2) / load.mu
