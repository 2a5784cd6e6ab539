"""Per-message realization of the alpha-beta link model.

A channel measures the bit rate it has carried over a trailing window and
charges each message ``alpha + fanout * bit_rate / beta``. At a steady
transaction rate ``lam`` with ``m``-bit messages the bit rate is ``m * lam``,
so the long-run mean delay equals ``comm.link_latency``. The message being
sent is not counted in its own rate estimate.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..comm import LOAD, PER_MESSAGE, LinkParams


def communication_delay(
    link: LinkParams,
    size: float,
    bit_rate: float,
    rng: np.random.Generator | None = None,
    variant: str = LOAD,
) -> float:
    """One message delay on ``link``.

    ``bit_rate`` is the measured load on the link. Without ``rng`` the delay
    is its mean; with ``rng`` the bandwidth term is exponentially jittered
    around the same mean while ``alpha`` stays fixed.
    """
    if variant == LOAD:
        load_term = link.fanout * bit_rate / link.beta
    elif variant == PER_MESSAGE:
        load_term = link.fanout * size / link.beta
    else:
        raise ValueError(f"unknown communication variant {variant!r}")
    if rng is not None and load_term > 0:
        load_term = rng.exponential(load_term)
    return link.alpha + load_term


class Channel:
    def __init__(
        self,
        link: LinkParams,
        window: float = 1.0,
        variant: str = LOAD,
        rng: np.random.Generator | None = None,
    ):
        if not window > 0:
            raise ValueError("rate window must be > 0")
        self.link = link
        self.window = window
        self.variant = variant
        self.rng = rng
        self._times: deque[float] = deque()
        self._sizes: deque[float] = deque()
        self._bits = 0.0
        self.sent = 0
        self.total_delay = 0.0

    def bit_rate(self, now: float) -> float:
        cutoff = now - self.window
        times, sizes = self._times, self._sizes
        while times and times[0] <= cutoff:
            times.popleft()
            self._bits -= sizes.popleft()
        if not times:
            self._bits = 0.0
        return self._bits / self.window

    def _record(self, now: float, size: float) -> None:
        self._times.append(now)
        self._sizes.append(size)
        self._bits += size

    def send(self, now: float, size: float) -> float:
        """Delay for a ``size``-bit message sent at ``now``."""
        rate = self.bit_rate(now)
        delay = communication_delay(self.link, size, rate, self.rng, self.variant)
        self._record(now, size)
        self.sent += 1
        self.total_delay += delay
        return delay

    def broadcast(self, now: float, size: float, receivers: int, acks: int) -> float:
        """Time until ``acks`` of ``receivers`` copies have arrived (0 if ``acks`` is 0).

        The link's fanout should equal ``receivers``: every copy shares the
        sender's bandwidth.
        """
        rate = self.bit_rate(now)
        self._record(now, size)
        self.sent += 1
        if acks == 0:
            return 0.0
        if self.rng is None:
            delay = communication_delay(self.link, size, rate, None, self.variant)
        else:
            delays = sorted(communication_delay(self.link, size, rate, self.rng, self.variant) for _ in range(receivers))
            delay = delays[acks - 1]
        self.total_delay += delay
        return delay
