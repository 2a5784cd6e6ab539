"""Poisson client workload."""

from __future__ import annotations

import heapq

import numpy as np

from .streams import CLIENT, exponential


class ClientStream:
    """Arrival times of one client: exponential gaps with mean ``1/rate``."""

    def __init__(self, seed: int, client_id: int, rate: float):
        if not rate > 0:
            raise ValueError(f"client rate must be > 0, got {rate!r}")
        self.client_id = client_id
        self._gap = exponential(seed, (CLIENT, client_id), 1.0 / rate)
        self.next_time = self._gap()

    def advance(self) -> float:
        """Return the pending arrival time and draw the following one."""
        t = self.next_time
        self.next_time = t + self._gap()
        return t


def generate_workload(
    clients: int,
    per_client_rate: float,
    seed: int,
    n: int | None = None,
    until: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Merged arrival stream of ``clients`` independent Poisson clients.

    Stops after ``n`` arrivals or at time ``until``, whichever comes first.
    Returns (arrival times, client ids), sorted by time.
    """
    if clients < 1:
        raise ValueError("need at least one client")
    if n is None and until is None:
        raise ValueError("give a count n or a time horizon until")
    streams = [ClientStream(seed, i, per_client_rate) for i in range(clients)]
    heap = [(s.next_time, s.client_id) for s in streams]
    heapq.heapify(heap)
    times, ids = [], []
    limit = n if n is not None else float("inf")
    horizon = until if until is not None else float("inf")
    while len(times) < limit:
        t, cid = heap[0]
        if t > horizon:
            break
        streams[cid].advance()
        heapq.heapreplace(heap, (streams[cid].next_time, cid))
        times.append(t)
        ids.append(cid)
    return np.asarray(times), np.asarray(ids, dtype=np.int64)
