"""Future-event list keyed by (time, insertion sequence)."""

from __future__ import annotations

import heapq
import math
from typing import Any, Callable


class EventQueue:
    """Min-heap of pending events. Equal times fire in scheduling order."""

    def __init__(self):
        self._heap: list = []
        self._seq = 0
        self.now = 0.0

    def __len__(self):
        return len(self._heap)

    def schedule(self, time: float, handler: Callable[[Any], None], arg: Any = None) -> None:
        if time < self.now:
            raise ValueError(f"cannot schedule into the past ({time} < {self.now})")
        heapq.heappush(self._heap, (time, self._seq, handler, arg))
        self._seq += 1

    def run(self, until: float = math.inf) -> None:
        heap = self._heap
        pop = heapq.heappop
        while heap:
            if heap[0][0] > until:
                self.now = until
                return
            time, _, handler, arg = pop(heap)
            self.now = time
            handler(arg)
