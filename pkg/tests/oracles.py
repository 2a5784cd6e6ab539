"""Brute-force references, independent of the package under test."""

import heapq
import math

import numpy as np


def fcfs_multiserver_waits(arrivals, services, c):
    """Queue waits of a FCFS queue with c identical servers (Kiefer-Wolfowitz)."""
    free = [0.0] * c
    waits = np.empty(len(arrivals))
    for i, (t, s) in enumerate(zip(arrivals, services)):
        f = heapq.heappop(free)
        start = t if t > f else f
        waits[i] = start - t
        heapq.heappush(free, start + s)
    return waits


def poisson_arrivals(lam, n, seed):
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.exponential(1.0 / lam, n)).tolist()


def mmc_wait_factorial(lam, mu, c):
    """Textbook M/M/c mean queue wait via P0 and factorials."""
    a = lam / mu
    rho = a / c
    tail = a**c / math.factorial(c) / (1 - rho)
    p0 = 1.0 / (sum(a**n / math.factorial(n) for n in range(c)) + tail)
    return tail * p0 / (c * mu - lam)


def md1_pk_wait(lam, mu):
    """Pollaczek-Khinchine mean wait for M/D/1."""
    rho = lam / mu
    return rho / (2 * mu * (1 - rho))
