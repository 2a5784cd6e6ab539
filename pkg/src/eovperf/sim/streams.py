"""Independent random streams derived from one master seed.

Each consumer gets its own PCG64 generator keyed by a spawn key, so adding a
client or a stage never shifts the numbers any other consumer sees.
"""

from __future__ import annotations

import numpy as np

CLIENT = 0
SEQUENCER = 1
CHANNEL = 2

_CHUNK = 4096


def generator(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


class Draws:
    """Scalar draws from ``sample(gen, n)``, generated in fixed-size chunks."""

    def __init__(self, gen: np.random.Generator, sample, chunk: int = _CHUNK):
        self._gen = gen
        self._sample = sample
        self._chunk = chunk
        self._buf: list[float] = []
        self._i = 0

    def __call__(self) -> float:
        if self._i == len(self._buf):
            self._buf = self._sample(self._gen, self._chunk).tolist()
            self._i = 0
        x = self._buf[self._i]
        self._i += 1
        return x


def exponential(seed: int, key: tuple, mean: float) -> Draws:
    return Draws(generator(seed, *key), lambda g, n: g.exponential(mean, n))


def gamma_with_cv(seed: int, key: tuple, mean: float, cv: float) -> Draws:
    """Gamma draws with the given mean and coefficient of variation (cv > 0)."""
    shape = 1.0 / cv**2
    scale = mean / shape
    return Draws(generator(seed, *key), lambda g, n: g.gamma(shape, scale, n))
