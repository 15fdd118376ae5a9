"""Deterministic Swiss-roll generator.

Random numbers come from SplitMix64 so the output is reproducible byte for
byte across platforms and languages:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

all arithmetic modulo 2**64, starting from ``state = seed``. A uniform draw
on [0, 1) is ``(z >> 11) * 2**-53``. Each point consumes two draws, ``u``
then ``v``, and maps to

    t = 1.5*pi*(1 + 2u),  point = (t cos t, 21 v, t sin t),  intrinsic = (t, 21 v).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_MASK = (1 << 64) - 1
HEIGHT = 21.0


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class SwissRoll:
    points: np.ndarray  # (n, 3)
    intrinsic: np.ndarray  # (n, 2): (t, height)
    seed: int


def roll_coordinates(u, v):
    """Map unit-square samples to (ambient point, intrinsic coordinates)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    t = 1.5 * math.pi * (1.0 + 2.0 * u)
    h = HEIGHT * v
    points = np.stack([t * np.cos(t), h, t * np.sin(t)], axis=-1)
    intrinsic = np.stack([t, h], axis=-1)
    return points, intrinsic


def swiss_roll(n: int, seed: int = 0) -> SwissRoll:
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = SplitMix64(seed)
    uv = np.array([(rng.uniform(), rng.uniform()) for _ in range(n)])
    points, intrinsic = roll_coordinates(uv[:, 0], uv[:, 1])
    return SwissRoll(points=points, intrinsic=intrinsic, seed=seed)
