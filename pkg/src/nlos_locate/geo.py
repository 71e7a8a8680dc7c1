"""Geometry primitives, the range measurement model and the seeded noise model.

Stations are handled as ``(N, 2)`` float arrays and range / NLOS vectors as
length-``N`` float arrays; the index of a station is its row. Single positions
are :class:`Point2` values. Everything is in meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Point2:
    """A finite 2-D position in meters."""

    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"Point2 coordinates must be finite, got ({self.x}, {self.y})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __iter__(self):
        yield self.x
        yield self.y

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y], dtype=dtype or float)

    @classmethod
    def of(cls, value) -> "Point2":
        """Coerce a ``Point2`` or any length-2 sequence / array."""
        if isinstance(value, cls):
            return value
        x, y = np.asarray(value, dtype=float).reshape(2)
        return cls(x, y)

    def distance_to(self, other) -> float:
        other = Point2.of(other)
        return math.hypot(self.x - other.x, self.y - other.y)


def as_stations(stations, min_count: int = 1) -> np.ndarray:
    """Validate station coordinates and return them as an ``(N, 2)`` array."""
    arr = np.array([tuple(p) for p in stations] if not isinstance(stations, np.ndarray) else stations,
                   dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"stations must have shape (N, 2), got {arr.shape}")
    if arr.shape[0] < min_count:
        raise ValueError(f"need at least {min_count} stations, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("station coordinates must be finite")
    return arr


def as_vector(values, n: int, name: str = "ranges") -> np.ndarray:
    """Validate a per-station vector of length ``n``."""
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have length {n} to match the stations, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def true_range(bs, ms) -> float:
    """Euclidean distance between a station and the mobile, in meters."""
    return Point2.of(bs).distance_to(ms)


def true_ranges(stations, ms) -> np.ndarray:
    """Vector of exact ranges from every station to ``ms``."""
    stations = as_stations(stations)
    return np.hypot(*(stations - np.asarray(Point2.of(ms))).T)


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian range noise, identical across stations.

    Every sample is keyed by ``(seed, trial_index, station_index)`` so a draw
    never depends on how many other samples were taken before it.
    """

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def standard_normal(self, trial_index: int, station_index: int) -> float:
        ss = np.random.SeedSequence([int(self.seed), int(trial_index), int(station_index)])
        return float(np.random.default_rng(ss).standard_normal())

    def sample(self, trial_index: int, n_stations: int) -> np.ndarray:
        """Noise for stations ``0..n_stations-1`` in one trial."""
        if self.sigma == 0:
            return np.zeros(n_stations)
        z = np.array([self.standard_normal(trial_index, i) for i in range(n_stations)])
        return self.sigma * z


def measure_ranges(stations, ms, nl, noise: NoiseModel, trial_index: int = 0) -> np.ndarray:
    """Simulated measured ranges ``|bs_i - ms| + n_i + NL_i``, clamped at 0.

    Args:
        stations: ``(N, 2)`` station coordinates.
        ms: true mobile position.
        nl: non-negative NLOS bias per station.
        noise: noise model; its draws are keyed by ``trial_index``.
        trial_index: Monte-Carlo trial number.
    """
    stations = as_stations(stations)
    n = stations.shape[0]
    nl = as_vector(nl, n, "nl")
    if np.any(nl < 0):
        raise ValueError("NLOS biases must be non-negative")
    r = true_ranges(stations, ms) + noise.sample(trial_index, n) + nl
    return np.maximum(r, 0.0)
