"""Comparison estimators: min-max bounding box and residual weighting (RWGH)."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from nlos_locate.errors import EstimationError
from nlos_locate.geo import Point2, as_stations, as_vector
from nlos_locate.taylor import TaylorConfig, solve_batch

# Normalized residuals at or below this count as an exact fit.
ZERO_RESIDUAL = 1e-12


@dataclass(frozen=True)
class CombinationEstimate:
    station_indices: tuple[int, ...]
    estimate: Point2
    residual: float

    @property
    def normalized_residual(self) -> float:
        return self.residual / len(self.station_indices)


def bounding_box_estimate(stations, ranges) -> Point2:
    """Center of the intersection of the per-station range squares.

    Each station bounds the mobile to ``[x_i - r_i, x_i + r_i]`` per axis.
    When the bounds cross (empty intersection) the midpoint of the crossed
    bounds is still returned.
    """
    stations = as_stations(stations)
    ranges = as_vector(ranges, stations.shape[0])
    if np.any(ranges < 0):
        raise ValueError("ranges must be non-negative")
    low = np.max(stations - ranges[:, None], axis=0)
    high = np.min(stations + ranges[:, None], axis=0)
    return Point2.of((low + high) / 2)


def station_subsets(n: int, min_size: int = 3):
    """All index subsets of size ``min_size..n`` in canonical order."""
    for k in range(min_size, n + 1):
        yield from combinations(range(n), k)


def rwgh_combinations(stations, ranges, taylor: TaylorConfig | None = None, init=None
                      ) -> list[CombinationEstimate]:
    """Least-squares estimate and residual for every subset of 3 or more stations.

    All subsets start from ``init`` (default: the bounding-box estimate).
    Subsets whose solve fails are left out.
    """
    taylor = taylor or TaylorConfig()
    stations = as_stations(stations, min_count=3)
    n = stations.shape[0]
    ranges = as_vector(ranges, n)
    init = np.asarray(Point2.of(bounding_box_estimate(stations, ranges) if init is None else init))
    weights = taylor.weights(n)

    out = []
    for k in range(3, n + 1):
        idx = np.array(list(combinations(range(n), k)))
        sol = solve_batch(stations[idx], ranges[idx], init, taylor, weights=weights[idx])
        for row, ok, pos, res in zip(idx, sol.ok(), sol.positions, sol.residual_norms):
            if ok:
                out.append(CombinationEstimate(tuple(int(i) for i in row), Point2.of(pos), float(res) ** 2))
    return out


def rwgh_estimate(stations, ranges, taylor: TaylorConfig | None = None, init=None) -> Point2:
    """Residual-weighted average of all subset estimates.

    Every subset ``c`` with ``|c| >= 3`` is solved by least squares and
    weighted by the inverse of its size-normalized residual ``Res(c) / |c|``.
    If some subset fits exactly, the best-fitting subset's estimate is
    returned as is.

    Raises:
        EstimationError: every subset solve failed.
    """
    combos = rwgh_combinations(stations, ranges, taylor, init)
    if not combos:
        raise EstimationError("all station subsets failed to solve")
    norm_res = np.array([c.normalized_residual for c in combos])
    positions = np.array([tuple(c.estimate) for c in combos])
    best = int(np.argmin(norm_res))
    if norm_res[best] <= ZERO_RESIDUAL:
        return combos[best].estimate
    w = 1.0 / norm_res
    return Point2.of(w @ positions / np.sum(w))
