"""Sparse recovery of NLOS range biases with iterative largest-component thresholding.

The measured ranges are mapped to an estimate of the per-station NLOS bias by
a leave-one-out transform: station ``i`` is dropped, the mobile is located
from the remaining stations, and the bias estimate is ``r'_i`` minus the
distance from station ``i`` to that location. The recovery loop keeps only
the largest-magnitude entry of each transform output, accumulates it, and
re-runs the transform on the corrected ranges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from nlos_locate.baselines import bounding_box_estimate
from nlos_locate.errors import LocalizationError, TransformError
from nlos_locate.geo import Point2, as_stations, as_vector
from nlos_locate.taylor import TaylorConfig, solve_batch

DETECTION_FLOOR = 1e-3


@dataclass(frozen=True)
class SrniConfig:
    """Settings for :func:`srni_solve`.

    Attributes:
        iter_max: number of transform/threshold rounds.
        noise_sigma: range noise standard deviation; the default detection
            threshold.
        detection_threshold: explicit threshold for counting NLOS stations;
            ``None`` means ``max(noise_sigma, 1e-3)``.
        subsolve_init: ``"full"`` starts every leave-one-out solve at the
            all-station solution for the current corrected ranges (one extra
            solve per round); ``"given"`` starts them at the caller's ``init``.
        nonnegative: clip the accumulated biases at zero after every round
            (NLOS bias cannot be negative). ``False`` keeps them signed.
        taylor: settings of every position solve.
    """

    iter_max: int = 10
    noise_sigma: float = 0.0
    detection_threshold: float | None = None
    subsolve_init: str = "full"
    nonnegative: bool = True
    taylor: TaylorConfig = field(default_factory=TaylorConfig)

    def __post_init__(self):
        if self.iter_max < 1:
            raise ValueError("iter_max must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.detection_threshold is not None and not self.detection_threshold > 0:
            raise ValueError("detection_threshold must be > 0")
        if self.subsolve_init not in ("full", "given"):
            raise ValueError(f"subsolve_init must be 'full' or 'given', got {self.subsolve_init!r}")

    @property
    def threshold(self) -> float:
        if self.detection_threshold is not None:
            return self.detection_threshold
        return max(self.noise_sigma, DETECTION_FLOOR)


@dataclass(frozen=True)
class SrniResult:
    position: Point2
    nlos: np.ndarray
    detected_count: int
    within_valid_zone: bool


def valid_zone(detected_count: int, n_stations: int) -> bool:
    """True when ``detected_count < (n_stations - 3) / 2``, compared in integers."""
    if n_stations < 3:
        raise ValueError("n_stations must be >= 3")
    return 2 * int(detected_count) < int(n_stations) - 3


def threshold_largest(nl) -> np.ndarray:
    """Keep the largest-magnitude entry (with its sign) and zero the rest.

    Ties go to the lowest index.
    """
    nl = np.asarray(nl, dtype=float)
    if nl.size == 0:
        raise ValueError("cannot threshold an empty vector")
    out = np.zeros_like(nl)
    k = int(np.argmax(np.abs(nl)))
    out[k] = nl[k]
    return out


def _leave_one_out_index(n: int) -> np.ndarray:
    keep = ~np.eye(n, dtype=bool)
    return np.nonzero(keep)[1].reshape(n, n - 1)


def transform_to_nlos(ranges, stations, taylor: TaylorConfig | None = None, init=None,
                      subsolve_init: str = "full") -> np.ndarray:
    """Map measured ranges to per-station NLOS bias estimates.

    For every station ``i`` the position is solved from all other stations
    and ``NL_i = r'_i - |s_i - x_i|`` where ``x_i`` is that estimate. The
    ``N`` sub-problems are independent and solved as one batch.

    Args:
        ranges: measured (or already corrected) ranges.
        stations: ``(N, 2)`` coordinates, ``N >= 4``.
        taylor: solver settings.
        init: starting point; defaults to the bounding-box estimate.
        subsolve_init: see :class:`SrniConfig`.

    Raises:
        TransformError: a leave-one-out solve failed; ``index`` names the
            station that was left out.
    """
    taylor = taylor or TaylorConfig()
    stations = as_stations(stations, min_count=4)
    n = stations.shape[0]
    ranges = as_vector(ranges, n)
    if init is None:
        init = bounding_box_estimate(stations, np.maximum(ranges, 0.0))
    init = np.asarray(Point2.of(init))
    weights = taylor.weights(n)

    start = init
    if subsolve_init == "full":
        full = solve_batch(stations, ranges, init, taylor, weights=weights)
        if full.ok()[0]:
            start = full.positions[0]

    loo = _leave_one_out_index(n)
    sub = solve_batch(stations[loo], ranges[loo], start, taylor, weights=weights[loo])
    bad = np.flatnonzero(~sub.ok())
    if bad.size:
        i = int(bad[0])
        try:
            sub.raise_for(i)
        except LocalizationError as exc:
            raise TransformError(i, exc) from exc
    gap = stations - sub.positions
    return ranges - np.hypot(gap[:, 0], gap[:, 1])


def srni_solve(ranges, stations, config: SrniConfig | None = None, init=None) -> SrniResult:
    """Estimate the mobile position while recovering a sparse NLOS bias vector.

    Each of ``config.iter_max`` rounds transforms the corrected ranges
    ``r' - NL``, keeps the largest-magnitude bias estimate and adds it to
    ``NL``. The position is then solved from ``r' - NL`` using all stations.
    With ``config.nonnegative`` (the default) the accumulated biases are
    clipped at zero after each round; the thresholded increment itself keeps
    its sign, so a negative pick can undo an earlier over-correction.

    Args:
        ranges: measured ranges, one per station.
        stations: ``(N, 2)`` coordinates, ``N >= 4``.
        config: recovery settings.
        init: initial guess for the position solves; defaults to the
            bounding-box estimate.
    """
    config = config or SrniConfig()
    stations = as_stations(stations, min_count=4)
    n = stations.shape[0]
    ranges = as_vector(ranges, n)
    init = np.asarray(Point2.of(bounding_box_estimate(stations, np.maximum(ranges, 0.0)) if init is None else init))

    nl = np.zeros(n)
    for _ in range(config.iter_max):
        estimate = transform_to_nlos(ranges - nl, stations, config.taylor, init, config.subsolve_init)
        nl = nl + threshold_largest(estimate)
        if config.nonnegative:
            nl = np.maximum(nl, 0.0)

    final = solve_batch(stations, ranges - nl, init, config.taylor).estimate(0)
    detected = int(np.count_nonzero(nl > config.threshold))
    return SrniResult(
        position=final.position,
        nlos=nl,
        detected_count=detected,
        within_valid_zone=valid_zone(detected, n),
    )
