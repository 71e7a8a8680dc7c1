"""Iterative Taylor-series (Gauss-Newton) least-squares position estimator.

At the current guess ``v`` the ranges are linearized as
``r'_i ~ |s_i - v| + a_i . delta`` with unit rows ``a_i = (v - s_i) / |v - s_i|``.
The correction solves the 2x2 weighted normal system
``(A^T W A) delta = A^T W z`` with ``z_i = r'_i - |s_i - v|`` and the guess is
moved by ``delta`` until the step is below tolerance.

:func:`solve_batch` runs many independent problems of equal size at once;
every other solver entry point in the package goes through it, so the
instrumented counter from :func:`count_solves` sees every solve.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass

import numpy as np

from nlos_locate.errors import DegenerateGeometryError, DivergenceError, SingularityError
from nlos_locate.geo import Point2, as_stations, as_vector

SINGULARITY_EPS = 1e-9
DET_RTOL = 1e-12
DIVERGENCE_LIMIT = 1e9

OK, SINGULAR, DEGENERATE, DIVERGED = 0, 1, 2, 3
_STATUS_ERRORS = {
    SINGULAR: (SingularityError, "guess coincides with a station"),
    DEGENERATE: (DegenerateGeometryError, "normal matrix is singular (degenerate geometry)"),
    DIVERGED: (DivergenceError, "iterate diverged"),
}


@dataclass(frozen=True)
class TaylorConfig:
    """Iteration limits and the measurement weighting.

    ``variances`` of ``None`` selects identity weighting; otherwise one positive
    variance per station gives the diagonal weighting ``R = diag(variances)``.
    """

    max_iterations: int = 50
    delta_tolerance: float = 1e-6
    variances: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.delta_tolerance > 0:
            raise ValueError("delta_tolerance must be > 0")
        if self.variances is not None:
            v = tuple(float(x) for x in self.variances)
            if not all(x > 0 and math.isfinite(x) for x in v):
                raise ValueError("diagonal variances must be finite and > 0")
            object.__setattr__(self, "variances", v)

    def weights(self, n: int) -> np.ndarray:
        if self.variances is None:
            return np.ones(n)
        if len(self.variances) != n:
            raise ValueError(f"expected {n} variances, got {len(self.variances)}")
        return 1.0 / np.asarray(self.variances)


@dataclass(frozen=True)
class TaylorStep:
    """One linearization: Jacobian ``A``, residual ``z``, correction and error ``e = z - A delta``."""

    jacobian: np.ndarray
    residual: np.ndarray
    delta: np.ndarray
    error: np.ndarray


@dataclass(frozen=True)
class PositionEstimate:
    position: Point2
    iterations_used: int
    converged: bool
    final_residual_norm: float


@dataclass
class BatchSolution:
    """Raw output of :func:`solve_batch`; ``status`` holds one code per problem."""

    positions: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    status: np.ndarray
    residual_norms: np.ndarray

    def ok(self) -> np.ndarray:
        return self.status == OK

    def raise_for(self, k: int = 0):
        code = int(self.status[k])
        if code != OK:
            exc, msg = _STATUS_ERRORS[code]
            raise exc(msg)

    def estimate(self, k: int = 0) -> PositionEstimate:
        self.raise_for(k)
        return PositionEstimate(
            position=Point2.of(self.positions[k]),
            iterations_used=int(self.iterations[k]),
            converged=bool(self.converged[k]),
            final_residual_norm=float(self.residual_norms[k]),
        )


@dataclass
class SolveCounter:
    """Number of position solves performed while the counter was active."""

    count: int = 0


_active_counters: ContextVar[tuple[SolveCounter, ...]] = ContextVar("_active_counters", default=())


@contextmanager
def count_solves():
    """Count every position solve issued in this context (nesting allowed).

    >>> with count_solves() as c:
    ...     ...
    >>> c.count
    0
    """
    counter = SolveCounter()
    token = _active_counters.set(_active_counters.get() + (counter,))
    try:
        yield counter
    finally:
        _active_counters.reset(token)


def _record_solves(n: int):
    for c in _active_counters.get():
        c.count += n


def jacobian_row(bs, guess) -> tuple[float, float]:
    """Partial derivatives of ``|bs - guess|`` with respect to the guess coordinates."""
    bs, guess = Point2.of(bs), Point2.of(guess)
    dx, dy = guess.x - bs.x, guess.y - bs.y
    d = math.hypot(dx, dy)
    if d <= SINGULARITY_EPS:
        raise SingularityError(f"guess {tuple(guess)} coincides with station {tuple(bs)}")
    return dx / d, dy / d


def _normal_solve(a, z, w):
    """Closed-form weighted 2x2 normal-equation solve; last axis runs over stations."""
    ax, ay = a[..., 0], a[..., 1]
    wax, way = w * ax, w * ay
    n11 = np.sum(wax * ax, axis=-1)
    n12 = np.sum(wax * ay, axis=-1)
    n22 = np.sum(way * ay, axis=-1)
    g1 = np.sum(wax * z, axis=-1)
    g2 = np.sum(way * z, axis=-1)
    det = n11 * n22 - n12 * n12
    degenerate = ~(np.abs(det) > DET_RTOL * (n11 + n22) ** 2)
    safe = np.where(degenerate, 1.0, det)
    delta = np.stack([(n22 * g1 - n12 * g2) / safe, (n11 * g2 - n12 * g1) / safe], axis=-1)
    return delta, degenerate


def taylor_step(stations, ranges, guess, config: TaylorConfig | None = None) -> TaylorStep:
    """A single linearize-and-solve step at ``guess``."""
    config = config or TaylorConfig()
    stations = as_stations(stations, min_count=3)
    n = stations.shape[0]
    ranges = as_vector(ranges, n)
    diff = np.asarray(Point2.of(guess)) - stations
    d = np.hypot(diff[:, 0], diff[:, 1])
    if np.any(d <= SINGULARITY_EPS):
        raise SingularityError("guess coincides with a station")
    a = diff / d[:, None]
    z = ranges - d
    delta, degenerate = _normal_solve(a, z, config.weights(n))
    if degenerate:
        raise DegenerateGeometryError("normal matrix is singular (degenerate geometry)")
    return TaylorStep(jacobian=a, residual=z, delta=delta, error=z - a @ delta)


def solve_batch(stations, ranges, initial_guesses, config: TaylorConfig | None = None,
                weights=None) -> BatchSolution:
    """Solve ``B`` independent problems with ``K`` stations each.

    Args:
        stations: ``(K, 2)`` shared or ``(B, K, 2)`` per-problem stations.
        ranges: ``(K,)`` shared or ``(B, K)`` measured ranges.
        initial_guesses: ``(2,)`` shared or ``(B, 2)``.
        config: iteration settings. Its ``variances`` apply only when
            ``weights`` is not given and ``K`` matches.
        weights: optional ``(K,)`` or ``(B, K)`` inverse variances.

    Failures never raise here; they are reported through ``status``.
    """
    config = config or TaylorConfig()
    st = np.asarray(stations, dtype=float)
    r = np.asarray(ranges, dtype=float)
    g = np.asarray(initial_guesses, dtype=float)
    b = max(st.shape[0] if st.ndim == 3 else 1, r.shape[0] if r.ndim == 2 else 1,
            g.shape[0] if g.ndim == 2 else 1)
    k = st.shape[-2]
    if k < 3:
        raise ValueError(f"need at least 3 stations per problem, got {k}")
    st = np.broadcast_to(st, (b, k, 2))
    r = np.broadcast_to(r, (b, k))
    w = np.broadcast_to(config.weights(k) if weights is None else np.asarray(weights, dtype=float), (b, k))
    pos = np.array(np.broadcast_to(g, (b, 2)))
    iters = np.zeros(b, dtype=int)
    converged = np.zeros(b, dtype=bool)
    status = np.full(b, OK)
    _record_solves(b)

    active = np.arange(b)
    tol = config.delta_tolerance
    for _ in range(config.max_iterations):
        if active.size == 0:
            break
        diff = pos[active, None, :] - st[active]
        d = np.hypot(diff[..., 0], diff[..., 1])
        singular = np.any(d <= SINGULARITY_EPS, axis=1)
        d = np.where(d <= SINGULARITY_EPS, 1.0, d)
        a = diff / d[..., None]
        delta, degenerate = _normal_solve(a, r[active] - d, w[active])
        failed = singular | degenerate
        status[active[singular]] = SINGULAR
        status[active[degenerate & ~singular]] = DEGENERATE

        new = pos[active] + delta
        bad = ~failed & (~np.all(np.isfinite(new), axis=1) | (np.hypot(new[:, 0], new[:, 1]) > DIVERGENCE_LIMIT))
        status[active[bad]] = DIVERGED
        step = ~failed & ~bad
        idx = active[step]
        pos[idx] = new[step]
        iters[idx] += 1
        done = step & (np.hypot(delta[:, 0], delta[:, 1]) < tol)
        converged[active[done]] = True
        active = active[step & ~done]

    diff = pos[:, None, :] - st
    res = r - np.hypot(diff[..., 0], diff[..., 1])
    return BatchSolution(pos, iters, converged, status, np.sqrt(np.sum(res * res, axis=1)))


def solve(stations, ranges, initial_guess, config: TaylorConfig | None = None) -> PositionEstimate:
    """Iterate Taylor steps from ``initial_guess`` until the step is below tolerance.

    Stops after ``config.max_iterations`` steps at most and reports
    ``converged=False`` in that case.

    Raises:
        SingularityError: an iterate lands on a station.
        DegenerateGeometryError: the normal matrix is singular at some iterate.
        DivergenceError: an iterate is non-finite or beyond 1e9 m.
    """
    stations = as_stations(stations, min_count=3)
    ranges = as_vector(ranges, stations.shape[0])
    return solve_batch(stations, ranges, np.asarray(Point2.of(initial_guess)), config).estimate(0)


def sum_squared_residuals(stations, ranges, position) -> float:
    """Least-squares objective ``sum (r'_i - |s_i - p|)^2``."""
    stations = as_stations(stations)
    diff = stations - np.asarray(Point2.of(position))
    res = np.asarray(ranges, dtype=float) - np.hypot(diff[:, 0], diff[:, 1])
    return float(res @ res)
