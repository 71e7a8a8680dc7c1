"""Monte-Carlo engine for the localization experiments.

A :class:`ScenarioConfig` fixes the geometry, the NLOS template, the noise
level and one swept parameter. :func:`run_scenario` draws ranges for every
(sweep point, trial), runs each algorithm on identical ranges and reduces the
errors to RMSE per cell. Noise depends only on ``(seed, trial_index,
station_index)``, so trial ``t`` sees the same draws at every sweep point and
results do not depend on the number of worker processes.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from nlos_locate.baselines import bounding_box_estimate, rwgh_estimate
from nlos_locate.errors import LocalizationError
from nlos_locate.geo import NoiseModel, Point2, measure_ranges
from nlos_locate.srni import SrniConfig, srni_solve
from nlos_locate.taylor import TaylorConfig, count_solves, solve

ALGORITHMS = ("BB", "LS", "RWGH", "SRNI")
SWEEP_PARAMETERS = ("iterations", "sigma", "nlos_magnitude", "nlos_count", "station_count")
SCENARIO_IDS = ("A_iterations", "B_noise", "C_nlos_magnitude", "D_nlos_count", "E_station_count",
                "F_timing", "Custom")

REFERENCE_STATIONS = ((6000.0, 0.0), (3000.0, -6000.0), (-3000.0, -5000.0), (-6000.0, -1000.0),
                  (-4000.0, 6000.0), (0.0, 5000.0), (4000.0, 6000.0), (-6000.0, 4000.0))
REFERENCE_MS = (2000.0, 1000.0)
REFERENCE_NLOS = (1000.0, 500.0, 800.0, 750.0, 400.0, 0.0, 0.0, 0.0)
REFERENCE_SIGMA = 60.0
REFERENCE_TRIALS = 1000


class ConfigError(ValueError):
    """Invalid scenario configuration."""


def extra_stations(count: int, radius: float = 6000.0, start_deg: float = 22.5) -> list[tuple[float, float]]:
    """Stations beyond the fixed eight: every 45 degrees on a circle, starting at ``start_deg``."""
    angles = np.deg2rad(start_deg + 45.0 * np.arange(count))
    return [(float(radius * np.cos(a)), float(radius * np.sin(a))) for a in angles]


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment: fixed geometry plus a single swept parameter.

    ``sweep_parameter`` selects what each sweep point means:

    - ``iterations``: SRNI round count.
    - ``sigma``: noise standard deviation.
    - ``nlos_magnitude``: bias applied to every station whose template entry is > 0.
    - ``nlos_count``: the first ``m`` template entries are used, the rest zeroed.
    - ``station_count``: only the first ``N`` stations (and template entries) are used.
    """

    scenario_id: str
    sweep_parameter: str
    sweep: tuple[float, ...]
    stations: tuple[tuple[float, float], ...] = REFERENCE_STATIONS
    ms_true: tuple[float, float] = REFERENCE_MS
    nl_template: tuple[float, ...] = REFERENCE_NLOS
    sigma: float = REFERENCE_SIGMA
    trials: int = REFERENCE_TRIALS
    algorithms: tuple[str, ...] = ALGORITHMS
    seed: int = 0
    srni_iter_max: int = 10
    realistic_init: bool = False
    record_wall_time: bool = False

    def __post_init__(self):
        norm = {
            "stations": tuple((float(x), float(y)) for x, y in self.stations),
            "ms_true": tuple(float(v) for v in self.ms_true),
            "nl_template": tuple(float(v) for v in self.nl_template),
            "sweep": tuple(self.sweep),
            "algorithms": tuple(str(a).upper() for a in self.algorithms),
        }
        for k, v in norm.items():
            object.__setattr__(self, k, v)
        self.validate()

    def validate(self):
        if self.scenario_id not in SCENARIO_IDS:
            raise ConfigError(f"unknown scenario_id {self.scenario_id!r}")
        if self.sweep_parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"unknown sweep_parameter {self.sweep_parameter!r}")
        if not self.sweep:
            raise ConfigError("sweep must be non-empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.algorithms:
            raise ConfigError("algorithms must be non-empty")
        bad = sorted(set(self.algorithms) - set(ALGORITHMS))
        if bad:
            raise ConfigError(f"unknown algorithms {bad}")
        if len(self.ms_true) != 2:
            raise ConfigError("ms_true must be an [x, y] pair")
        if len(self.nl_template) != len(self.stations):
            raise ConfigError("nl_template must have one entry per station")
        if any(v < 0 for v in self.nl_template):
            raise ConfigError("nl_template entries must be >= 0")
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.srni_iter_max < 1:
            raise ConfigError("srni_iter_max must be >= 1")
        min_n = 4 if "SRNI" in self.algorithms else 3
        for point in self.sweep:
            n = int(point) if self.sweep_parameter == "station_count" else len(self.stations)
            if n < min_n:
                raise ConfigError(f"{n} stations is too few (need >= {min_n})")
            if n > len(self.stations):
                raise ConfigError(f"sweep asks for {n} stations but only {len(self.stations)} are defined")
            if self.sweep_parameter in ("iterations", "nlos_count", "station_count") and point != int(point):
                raise ConfigError(f"{self.sweep_parameter} sweep points must be integers")
            if self.sweep_parameter == "iterations" and point < 1:
                raise ConfigError("iteration sweep points must be >= 1")
            if self.sweep_parameter in ("sigma", "nlos_magnitude") and point < 0:
                raise ConfigError(f"{self.sweep_parameter} sweep points must be >= 0")
            if self.sweep_parameter == "nlos_count" and not 0 <= point <= len(self.stations):
                raise ConfigError("nlos_count sweep points must lie in 0..N")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stations"] = [list(p) for p in self.stations]
        for k in ("ms_true", "nl_template", "sweep", "algorithms"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError(f"unknown config fields {extra}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class SweepSetup:
    stations: np.ndarray
    nl: np.ndarray
    sigma: float
    srni_iter_max: int


def sweep_setup(config: ScenarioConfig, point) -> SweepSetup:
    """Concrete geometry, NLOS vector, noise level and SRNI rounds at one sweep point."""
    stations = np.array(config.stations)
    nl = np.array(config.nl_template)
    sigma, iters = config.sigma, config.srni_iter_max
    p = config.sweep_parameter
    if p == "iterations":
        iters = int(point)
    elif p == "sigma":
        sigma = float(point)
    elif p == "nlos_magnitude":
        nl = np.where(nl > 0, float(point), 0.0)
    elif p == "nlos_count":
        nl[int(point):] = 0.0
    elif p == "station_count":
        stations, nl = stations[: int(point)], nl[: int(point)]
    return SweepSetup(stations, nl, sigma, iters)


def scenario_presets() -> dict[str, ScenarioConfig]:
    """The six reference experiments with their default sweeps."""
    one_nlos = (REFERENCE_NLOS[0],) + (0.0,) * 7
    ten = REFERENCE_STATIONS + tuple(extra_stations(2))
    one_nlos_ten = (REFERENCE_NLOS[0],) + (0.0,) * 9
    return {
        "A_iterations": ScenarioConfig(
            "A_iterations", "iterations", tuple(range(1, 11)),
            nl_template=REFERENCE_NLOS[:2] + (0.0,) * 6, algorithms=("SRNI",)),
        "B_noise": ScenarioConfig(
            "B_noise", "sigma", tuple(float(s) for s in range(0, 101, 10)), nl_template=one_nlos),
        "C_nlos_magnitude": ScenarioConfig(
            "C_nlos_magnitude", "nlos_magnitude", tuple(float(m) for m in range(0, 1001, 100)),
            nl_template=one_nlos),
        "D_nlos_count": ScenarioConfig("D_nlos_count", "nlos_count", tuple(range(0, 6))),
        "E_station_count": ScenarioConfig(
            "E_station_count", "station_count", tuple(range(4, 11)), stations=ten,
            nl_template=one_nlos_ten),
        "F_timing": ScenarioConfig(
            "F_timing", "station_count", tuple(range(4, 11)), stations=ten, nl_template=one_nlos_ten),
    }


@dataclass(frozen=True)
class TrialRecord:
    sweep_point: float
    trial_index: int
    algorithm: str
    estimate: Point2 | None
    error: float
    solver_invocations: int
    wall_time: float
    failed: bool = False


@dataclass(frozen=True)
class CellSummary:
    rmse: float
    mean_solver_invocations: float
    mean_wall_time: float
    trial_count: int
    failed_trials: int


@dataclass
class SweepResult:
    cells: dict[tuple[float, str], CellSummary] = field(default_factory=dict)
    records: list[TrialRecord] = field(default_factory=list)

    def rmse(self, sweep_point, algorithm: str) -> float:
        return self.cells[(sweep_point, algorithm)].rmse

    def series(self, algorithm: str) -> list[tuple[float, float]]:
        """``(sweep_point, rmse)`` pairs for one algorithm in sweep order."""
        return sorted((p, c.rmse) for (p, a), c in self.cells.items() if a == algorithm)


def rmse(records) -> float:
    """Root mean square position error of one cell's successful trials.

    Uses an exactly rounded sum so the result does not depend on record order.
    """
    records = list(records)
    if not records:
        raise ValueError("rmse of an empty record list")
    cells = {(r.sweep_point, r.algorithm) for r in records}
    if len(cells) > 1:
        raise ValueError(f"records span several cells: {sorted(cells)}")
    errors = [r.error for r in records if not r.failed]
    if not errors:
        raise ValueError("every trial in the cell failed")
    return math.sqrt(math.fsum(e * e for e in errors) / len(errors))


def _estimate(algorithm, stations, ranges, init, setup: SweepSetup, taylor):
    if algorithm == "LS":
        return solve(stations, ranges, init, taylor).position
    if algorithm == "BB":
        return bounding_box_estimate(stations, ranges)
    if algorithm == "RWGH":
        return rwgh_estimate(stations, ranges, taylor, init)
    cfg = SrniConfig(iter_max=setup.srni_iter_max, noise_sigma=setup.sigma, subsolve_init="given", taylor=taylor)
    return srni_solve(ranges, stations, cfg, init).position


def run_trial(config: ScenarioConfig, point, trial_index: int) -> list[TrialRecord]:
    """All algorithms of ``config`` on one simulated range set."""
    setup = sweep_setup(config, point)
    ms = Point2.of(config.ms_true)
    noise = NoiseModel(setup.sigma, config.seed)
    ranges = measure_ranges(setup.stations, ms, setup.nl, noise, trial_index)
    init = bounding_box_estimate(setup.stations, ranges) if config.realistic_init else ms
    taylor = TaylorConfig()
    out = []
    for algorithm in config.algorithms:
        t0 = time.perf_counter()
        with count_solves() as counter:
            try:
                est = _estimate(algorithm, setup.stations, ranges, init, setup, taylor)
                failed = False
            except LocalizationError:
                est, failed = None, True
        elapsed = time.perf_counter() - t0 if config.record_wall_time else float("nan")
        err = est.distance_to(ms) if est is not None else float("nan")
        out.append(TrialRecord(point, trial_index, algorithm, est, err, counter.count, elapsed, failed))
    return out


def _run_chunk(config: ScenarioConfig, tasks) -> list[TrialRecord]:
    records = []
    for point, t in tasks:
        records.extend(run_trial(config, point, t))
    return records


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit value, else ``NLOS_LOCATE_THREADS``, else CPU count (0 = auto)."""
    if workers is None:
        env = os.environ.get("NLOS_LOCATE_THREADS", "").strip()
        workers = int(env) if env else 0
    if workers < 0:
        raise ConfigError("worker count must be >= 0")
    return workers or os.cpu_count() or 1


def summarize(records) -> dict[tuple[float, str], CellSummary]:
    groups: dict[tuple[float, str], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.sweep_point, r.algorithm), []).append(r)
    cells = {}
    for key in sorted(groups, key=lambda k: (k[0], k[1])):
        recs = groups[key]
        ok = [r for r in recs if not r.failed]
        cells[key] = CellSummary(
            rmse=rmse(recs) if ok else float("nan"),
            mean_solver_invocations=math.fsum(r.solver_invocations for r in recs) / len(recs),
            mean_wall_time=math.fsum(r.wall_time for r in recs) / len(recs),
            trial_count=len(recs),
            failed_trials=len(recs) - len(ok),
        )
    return cells


def run_scenario(config: ScenarioConfig, workers: int | None = None, keep_trials: bool = True) -> SweepResult:
    """Run every sweep point x trial x algorithm of ``config``.

    Algorithm failures are recorded as failed trials rather than raised. The
    result is identical for any ``workers`` value.
    """
    config.validate()
    tasks = [(p, t) for p in config.sweep for t in range(config.trials)]
    n_workers = min(resolve_workers(workers), len(tasks))
    if n_workers <= 1:
        records = _run_chunk(config, tasks)
    else:
        size = math.ceil(len(tasks) / (4 * n_workers))
        chunks = [tasks[i:i + size] for i in range(0, len(tasks), size)]
        with ProcessPoolExecutor(n_workers) as pool:
            records = [r for part in pool.map(_run_chunk, [config] * len(chunks), chunks) for r in part]
    order = {a: i for i, a in enumerate(config.algorithms)}
    points = {p: i for i, p in enumerate(config.sweep)}
    records.sort(key=lambda r: (points[r.sweep_point], r.trial_index, order[r.algorithm]))
    return SweepResult(summarize(records), records if keep_trials else [])


def with_overrides(config: ScenarioConfig, **changes) -> ScenarioConfig:
    """Copy of ``config`` with fields replaced (``None`` values are ignored)."""
    return replace(config, **{k: v for k, v in changes.items() if v is not None})
