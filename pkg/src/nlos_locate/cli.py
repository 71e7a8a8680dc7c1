"""Command-line entry point: ``nlos-locate``.

Subcommands::

    nlos-locate scenario {a,b,c,d,e,f} [--seed N] [--trials N] [--out DIR] [--keep-trials]
    nlos-locate custom --config FILE [--out DIR] [--keep-trials]
    nlos-locate localize --stations FILE --ranges FILE --algo {ls,bb,rwgh,srni}

Exit codes: 0 success, 1 bad arguments or configuration, 2 execution failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from nlos_locate import __version__
from nlos_locate.baselines import bounding_box_estimate, rwgh_estimate
from nlos_locate.errors import LocalizationError
from nlos_locate.simkit import (
    CellSummary,
    ConfigError,
    ScenarioConfig,
    SweepResult,
    run_scenario,
    scenario_presets,
    with_overrides,
)
from nlos_locate.srni import SrniConfig, srni_solve
from nlos_locate.taylor import solve

SWEEP_HEADER = ("sweep_point", "algorithm", "rmse_m", "mean_solver_invocations", "mean_wall_time_s",
                "trial_count", "failed_trials")
TRIALS_HEADER = ("sweep_point", "trial_index", "algorithm", "x_m", "y_m", "error_m", "solver_invocations",
                 "wall_time_s", "failed")
PRESET_KEYS = {k[0].lower(): k for k in scenario_presets()}

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(value: float) -> str:
    return "%#.6g" % value


def _fmt_point(value) -> str:
    return "%.6g" % value


def format_sweep_csv(result: SweepResult) -> str:
    """CSV text for ``result``: LF line ends, 6 significant digits, rows sorted by (point, algorithm)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for (point, algo), c in sorted(result.cells.items(), key=lambda kv: (float(kv[0][0]), kv[0][1])):
        w.writerow([_fmt_point(point), algo, _fmt(c.rmse), _fmt(c.mean_solver_invocations),
                    _fmt(c.mean_wall_time), c.trial_count, c.failed_trials])
    return buf.getvalue()


def emit_csv(result: SweepResult, path) -> None:
    """Write the per-cell summary table to ``path``."""
    Path(path).write_bytes(format_sweep_csv(result).encode("utf-8"))


def read_sweep_csv(path) -> SweepResult:
    """Parse a file written by :func:`emit_csv` back into a :class:`SweepResult` (no records)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != SWEEP_HEADER:
        raise ValueError(f"{path}: not a sweep CSV")
    cells = {}
    for row in rows[1:]:
        point, algo, r, inv, wall, count, failed = row
        cells[(float(point), algo)] = CellSummary(float(r), float(inv), float(wall), int(count), int(failed))
    return SweepResult(cells)


def emit_trials_csv(result: SweepResult, path) -> None:
    """Per-trial records at full float precision."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIALS_HEADER)
    for r in result.records:
        x, y = (repr(r.estimate.x), repr(r.estimate.y)) if r.estimate is not None else ("nan", "nan")
        w.writerow([_fmt_point(r.sweep_point), r.trial_index, r.algorithm, x, y, repr(r.error),
                    r.solver_invocations, repr(r.wall_time), int(r.failed)])
    Path(path).write_bytes(buf.getvalue().encode("utf-8"))


def load_config(path) -> ScenarioConfig:
    """Read a scenario JSON file, or the ``config`` entry of a run manifest."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if isinstance(data, dict) and "config" in data and "tool_version" in data:
        data = data["config"]
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return ScenarioConfig.from_dict(data)


def _load_array(path, name):
    path = Path(path)
    try:
        if path.suffix == ".json":
            return np.asarray(json.loads(path.read_text()), dtype=float)
        return np.loadtxt(path, delimiter=",", ndmin=1, dtype=float)
    except FileNotFoundError:
        raise ConfigError(f"{name} file not found: {path}") from None
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {name} file {path}: {exc}") from None


def _run_and_write(config: ScenarioConfig, args, config_path) -> int:
    out = Path(args.out)
    try:
        result = run_scenario(config, workers=args.workers, keep_trials=args.keep_trials)
        out.mkdir(parents=True, exist_ok=True)
        files = ["sweep.csv"]
        emit_csv(result, out / "sweep.csv")
        if args.keep_trials:
            emit_trials_csv(result, out / "trials.csv")
            files.append("trials.csv")
        files.append("manifest.json")
        manifest = {
            "tool": "nlos-locate",
            "tool_version": __version__,
            "config_path": str(config_path) if config_path else None,
            "config": config.to_dict(),
            "output_directory": str(out),
            "files": files,
            "seed": config.seed,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    except ConfigError:
        raise
    except (LocalizationError, ValueError, OSError) as exc:
        print(f"error: scenario failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    _print_summary(result)
    return EXIT_OK


def _print_summary(result: SweepResult):
    algos = sorted({a for _, a in result.cells})
    points = sorted({p for p, _ in result.cells})
    print("sweep_point " + " ".join(f"{a:>10}" for a in algos))
    for p in points:
        cells = [result.cells.get((p, a)) for a in algos]
        print(f"{_fmt_point(p):>11} " + " ".join(f"{c.rmse:10.3f}" if c else " " * 10 for c in cells))
    failed = sum(c.failed_trials for c in result.cells.values())
    if failed:
        print(f"{failed} trial(s) failed and were excluded from RMSE")


def _cmd_scenario(args) -> int:
    config = scenario_presets()[PRESET_KEYS[args.name]]
    config = with_overrides(config, seed=args.seed, trials=args.trials,
                            realistic_init=True if args.realistic_init else None,
                            record_wall_time=True if args.wall_time else None)
    return _run_and_write(config, args, None)


def _cmd_custom(args) -> int:
    config = load_config(args.config)
    config = with_overrides(config, record_wall_time=True if args.wall_time else None)
    return _run_and_write(config, args, args.config)


def _cmd_localize(args) -> int:
    stations = _load_array(args.stations, "stations")
    ranges = _load_array(args.ranges, "ranges")
    if stations.ndim != 2 or stations.shape[1] != 2:
        raise ConfigError(f"stations must be an N x 2 table, got shape {stations.shape}")
    if ranges.shape != (stations.shape[0],):
        raise ConfigError(f"expected {stations.shape[0]} ranges, got shape {ranges.shape}")
    if args.init:
        try:
            x, y = (float(v) for v in args.init.split(","))
        except ValueError:
            raise ConfigError(f"--init must be X,Y, got {args.init!r}") from None
        init = (x, y)
    else:
        init = tuple(bounding_box_estimate(stations, np.maximum(ranges, 0.0)))
    try:
        if args.algo == "srni":
            cfg = SrniConfig(iter_max=args.iter_max, noise_sigma=args.sigma)
            res = srni_solve(ranges, stations, cfg, init)
            pos = res.position
        elif args.algo == "ls":
            pos = solve(stations, ranges, init).position
        elif args.algo == "bb":
            pos = bounding_box_estimate(stations, ranges)
        else:
            pos = rwgh_estimate(stations, ranges, init=init)
    except LocalizationError as exc:
        print(f"error: estimation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"position: ({pos.x:.3f}, {pos.y:.3f})")
    if args.algo == "srni":
        print(f"M={res.detected_count}")
        print("NL=[" + ", ".join(f"{v:.3f}" for v in res.nlos) + "]")
        print(f"valid={'true' if res.within_valid_zone else 'false'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nlos-locate", description="NLOS-robust TOA localization experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_opts(sp):
        sp.add_argument("--out", default="results", help="output directory (default: results)")
        sp.add_argument("--keep-trials", action="store_true", help="also write trials.csv")
        sp.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: NLOS_LOCATE_THREADS, 0 = auto)")
        sp.add_argument("--wall-time", action="store_true",
                        help="record wall-clock time per trial (makes CSVs run-dependent)")

    sc = sub.add_parser("scenario", help="run a preset experiment")
    sc.add_argument("name", choices=sorted(PRESET_KEYS))
    sc.add_argument("--seed", type=int, default=None)
    sc.add_argument("--trials", type=int, default=None)
    sc.add_argument("--realistic-init", action="store_true",
                    help="start solvers at the bounding-box estimate instead of the true position")
    run_opts(sc)
    sc.set_defaults(func=_cmd_scenario)

    cu = sub.add_parser("custom", help="run a scenario from a JSON config or manifest")
    cu.add_argument("--config", required=True)
    run_opts(cu)
    cu.set_defaults(func=_cmd_custom)

    lo = sub.add_parser("localize", help="estimate one position from stations and ranges")
    lo.add_argument("--stations", required=True, help="N x 2 coordinates (.json or comma-separated)")
    lo.add_argument("--ranges", required=True, help="N ranges (.json or comma-separated)")
    lo.add_argument("--algo", required=True, choices=("ls", "bb", "rwgh", "srni"))
    lo.add_argument("--init", default=None, help="initial guess X,Y (default: bounding-box estimate)")
    lo.add_argument("--sigma", type=float, default=0.0, help="noise std, used as the NLOS detection threshold")
    lo.add_argument("--iter-max", type=int, default=10)
    lo.set_defaults(func=_cmd_localize)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
