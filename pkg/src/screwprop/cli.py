"""Command-line interface.

Exit codes: 0 success, 2 input/validation error, 3 data-quality error,
4 partial success.
"""

import argparse
import csv
import glob
import json
import os
import sys
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.pipeline import Pipeline

from . import reporting
from .exceptions import (DegenerateParametersError, InvalidTrialError, MalformedInputError,
                         NoSteadyStateError, TooFewObservationsError)
from .kinematics import ScrewGeometry
from .media import Observation, fit_media, library_to_json, load_library
from .media import predict_efficiency, predict_velocity
from .metrics import METRIC_COLUMNS, TrialMetrics, load_envelope, peak_forces, trial_metrics
from .pipeline import (LowPassFilter, SteadyStateClipper, Tare, baseline_drift,
                       read_baseline_csv, read_trial_csv, write_trial_csv)
from .planner import Objective, pareto_front, plan
from .synthetic import write_dataset

EXIT_OK, EXIT_INPUT, EXIT_DATA, EXIT_PARTIAL = 0, 2, 3, 4

TABLE_COLUMNS = ("trial_id",) + METRIC_COLUMNS + ("peak_fx_N", "peak_fy_N", "peak_fz_N")
DRIFT_COLUMNS = ("trial_id", "previous_trial_id", "fx_N", "fy_N", "fz_N",
                 "tx_Nm", "ty_Nm", "tz_Nm")
FIT_REPORT_KEYS = ("rmse_velocity", "rmse_efficiency", "rmse_thrust", "rmse_torque",
                   "iterations", "converged", "identifiable", "objective",
                   "initial_objective", "n_observations")


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    geometry_path: Optional[str] = None
    media_library_path: Optional[str] = None
    filter_cutoff_hz: float = 5.0
    effective_mass_kg: float = 1.1
    effective_radius_mm: Optional[float] = None
    output_format: str = "csv"
    out_dir: Optional[str] = None

    def geometry(self):
        if self.geometry_path is None:
            return ScrewGeometry.default()
        if not os.path.exists(self.geometry_path):
            raise CliError(f"geometry file not found: {self.geometry_path}")
        try:
            return ScrewGeometry.from_json(self.geometry_path)
        except (ValueError, KeyError) as exc:
            raise CliError(f"{self.geometry_path}: invalid geometry: {exc}") from None

    def radius(self, geometry):
        if self.effective_radius_mm is None:
            return geometry.effective_radius
        return self.effective_radius_mm

    def library(self):
        path = self.media_library_path
        if path is None and self.out_dir is not None:
            path = os.path.join(self.out_dir, "media_library.json")
        if path is None or not os.path.exists(path):
            raise CliError(f"media library not found: {path}")
        try:
            return load_library(path)
        except (ValueError, KeyError) as exc:
            raise CliError(f"{path}: invalid media library: {exc}") from None


def processing_pipeline(baseline, cutoff_hz=5.0, manual_range=None):
    """tare -> zero-phase low-pass -> steady-state clip, as one estimator."""
    return Pipeline([
        ("tare", Tare(baseline)),
        ("lowpass", LowPassFilter(cutoff_hz)),
        ("clip", SteadyStateClipper(manual_range)),
    ])


# --------------------------------------------------------------------------
# helpers

def _emit(text, cfg, filename):
    """Write to ``--out/filename`` when an output dir is set, else stdout."""
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        reporting.write_text(os.path.join(cfg.out_dir, filename), text)
    else:
        sys.stdout.write(text)


def _trial_paths(inputs):
    paths = []
    for item in inputs:
        if os.path.isdir(item):
            for p in sorted(glob.glob(os.path.join(item, "*.csv"))):
                name = os.path.basename(p)
                if name.endswith(".baseline.csv") or name == "clip_ranges.csv":
                    continue
                paths.append(p)
        elif os.path.exists(item):
            paths.append(item)
        else:
            raise CliError(f"trial file not found: {item}")
    if not paths:
        raise CliError("no trial files given")
    return paths


def _trial_id(path):
    return os.path.splitext(os.path.basename(path))[0]


def read_clip_ranges(path):
    ranges = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["trial_id", "start_sample",
                                                             "end_sample"]:
            raise MalformedInputError("header must be trial_id,start_sample,end_sample", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                ranges[row[0].strip()] = (int(row[1]), int(row[2]))
            except (IndexError, ValueError):
                raise MalformedInputError(f"bad clip range row {row!r}", path, lineno) from None
    return ranges


def read_metrics_table(path, required=METRIC_COLUMNS):
    """Rows of a metrics table (CSV or JSON) as dicts of strings/numbers."""
    if not os.path.exists(path):
        raise CliError(f"metrics table not found: {path}")
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            try:
                rows = json.load(fh)
            except json.JSONDecodeError as exc:
                raise MalformedInputError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
        if not isinstance(rows, list):
            raise MalformedInputError("expected a JSON array of records", path)
        return rows
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.lstrip().startswith("#"))
        missing = set(required) - set(reader.fieldnames or ())
        if missing:
            raise MalformedInputError(f"missing columns {sorted(missing)}", path, 1)
        return list(reader)


def _metrics_from_rows(rows, path):
    out = []
    for i, row in enumerate(rows):
        try:
            out.append((row, TrialMetrics.from_dict(row)))
        except (KeyError, ValueError, TypeError) as exc:
            # header is line 1 in the CSV form
            raise MalformedInputError(f"bad metrics record: {exc}", path, i + 2) from None
    return out


def _table_text(rows, columns, fmt):
    if fmt == "json":
        return reporting.json_text([{c: r[c] for c in columns} for r in rows])
    return reporting.csv_text(rows, columns)


# --------------------------------------------------------------------------
# commands

def cmd_process(args, cfg):
    paths = _trial_paths(args.inputs)
    clip_path = args.clip_ranges
    if clip_path is None:
        guess = os.path.join(os.path.dirname(paths[0]), "clip_ranges.csv")
        clip_path = guess if os.path.exists(guess) else None
    elif not os.path.exists(clip_path):
        raise CliError(f"clip range file not found: {clip_path}")
    ranges = read_clip_ranges(clip_path) if clip_path else {}

    jobs = []
    for path in paths:
        tid = _trial_id(path)
        log = read_trial_csv(path)
        bpath = args.baseline or os.path.splitext(path)[0] + ".baseline.csv"
        if not os.path.exists(bpath):
            raise CliError(f"baseline file not found: {bpath}")
        jobs.append((tid, log, read_baseline_csv(bpath)))
    jobs.sort(key=lambda j: (j[1].media_name, j[1].commanded_angle.degrees, j[0]))

    out_dir = cfg.out_dir or "."
    proc_dir = os.path.join(out_dir, "processed")
    os.makedirs(proc_dir, exist_ok=True)
    rows, drift_rows = [], []
    previous = None
    for tid, log, baseline in jobs:
        try:
            clipped = processing_pipeline(baseline, cfg.filter_cutoff_hz,
                                          ranges.get(tid)).fit_transform(log)
            m = trial_metrics(clipped)
        except (NoSteadyStateError, InvalidTrialError) as exc:
            raise CliError(f"trial {tid}: {exc}", EXIT_DATA) from None
        write_trial_csv(clipped, os.path.join(proc_dir, tid + ".csv"))
        peaks = peak_forces(clipped)
        row = {"trial_id": tid, **m.to_dict(),
               "peak_fx_N": peaks[0], "peak_fy_N": peaks[1], "peak_fz_N": peaks[2]}
        rows.append(row)
        if previous is not None:
            d = baseline_drift(baseline, previous[1])
            drift_rows.append(dict(zip(DRIFT_COLUMNS, [tid, previous[0], *d.tolist()])))
        previous = (tid, baseline)

    ext = "json" if cfg.output_format == "json" else "csv"
    reporting.write_text(os.path.join(out_dir, f"metrics.{ext}"),
                         _table_text(rows, TABLE_COLUMNS, cfg.output_format))
    reporting.write_text(os.path.join(out_dir, f"drift.{ext}"),
                         _table_text(drift_rows, DRIFT_COLUMNS, cfg.output_format))
    return EXIT_OK


def cmd_fit(args, cfg):
    records = _metrics_from_rows(read_metrics_table(args.metrics), args.metrics)
    if not records:
        raise CliError(f"{args.metrics}: no metric records")
    geometry = cfg.geometry()
    radius = cfg.radius(geometry)
    by_media = {}
    for _, m in records:
        by_media.setdefault(m.media_name, []).append(m)

    fitted, report, failed = [], {}, []
    for name in sorted(by_media):
        try:
            obs = [Observation.from_metrics(m) for m in by_media[name]]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                params, rep = fit_media(obs, geometry, radius, name=name)
        except (TooFewObservationsError, ValueError) as exc:
            failed.append(name)
            report[name] = {"error": str(exc)}
            print(f"screwprop fit: media {name!r}: {exc}", file=sys.stderr)
            continue
        fitted.append(params)
        report[name] = {k: getattr(rep, k) for k in FIT_REPORT_KEYS}

    lib_path = cfg.media_library_path or os.path.join(cfg.out_dir or ".", "media_library.json")
    os.makedirs(os.path.dirname(os.path.abspath(lib_path)), exist_ok=True)
    reporting.write_text(lib_path, library_to_json(fitted))
    report_path = os.path.join(cfg.out_dir or os.path.dirname(os.path.abspath(lib_path)),
                               "fit_report.json")
    reporting.write_text(report_path, reporting.json_text(report))
    return EXIT_PARTIAL if failed else EXIT_OK


def _lookup(library, name):
    if name not in library:
        raise CliError(f"unknown media {name!r}; available: {', '.join(sorted(library))}")
    return library[name]


def cmd_predict(args, cfg):
    library = cfg.library()
    geometry = cfg.geometry()
    radius = cfg.radius(geometry)
    names = args.media or sorted(library)
    if args.angles:
        angles = np.array([float(a) for a in args.angles.split(",")])
    else:
        angles = np.arange(10.0, 35.0 + 1e-9, args.step)
    rows = []
    for name in names:
        media = _lookup(library, name)
        v = np.atleast_1d(predict_velocity(media, geometry, angles, args.omega, radius))
        e = np.atleast_1d(predict_efficiency(media, geometry, angles, args.omega, radius))
        for a, vi, ei in zip(angles, v, e):
            rows.append({"media": name, "angle_deg": float(a), "velocity_m_s": float(vi),
                         "efficiency": float(ei)})
    cols = ("media", "angle_deg", "velocity_m_s", "efficiency")
    _emit(_table_text(rows, cols, cfg.output_format), cfg, f"predictions.{cfg.output_format}")
    return EXIT_OK


def cmd_plan(args, cfg):
    library = cfg.library()
    geometry = cfg.geometry()
    media = _lookup(library, args.media)
    result = plan(media, geometry, args.omega, Objective(args.weight), cfg.radius(geometry))
    _emit(reporting.json_text(result.to_dict()), cfg, f"plan_{args.media}.json")
    return EXIT_OK


def cmd_pareto(args, cfg):
    library = cfg.library()
    geometry = cfg.geometry()
    media = _lookup(library, args.media)
    front = pareto_front(media, geometry, args.omega, args.grid_step, cfg.radius(geometry))
    rows = [{"angle_deg": p.angle.degrees, "velocity_m_s": p.velocity,
             "efficiency": p.efficiency} for p in front]
    cols = ("angle_deg", "velocity_m_s", "efficiency")
    _emit(_table_text(rows, cols, cfg.output_format), cfg,
          f"pareto_{args.media}.{cfg.output_format}")
    return EXIT_OK


def cmd_envelope(args, cfg):
    cols = ("peak_fx_N", "peak_fy_N", "peak_fz_N")
    rows = read_metrics_table(args.metrics, required=cols)
    peaks = []
    for i, row in enumerate(rows):
        try:
            peaks.append([float(row[c]) for c in cols])
        except (KeyError, ValueError, TypeError):
            raise MalformedInputError(f"record needs numeric {', '.join(cols)}",
                                      args.metrics, i + 2) from None
    if not peaks:
        raise CliError(f"{args.metrics}: no metric records")
    env = load_envelope(peaks, cfg.effective_mass_kg)
    _emit(reporting.json_text(env.to_dict()), cfg, "envelope.json")
    return EXIT_OK


def cmd_make_dataset(args, cfg):
    write_dataset(args.directory, omega=args.omega, seed=args.seed)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing

def _add_global_flags(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--geometry", dest="geometry_path", metavar="PATH", default=d(None),
                        help="screw geometry JSON (default: bundled constants)")
    parser.add_argument("--media-lib", dest="media_library_path", metavar="PATH",
                        default=d(None), help="media library JSON")
    parser.add_argument("--cutoff-hz", dest="filter_cutoff_hz", type=float, metavar="F",
                        default=d(5.0), help="low-pass cutoff (default 5 Hz)")
    parser.add_argument("--mass-kg", dest="effective_mass_kg", type=float, metavar="F",
                        default=d(1.1), help="effective mass for the load envelope")
    parser.add_argument("--radius-mm", dest="effective_radius_mm", type=float, metavar="F",
                        default=d(None), help="effective blade radius (default: mean radius)")
    parser.add_argument("--format", dest="output_format", choices=("csv", "json"),
                        default=d("csv"))
    parser.add_argument("--out", dest="out_dir", metavar="DIR", default=d(None))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="screwprop",
        description="Variable angle-of-attack screw propulsion analysis.")
    _add_global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _add_global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("process", cmd_process, "tare, filter, clip trials and compute metrics")
    p.add_argument("inputs", nargs="+", help="trial CSV files or directories")
    p.add_argument("--baseline", metavar="PATH",
                   help="baseline CSV for all trials (default: <trial>.baseline.csv)")
    p.add_argument("--clip-ranges", metavar="PATH",
                   help="manual clip sidecar CSV (trial_id,start_sample,end_sample)")

    p = add("fit", cmd_fit, "fit media parameters from a metrics table")
    p.add_argument("metrics", help="metrics table (CSV or JSON)")

    p = add("predict", cmd_predict, "predicted velocity/efficiency versus angle")
    p.add_argument("media", nargs="*", help="media names (default: all in library)")
    p.add_argument("--omega", type=float, required=True, help="screw speed, rad/s")
    p.add_argument("--angles", help="comma-separated angles in degrees")
    p.add_argument("--step", type=float, default=1.0, help="angle step when --angles absent")

    p = add("plan", cmd_plan, "choose the angle of attack for an objective")
    p.add_argument("media")
    p.add_argument("--lambda", dest="weight", type=float, required=True,
                   help="velocity weight in [0, 1]")
    p.add_argument("--omega", type=float, required=True, help="screw speed, rad/s")

    p = add("pareto", cmd_pareto, "velocity/efficiency Pareto front")
    p.add_argument("media")
    p.add_argument("--omega", type=float, required=True, help="screw speed, rad/s")
    p.add_argument("--grid-step", type=float, default=1.0, help="degrees, in (0, 5]")

    p = add("envelope", cmd_envelope, "structural load envelope from a metrics table")
    p.add_argument("metrics")

    p = add("make-dataset", cmd_make_dataset, "write the synthetic reference trials")
    p.add_argument("directory")
    p.add_argument("--omega", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=2024)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(**{k: getattr(args, k) for k in RunConfig.__dataclass_fields__})
    try:
        return args.func(args, cfg)
    except CliError as exc:
        print(f"screwprop {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (MalformedInputError, DegenerateParametersError, ValueError) as exc:
        print(f"screwprop {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"screwprop {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
