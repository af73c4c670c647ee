"""Test-bed telemetry: trial logs, CSV I/O and the processing chain.

The chain mirrors the bench procedure: zero against the set-down baseline,
smooth with a zero-phase low-pass, then keep only the steady-state run.
Each step exists as a plain function and as a scikit-learn style
transformer so the steps compose with :class:`sklearn.pipeline.Pipeline`.
"""

import csv
import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DomainError, MalformedInputError, NoSteadyStateError
from .kinematics import AngleOfAttack
from .validation import check_channel, check_finite

GRAVITY = 9.81

CSV_COLUMNS = ("t_s", "fx_N", "fy_N", "fz_N", "tx_Nm", "ty_Nm", "tz_Nm",
               "omega_rad_s", "pos_m")
BASELINE_COLUMNS = ("phase", "fx_N", "fy_N", "fz_N", "tx_Nm", "ty_Nm", "tz_Nm")
BASELINE_PHASES = ("free_hanging", "set_down")

_TIMING_JITTER = 0.01


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TrialLog:
    """One test-bed trial sampled at a fixed rate.

    Force and torque are (n, 3) arrays in the sensor frame: +X down (with
    gravity), +Y right, +Z forward along the screw axis. ``position`` is the
    carriage position in metres and may be ``None`` when not recorded.
    """

    sample_rate: float
    timestamps: np.ndarray
    force: np.ndarray
    torque: np.ndarray
    omega: np.ndarray
    position: Optional[np.ndarray]
    media_name: str
    commanded_angle: AngleOfAttack

    def __post_init__(self):
        if not self.sample_rate > 0 or not math.isfinite(self.sample_rate):
            raise ValueError("sample_rate must be positive and finite")
        t = np.asarray(self.timestamps, dtype=float)
        n = t.shape[0] if t.ndim == 1 else -1
        if n < 2:
            raise ValueError("a trial log needs a 1-D timestamp array of length >= 2")
        object.__setattr__(self, "timestamps", _frozen(t))
        object.__setattr__(self, "force", _frozen(check_channel(self.force, n, "force", 3)))
        object.__setattr__(self, "torque", _frozen(check_channel(self.torque, n, "torque", 3)))
        object.__setattr__(self, "omega", _frozen(check_channel(self.omega, n, "omega")))
        if self.position is not None:
            object.__setattr__(self, "position",
                               _frozen(check_channel(self.position, n, "position")))
        angle = self.commanded_angle
        if not isinstance(angle, AngleOfAttack):
            object.__setattr__(self, "commanded_angle", AngleOfAttack(angle))

        dt = np.diff(self.timestamps)
        if np.any(dt <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if np.any(np.abs(dt * self.sample_rate - 1.0) > _TIMING_JITTER):
            raise ValueError("timestamps inconsistent with sample_rate beyond 1% jitter")

    def __len__(self):
        return self.timestamps.shape[0]

    @property
    def duration(self):
        return float(self.timestamps[-1] - self.timestamps[0])

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def slice(self, start, stop):
        """Samples ``start:stop`` as a new log."""
        sl = slice(start, stop)
        return self.replace(
            timestamps=self.timestamps[sl],
            force=self.force[sl],
            torque=self.torque[sl],
            omega=self.omega[sl],
            position=None if self.position is None else self.position[sl],
        )

    def wrench(self):
        """(n, 6) array of force then torque."""
        return np.hstack([self.force, self.torque])


@dataclass(frozen=True, eq=False)
class BaselinePair:
    """Free-hanging and set-down sensor snapshots, each [fx, fy, fz, tx, ty, tz]."""

    free_hanging: np.ndarray
    set_down: np.ndarray

    def __post_init__(self):
        for name in ("free_hanging", "set_down"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (6,):
                raise ValueError(f"{name} must have 6 components, got shape {arr.shape}")
            check_finite(arr, name)
            object.__setattr__(self, name, _frozen(arr))

    @classmethod
    def zeros(cls):
        return cls(np.zeros(6), np.zeros(6))


# --------------------------------------------------------------------------
# processing steps

def tare(log, baseline):
    """Subtract the set-down baseline from every force/torque sample."""
    if not len(log):
        raise ValueError("empty log")
    ref = np.asarray(baseline.set_down, dtype=float)
    if ref.shape != (6,):
        raise ValueError(f"baseline has shape {ref.shape}, expected (6,)")
    check_finite(ref, "baseline")
    return log.replace(force=log.force - ref[:3], torque=log.torque - ref[3:])


def baseline_drift(current, previous):
    """Free-hanging drift since the previous trial (diagnostic only, never applied)."""
    return np.asarray(current.free_hanging) - np.asarray(previous.free_hanging)


def settling_samples(sample_rate, cutoff):
    """Samples in one cutoff period; used as the reflection pad length."""
    return int(math.ceil(sample_rate / cutoff))


def butter_zero_phase(x, cutoff, sample_rate, order=2, axis=0):
    """Forward-backward Butterworth low-pass along ``axis``.

    Edges are padded by odd reflection over one settling length so the
    output has unit DC gain and no phase lag.
    """
    nyquist = 0.5 * sample_rate
    if not 0.0 < cutoff < nyquist:
        raise DomainError(f"cutoff {cutoff} Hz must lie in (0, {nyquist}) Hz")
    x = np.asarray(x, dtype=float)
    b, a = signal.butter(order, cutoff, btype="low", fs=sample_rate)
    padlen = min(settling_samples(sample_rate, cutoff), x.shape[axis] - 1)
    return signal.filtfilt(b, a, x, axis=axis, padtype="odd", padlen=padlen)


def lowpass(log, cutoff=5.0, order=2):
    """Zero-phase low-pass of the force, torque and angular-velocity channels.

    Carriage position is left untouched; velocity is later taken from its
    net displacement.
    """
    smooth = lambda x: butter_zero_phase(x, cutoff, log.sample_rate, order=order)
    return log.replace(force=smooth(log.force), torque=smooth(log.torque),
                       omega=smooth(log.omega))


def steady_state_range(log, threshold_fraction=0.9, guard_s=0.5):
    """Half-open sample range [start, stop) judged to be steady state.

    Keeps the span from where omega first reaches ``threshold_fraction`` of
    its median to where it last sits at or above that level, then drops a
    further ``guard_s`` seconds from each end.
    """
    omega = log.omega
    level = threshold_fraction * float(np.median(omega))
    if not level > 0:
        raise NoSteadyStateError("screw never spins up: median angular velocity <= 0")
    above = np.flatnonzero(omega >= level)
    if above.size == 0:
        raise NoSteadyStateError("angular velocity never reaches the steady-state level")
    t = log.timestamps
    t_first, t_last = t[above[0]], t[above[-1]]
    keep = np.flatnonzero((t >= t_first + guard_s) & (t <= t_last - guard_s))
    if keep.size == 0:
        raise NoSteadyStateError("no samples left after the guard trims")
    return int(keep[0]), int(keep[-1]) + 1


def clip_steady_state(log, manual_range=None, threshold_fraction=0.9, guard_s=0.5):
    """Keep only the steady-state portion of a trial.

    ``manual_range`` is a ``(start, stop)`` sample pair with ``stop``
    exclusive; it always overrides the automatic heuristic.
    """
    if manual_range is not None:
        start, stop = (int(i) for i in manual_range)
        if not 0 <= start < stop <= len(log):
            raise ValueError(f"manual range {manual_range} invalid for {len(log)} samples")
    else:
        start, stop = steady_state_range(log, threshold_fraction, guard_s)
    if stop - start < 2:
        raise NoSteadyStateError("steady-state slice shorter than two samples")
    return log.slice(start, stop)


def gravity_augment(force_x, effective_mass):
    """Add the unit's weight back onto a tared downward (+X) force."""
    if effective_mass < 0:
        raise ValueError("effective_mass must be >= 0")
    check_finite(force_x, "force_x")
    check_finite(effective_mass, "effective_mass")
    return force_x + effective_mass * GRAVITY


# --------------------------------------------------------------------------
# estimator-style wrappers

def _map_logs(func, X):
    if isinstance(X, TrialLog):
        return func(X)
    return [func(log) for log in X]


class Tare(BaseEstimator, TransformerMixin):
    """Transformer form of :func:`tare`.

    ``previous_baseline`` is optional; when given, :meth:`fit` stores the
    free-hanging drift in ``drift_`` for reporting.
    """

    def __init__(self, baseline=None, previous_baseline=None):
        self.baseline = baseline
        self.previous_baseline = previous_baseline

    def fit(self, X=None, y=None):
        baseline = self.baseline if self.baseline is not None else BaselinePair.zeros()
        self.baseline_ = baseline
        self.drift_ = (baseline_drift(baseline, self.previous_baseline)
                       if self.previous_baseline is not None else np.zeros(6))
        return self

    def transform(self, X):
        baseline = getattr(self, "baseline_", None) or self.baseline or BaselinePair.zeros()
        return _map_logs(lambda log: tare(log, baseline), X)


class LowPassFilter(BaseEstimator, TransformerMixin):
    def __init__(self, cutoff_hz=5.0, order=2):
        self.cutoff_hz = cutoff_hz
        self.order = order

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return _map_logs(lambda log: lowpass(log, self.cutoff_hz, self.order), X)


class SteadyStateClipper(BaseEstimator, TransformerMixin):
    def __init__(self, manual_range=None, threshold_fraction=0.9, guard_s=0.5):
        self.manual_range = manual_range
        self.threshold_fraction = threshold_fraction
        self.guard_s = guard_s

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return _map_logs(
            lambda log: clip_steady_state(log, self.manual_range,
                                          self.threshold_fraction, self.guard_s), X)


# --------------------------------------------------------------------------
# CSV I/O

def _parse_float(text, path, line, column):
    try:
        value = float(text)
    except ValueError:
        raise MalformedInputError(f"column {column!r}: not a number: {text!r}",
                                  path, line) from None
    if not math.isfinite(value):
        raise MalformedInputError(f"column {column!r}: non-finite value {text!r}", path, line)
    return value


def read_trial_csv(path, sample_rate=None, media_name=None, commanded_angle=None):
    """Read a trial log CSV.

    Metadata comes from ``#key=value`` comment lines (``media_name``,
    ``commanded_angle_deg``, ``sample_rate_hz``); keyword arguments fill in
    anything the file does not carry. An entirely empty ``pos_m`` column
    yields ``position=None``.
    """
    meta = {}
    rows = []
    header = None
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            fields = [f.strip() for f in next(csv.reader([line]))]
            if header is None:
                if tuple(fields) != CSV_COLUMNS:
                    raise MalformedInputError(
                        f"header must be {','.join(CSV_COLUMNS)}", path, lineno)
                header = fields
                continue
            if len(fields) != len(CSV_COLUMNS):
                raise MalformedInputError(
                    f"expected {len(CSV_COLUMNS)} fields, got {len(fields)}", path, lineno)
            rows.append((lineno, fields))
    if header is None:
        raise MalformedInputError("missing header row", path)

    data = np.empty((len(rows), 8))
    pos = []
    for i, (lineno, fields) in enumerate(rows):
        for j in range(8):
            data[i, j] = _parse_float(fields[j], path, lineno, CSV_COLUMNS[j])
        pos.append((lineno, fields[8]))
    present = [p for _, p in pos if p != ""]
    if not present:
        position = None
    elif len(present) != len(pos):
        lineno = next(ln for ln, p in pos if p == "")
        raise MalformedInputError("pos_m missing on some rows only", path, lineno)
    else:
        position = np.array([_parse_float(p, path, ln, "pos_m") for ln, p in pos])
    if len(rows) < 2:
        raise MalformedInputError("need at least two samples", path)

    try:
        rate = float(meta["sample_rate_hz"]) if "sample_rate_hz" in meta else sample_rate
        name = meta.get("media_name", media_name)
        angle = (float(meta["commanded_angle_deg"]) if "commanded_angle_deg" in meta
                 else commanded_angle)
    except ValueError as exc:
        raise MalformedInputError(f"bad metadata: {exc}", path) from None
    if rate is None:
        rate = 1.0 / float(np.median(np.diff(data[:, 0])))
    if name is None or angle is None:
        raise MalformedInputError("media_name and commanded_angle_deg metadata required", path)
    try:
        return TrialLog(sample_rate=rate, timestamps=data[:, 0], force=data[:, 1:4],
                        torque=data[:, 4:7], omega=data[:, 7], position=position,
                        media_name=name, commanded_angle=angle)
    except ValueError as exc:
        raise MalformedInputError(str(exc), path) from None


def write_trial_csv(log, path, extra_meta=None):
    """Write a log in the ingest schema at full round-trip precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"#media_name={log.media_name}\n")
        fh.write(f"#commanded_angle_deg={log.commanded_angle.degrees!r}\n")
        fh.write(f"#sample_rate_hz={float(log.sample_rate)!r}\n")
        for key, value in (extra_meta or {}).items():
            fh.write(f"#{key}={value}\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        cols = np.column_stack([log.timestamps, log.force, log.torque, log.omega])
        for i, row in enumerate(cols):
            pos = "" if log.position is None else repr(float(log.position[i]))
            fh.write(",".join(repr(float(v)) for v in row) + "," + pos + "\n")


def read_baseline_csv(path):
    """Read a two-row baseline file (free_hanging then set_down)."""
    found = {}
    header = None
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in next(csv.reader([line]))]
            if header is None:
                if tuple(fields) != BASELINE_COLUMNS:
                    raise MalformedInputError(
                        f"header must be {','.join(BASELINE_COLUMNS)}", path, lineno)
                header = fields
                continue
            if len(fields) != len(BASELINE_COLUMNS):
                raise MalformedInputError(
                    f"expected {len(BASELINE_COLUMNS)} fields, got {len(fields)}", path, lineno)
            phase = fields[0]
            if phase not in BASELINE_PHASES:
                raise MalformedInputError(f"unknown phase {phase!r}", path, lineno)
            if phase in found:
                raise MalformedInputError(f"duplicate phase {phase!r}", path, lineno)
            if phase == "set_down" and "free_hanging" not in found:
                raise MalformedInputError("free_hanging row must precede set_down", path, lineno)
            found[phase] = np.array([_parse_float(v, path, lineno, c)
                                     for v, c in zip(fields[1:], BASELINE_COLUMNS[1:])])
    if header is None:
        raise MalformedInputError("missing header row", path)
    missing = [p for p in BASELINE_PHASES if p not in found]
    if missing:
        raise MalformedInputError(f"missing phase rows: {missing}", path)
    return BaselinePair(found["free_hanging"], found["set_down"])


def write_baseline_csv(baseline, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(BASELINE_COLUMNS) + "\n")
        for phase in BASELINE_PHASES:
            values = getattr(baseline, phase)
            fh.write(phase + "," + ",".join(repr(float(v)) for v in values) + "\n")
