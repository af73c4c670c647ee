"""Deterministic synthetic test-bed trials.

Generates raw trial CSVs (with baseline offsets, ramps and sensor noise)
from known media parameters, for demos and end-to-end tests. The bundled
reference set is built so that mud is the most efficient medium, then big
gravel, then small gravel, while sand barely moves.
"""

import os

import numpy as np

from .kinematics import ScrewGeometry
from .media import MediaParams, predict_thrust, predict_torque, predict_velocity
from .pipeline import BaselinePair, TrialLog, write_baseline_csv, write_trial_csv

TEST_ANGLES_DEG = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0)

REFERENCE_MEDIA = (
    MediaParams("big_gravel", 0.10, 0.012, 24.0, 0.60, 0.240),
    MediaParams("mud", 0.05, 0.011, 30.0, 0.60, 0.225),
    MediaParams("sand", 0.965, 0.0005, 20.0, 0.90, 0.210),
    MediaParams("small_gravel", 0.15, 0.012, 20.0, 0.75, 0.240),
)


def make_trial(media, angle_deg, omega=3.0, geometry=None, effective_radius=None,
               duration=8.0, sample_rate=125.0, ramp_s=1.0, seed=0):
    """One raw trial plus the baseline pair it was recorded against."""
    geometry = geometry or ScrewGeometry()
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    ramp = np.clip(t / ramp_s, 0.0, 1.0) * np.clip((t[-1] - t) / ramp_s, 0.0, 1.0)

    w = omega * ramp * (1.0 + 0.005 * rng.standard_normal(n))
    w = np.maximum(w, 0.0)
    v = predict_velocity(media, geometry, angle_deg, 1.0, effective_radius) * w
    position = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) / sample_rate)])
    position += 1e-4 * rng.standard_normal(n)

    thrust = predict_thrust(media, angle_deg)
    torque = predict_torque(media, angle_deg)
    blade = np.sin(2 * np.pi * 15.0 * t)  # blade-passage ripple, above the cutoff
    fz = thrust * ramp * (1.0 + 0.10 * blade) + 0.01 * thrust * rng.standard_normal(n)
    fx = -0.3 * thrust * ramp + 0.05 * rng.standard_normal(n)
    fy = 0.4 * thrust * ramp * np.sin(omega * t) + 0.05 * rng.standard_normal(n)
    tz = torque * ramp + 0.01 * torque * rng.standard_normal(n)
    tx = 0.02 * rng.standard_normal(n)
    ty = 0.02 * rng.standard_normal(n)

    set_down = np.round(rng.normal(0.0, 1.5, 6), 3)
    free_hanging = set_down + np.round(rng.normal(0.0, 0.2, 6), 3)
    baseline = BaselinePair(free_hanging, set_down)
    force = np.column_stack([fx, fy, fz]) + set_down[:3]
    tq = np.column_stack([tx, ty, tz]) + set_down[3:]
    log = TrialLog(sample_rate, t, force, tq, w, position, media.name, angle_deg)
    return log, baseline


def trial_id(media_name, angle_deg):
    return f"{media_name}_{int(round(angle_deg)):02d}deg"


def write_dataset(out_dir, media=REFERENCE_MEDIA, angles=TEST_ANGLES_DEG, omega=3.0,
                  seed=2024):
    """Write one trial and baseline file per (media, angle); returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i, m in enumerate(media):
        for j, angle in enumerate(angles):
            log, baseline = make_trial(m, angle, omega=omega, seed=seed + 100 * i + j)
            tid = trial_id(m.name, angle)
            path = os.path.join(out_dir, tid + ".csv")
            write_trial_csv(log, path)
            write_baseline_csv(baseline, os.path.join(out_dir, tid + ".baseline.csv"))
            paths.append(path)
    return paths
