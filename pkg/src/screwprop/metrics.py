"""Per-trial locomotion metrics and the structural load envelope."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import InvalidTrialError
from .kinematics import AngleOfAttack
from .pipeline import TrialLog, gravity_augment

THRUST_AXIS = 2  # +Z is forward
SCREW_TORQUE_AXIS = 2

METRIC_COLUMNS = ("media_name", "commanded_angle_deg", "v_avg_m_s", "f_thrust_max_N",
                  "tau_avg_Nm", "omega_avg_rad_s", "efficiency")


def locomotive_efficiency(f_thrust, v, tau_in, omega):
    """Propulsive power over input shaft power, (F * v) / (tau * omega).

    Negative values (net braking) are returned unclamped.
    """
    if not omega > 0:
        raise InvalidTrialError(f"angular velocity must be > 0, got {omega}")
    if tau_in == 0:
        raise InvalidTrialError("input torque is zero")
    return (f_thrust * v) / (tau_in * omega)


@dataclass(frozen=True)
class TrialMetrics:
    v_avg: float
    f_thrust_max: float
    tau_avg: float
    omega_avg: float
    efficiency: float
    media_name: str
    commanded_angle: AngleOfAttack

    def to_dict(self):
        return {
            "media_name": self.media_name,
            "commanded_angle_deg": self.commanded_angle.degrees,
            "v_avg_m_s": self.v_avg,
            "f_thrust_max_N": self.f_thrust_max,
            "tau_avg_Nm": self.tau_avg,
            "omega_avg_rad_s": self.omega_avg,
            "efficiency": self.efficiency,
        }

    @classmethod
    def from_dict(cls, row):
        return cls(v_avg=float(row["v_avg_m_s"]),
                   f_thrust_max=float(row["f_thrust_max_N"]),
                   tau_avg=float(row["tau_avg_Nm"]),
                   omega_avg=float(row["omega_avg_rad_s"]),
                   efficiency=float(row["efficiency"]),
                   media_name=str(row["media_name"]),
                   commanded_angle=AngleOfAttack(float(row["commanded_angle_deg"])))


def trial_metrics(clipped):
    """Summarise a steady-state log.

    Velocity is net carriage displacement over elapsed time, so a carriage
    moving toward +position gives positive ``v_avg``. Thrust is the largest
    +Z force sample; torque is the mean about the screw (Z) axis.
    """
    if clipped.position is None:
        raise InvalidTrialError("trial has no carriage position channel")
    t, pos = clipped.timestamps, clipped.position
    v_avg = float((pos[-1] - pos[0]) / (t[-1] - t[0]))
    f_max = float(np.max(clipped.force[:, THRUST_AXIS]))
    tau = float(np.mean(clipped.torque[:, SCREW_TORQUE_AXIS]))
    omega = float(np.mean(clipped.omega))
    if not omega > 0:
        raise InvalidTrialError(f"mean angular velocity must be > 0, got {omega}")
    eta = locomotive_efficiency(f_max, v_avg, tau, omega)
    return TrialMetrics(v_avg, f_max, tau, omega, float(eta),
                        clipped.media_name, clipped.commanded_angle)


def peak_forces(log):
    """Per-axis force sample of largest magnitude, sign kept."""
    idx = np.argmax(np.abs(log.force), axis=0)
    return log.force[idx, np.arange(3)].copy()


@dataclass(frozen=True, eq=False)
class LoadEnvelope:
    applied_force_xyz: np.ndarray
    magnitude: float
    effective_mass: float

    def to_dict(self):
        return {
            "applied_force_xyz_N": [float(v) for v in self.applied_force_xyz],
            "magnitude_N": self.magnitude,
            "effective_mass_kg": self.effective_mass,
        }


def load_envelope(trial_peaks, effective_mass=1.1):
    """Worst-case design load across trials.

    Y and Z take the largest-magnitude peak with its sign. X (down) takes
    the peak whose magnitude is largest once the unit's weight is added
    back, so the envelope never shrinks when trials are added.
    """
    peaks = np.asarray(trial_peaks, dtype=float).reshape(-1, 3)
    if peaks.shape[0] == 0:
        raise ValueError("need at least one peak vector")
    loaded_x = gravity_augment(peaks[:, 0], effective_mass)
    applied = np.array([
        loaded_x[np.argmax(np.abs(loaded_x))],
        peaks[np.argmax(np.abs(peaks[:, 1])), 1],
        peaks[np.argmax(np.abs(peaks[:, 2])), 2],
    ])
    return LoadEnvelope(applied, float(np.linalg.norm(applied)), float(effective_mass))


class TrialMetricsExtractor(BaseEstimator, TransformerMixin):
    """Final pipeline step: clipped log(s) to :class:`TrialMetrics`."""

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        if isinstance(X, TrialLog):
            return trial_metrics(X)
        return [trial_metrics(log) for log in X]
