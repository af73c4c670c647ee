"""Angle-of-attack selection and the velocity/efficiency Pareto front."""

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import OPERATIONAL_RANGE_DEG, AngleOfAttack, length_from_angle
from .media import predict_efficiency, predict_velocity
from .validation import check_positive

SCAN_STEP_DEG = 0.5
REFINE_TOL_DEG = 0.01
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Objective:
    """Weight on velocity; 1 is pure speed, 0 pure efficiency."""

    velocity_weight: float

    def __post_init__(self):
        if not 0.0 <= self.velocity_weight <= 1.0:
            raise ValueError("velocity_weight must lie in [0, 1]")


@dataclass(frozen=True)
class ParetoPoint:
    angle: AngleOfAttack
    velocity: float
    efficiency: float


@dataclass(frozen=True)
class Plan:
    media: str
    velocity_weight: float
    angle: AngleOfAttack
    actuator_length_mm: float
    clamped: bool
    predicted_velocity: float
    predicted_efficiency: float

    def to_dict(self):
        return {
            "media": self.media,
            "lambda": self.velocity_weight,
            "angle_deg": self.angle.degrees,
            "actuator_length_mm": self.actuator_length_mm,
            "clamped": self.clamped,
            "predicted_velocity_m_s": self.predicted_velocity,
            "predicted_efficiency": self.predicted_efficiency,
        }


def _dominates(a, b):
    return (a[0] >= b[0] and a[1] >= b[1]) and (a[0] > b[0] or a[1] > b[1])


def pareto_front(media, geometry, omega, grid_step=5.0, effective_radius=None):
    """Non-dominated (velocity, efficiency) points over the operating range.

    The grid is ``10 + k * grid_step`` for ``k = 0 .. floor(25 / grid_step)``.
    Identical points collapse to the lowest angle. Output is sorted by angle.
    """
    if not 0.0 < grid_step <= 5.0:
        raise ValueError("grid_step must lie in (0, 5] degrees")
    check_positive(omega, "omega")
    lo, hi = OPERATIONAL_RANGE_DEG
    n = int(math.floor((hi - lo) / grid_step + 1e-9)) + 1
    angles = lo + grid_step * np.arange(n)
    v = np.asarray(predict_velocity(media, geometry, angles, omega, effective_radius))
    eta = np.asarray(predict_efficiency(media, geometry, angles, omega, effective_radius))
    pts = list(zip(v.tolist(), eta.tolist()))

    front = []
    seen = set()
    for i, p in enumerate(pts):
        if p in seen:
            continue
        if any(_dominates(q, p) for j, q in enumerate(pts) if j != i):
            continue
        seen.add(p)
        front.append(ParetoPoint(AngleOfAttack(float(angles[i])), p[0], p[1]))
    return front


def _golden_max(f, a, b, tol):
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def maximize_weighted(velocity_fn, efficiency_fn, weight, lo=OPERATIONAL_RANGE_DEG[0],
                      hi=OPERATIONAL_RANGE_DEG[1], scan_step=SCAN_STEP_DEG,
                      tol=REFINE_TOL_DEG):
    """Angle maximising ``w * v/v_max + (1 - w) * eta/eta_max`` on [lo, hi].

    Channel maxima come from a 0.01 degree sweep; a channel whose maximum is
    not positive contributes nothing. A coarse scan picks a bracket which
    golden-section search refines; the refined angle replaces the scan
    winner only if strictly better, so exact ties resolve to the lower angle.
    Both functions must accept an ndarray of degrees.
    """
    sweep = np.linspace(lo, hi, int(round((hi - lo) / 0.01)) + 1)
    v_max = float(np.max(velocity_fn(sweep)))
    e_max = float(np.max(efficiency_fn(sweep)))
    wv = weight / v_max if v_max > 0 else 0.0
    we = (1.0 - weight) / e_max if e_max > 0 else 0.0

    def score(theta):
        return wv * np.asarray(velocity_fn(theta)) + we * np.asarray(efficiency_fn(theta))

    n = int(math.floor((hi - lo) / scan_step + 1e-9))
    grid = np.append(lo + scan_step * np.arange(n + 1), hi)
    grid = np.unique(np.minimum(grid, hi))
    scores = score(grid)
    k = int(np.argmax(scores))
    best_theta, best_score = float(grid[k]), float(scores[k])

    a = float(grid[max(k - 1, 0)])
    b = float(grid[min(k + 1, grid.size - 1)])
    if b > a:
        theta, value = _golden_max(lambda t: float(score(np.array([t]))[0]), a, b, tol)
        if value > best_score:
            best_theta, best_score = theta, value
    return best_theta, best_score


def choose_angle(media, geometry, omega, objective, effective_radius=None):
    """Best operating angle for ``objective`` with its predicted (v, eta).

    Returns ``(angle, velocity, efficiency)``.
    """
    check_positive(omega, "omega")
    weight = getattr(objective, "velocity_weight", objective)
    Objective(weight)
    vel = lambda th: predict_velocity(media, geometry, th, omega, effective_radius)
    eff = lambda th: predict_efficiency(media, geometry, th, omega, effective_radius)
    theta, _ = maximize_weighted(vel, eff, weight)
    return AngleOfAttack(theta), float(vel(theta)), float(eff(theta))


def angle_to_actuator_length(theta, geometry):
    """Actuator command (mm) for ``theta``, clamped to the stroke.

    Returns ``(length_mm, clamped)``.
    """
    angle = theta if isinstance(theta, AngleOfAttack) else AngleOfAttack(theta)
    if not angle.operational:
        raise ValueError(f"angle {angle.degrees} outside the operating range")
    raw = length_from_angle(geometry, angle)
    length = min(max(raw, geometry.min_length), geometry.max_length)
    return length, length != raw


def plan(media, geometry, omega, objective, effective_radius=None):
    """:func:`choose_angle` plus the actuator command, as a :class:`Plan`."""
    angle, v, eta = choose_angle(media, geometry, omega, objective, effective_radius)
    length, clamped = angle_to_actuator_length(angle, geometry)
    weight = getattr(objective, "velocity_weight", objective)
    return Plan(media.name, float(weight), angle, length, clamped, v, eta)
