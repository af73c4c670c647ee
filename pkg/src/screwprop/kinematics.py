"""Actuator length <-> blade angle of attack, and ideal screw advance.

Units are fixed: lengths in mm, angles in degrees, velocities in m/s.
Degrees are converted to radians only inside the trig calls.
"""

import json
from dataclasses import asdict, dataclass
from importlib import resources
from math import asin, degrees, pi, radians, sin

import numpy as np

from .exceptions import DomainError
from .validation import as_degrees, check_angle_domain, check_positive

OPERATIONAL_RANGE_DEG = (10.0, 35.0)

_JSON_FIELDS = {
    "root_radius": "root_radius_mm",
    "outer_radius": "outer_radius_mm",
    "plate_offset_d0": "plate_offset_d0_mm",
    "strut_length_l": "strut_length_l_mm",
    "min_length": "min_length_mm",
    "max_length": "max_length_mm",
    "thread_starts": "thread_starts",
}


@dataclass(frozen=True)
class ScrewGeometry:
    """Physical constants of the reconfigurable screw unit (mm)."""

    root_radius: float = 192.0
    outer_radius: float = 272.0
    plate_offset_d0: float = 31.0
    strut_length_l: float = 100.0
    min_length: float = 48.0
    max_length: float = 88.0
    thread_starts: int = 6

    def __post_init__(self):
        if not 0 < self.root_radius < self.outer_radius:
            raise ValueError("need 0 < root_radius < outer_radius")
        if self.plate_offset_d0 <= 0 or self.strut_length_l <= 0:
            raise ValueError("plate_offset_d0 and strut_length_l must be positive")
        if not (self.plate_offset_d0 <= self.min_length < self.max_length
                <= self.plate_offset_d0 + self.strut_length_l):
            raise ValueError("need d0 <= min_length < max_length <= d0 + l")
        if int(self.thread_starts) != self.thread_starts or self.thread_starts < 1:
            raise ValueError("thread_starts must be a positive integer")

    @property
    def effective_radius(self):
        """Mean of root and outer radius; the default radius for advance."""
        return 0.5 * (self.root_radius + self.outer_radius)

    def to_dict(self):
        return {_JSON_FIELDS[k]: v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, doc):
        inverse = {v: k for k, v in _JSON_FIELDS.items()}
        unknown = set(doc) - set(inverse)
        if unknown:
            raise ValueError(f"unknown geometry fields: {sorted(unknown)}")
        missing = set(inverse) - set(doc)
        if missing:
            raise ValueError(f"missing geometry fields: {sorted(missing)}")
        kwargs = {inverse[k]: v for k, v in doc.items()}
        kwargs["thread_starts"] = int(kwargs["thread_starts"])
        return cls(**kwargs)

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def default(cls):
        """Geometry loaded from the bundled default document."""
        text = resources.files("screwprop").joinpath(
            "data/geometry_default.json").read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, order=True)
class AngleOfAttack:
    """Blade lead angle in degrees, valid on [0, 90)."""

    degrees: float

    def __post_init__(self):
        check_angle_domain(self.degrees)
        object.__setattr__(self, "degrees", float(self.degrees))

    @property
    def radians(self):
        return radians(self.degrees)

    @property
    def operational(self):
        """True inside the hardware's adjustable range of 10-35 degrees."""
        lo, hi = OPERATIONAL_RANGE_DEG
        return lo <= self.degrees <= hi

    def __float__(self):
        return self.degrees


def angle_from_length(geometry, d):
    """Angle of attack produced by a plate separation of ``d`` mm."""
    ratio = (d - geometry.plate_offset_d0) / geometry.strut_length_l
    if not 0.0 <= ratio <= 1.0:
        raise DomainError(
            f"length {d} mm outside [{geometry.plate_offset_d0}, "
            f"{geometry.plate_offset_d0 + geometry.strut_length_l}] mm")
    theta = degrees(asin(ratio))
    if theta >= 90.0:
        # d == d0 + l exactly; the angle type is half-open
        raise DomainError("length gives a 90 degree angle, outside [0, 90)")
    return AngleOfAttack(theta)


def length_from_angle(geometry, theta):
    """Plate separation (mm) that sets angle ``theta``: d0 + l*sin(theta)."""
    deg = as_degrees(theta)
    check_angle_domain(deg)
    return geometry.plate_offset_d0 + geometry.strut_length_l * sin(radians(deg))


def lead_per_revolution(theta, effective_radius):
    """Axial advance per revolution with no slip, 2*pi*r*tan(theta), in mm."""
    deg = as_degrees(theta)
    check_angle_domain(deg)
    check_positive(effective_radius, "effective_radius")
    lead = 2.0 * pi * effective_radius * np.tan(np.radians(deg))
    return float(lead) if np.ndim(lead) == 0 else lead


def no_slip_velocity(theta, effective_radius, omega):
    """Ideal forward speed in m/s for screw speed ``omega`` (rad/s).

    ``theta`` and ``omega`` may be arrays; the result broadcasts.
    """
    deg = as_degrees(theta)
    check_angle_domain(deg)
    check_positive(effective_radius, "effective_radius")
    check_positive(omega, "omega", strict=False)
    v = np.asarray(omega, dtype=float) * (effective_radius / 1000.0) * np.tan(np.radians(deg))
    return float(v) if np.ndim(v) == 0 else v


def operational_length_range(geometry):
    """Angles (deg) at the geometry's min and max actuator lengths."""
    return (angle_from_length(geometry, geometry.min_length).degrees,
            angle_from_length(geometry, geometry.max_length).degrees)
