"""Small input validation helpers shared by the estimators and functions."""

import numbers

import numpy as np

from .exceptions import DomainError


def as_degrees(angle):
    """Return an angle as plain degrees (float or float ndarray).

    Accepts an :class:`~screwprop.kinematics.AngleOfAttack`, a real number,
    or an array-like of degrees.
    """
    deg = getattr(angle, "degrees", angle)
    if isinstance(deg, numbers.Real):
        return float(deg)
    return np.asarray(deg, dtype=float)


def check_angle_domain(degrees, name="angle"):
    """Raise DomainError unless every value lies in [0, 90) degrees."""
    arr = np.asarray(degrees, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(arr < 0.0) or np.any(arr >= 90.0):
        raise DomainError(f"{name} must lie in [0, 90) degrees, got {degrees!r}")
    return degrees


def check_finite(value, name="value"):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return value


def check_positive(value, name="value", strict=True):
    check_finite(value, name)
    arr = np.asarray(value, dtype=float)
    bad = arr <= 0.0 if strict else arr < 0.0
    if np.any(bad):
        bound = "> 0" if strict else ">= 0"
        raise DomainError(f"{name} must be {bound}, got {value!r}")
    return value


def check_channel(values, n_samples, name, width=None):
    """Coerce a per-sample channel to float ndarray and check its shape."""
    arr = np.asarray(values, dtype=float)
    expected = (n_samples,) if width is None else (n_samples, width)
    if arr.shape != expected:
        raise ValueError(f"{name} has shape {arr.shape}, expected {expected}")
    return arr
