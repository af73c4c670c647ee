"""Low-order screw/media interaction model and its per-media fit.

Slip grows linearly with angle, thrust is cosine-scaled and reduced by
slip, and input torque is affine in angle::

    s(theta)   = clip(s_a + s_b * theta, 0, 1)
    v(theta)   = omega * r * tan(theta) * (1 - s(theta))
    F(theta)   = f_0 * cos(theta) * (1 - s(theta))
    tau(theta) = c_0 + c_1 * theta
    eta        = F * v / (tau * omega)

With ``f_0 > 0``, ``s_b >= 0``, ``c_1 > 0`` and ``s(35) < 1`` velocity
rises and efficiency falls across the operating range.
"""

import json
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DegenerateParametersError, TooFewObservationsError
from .kinematics import AngleOfAttack, ScrewGeometry, no_slip_velocity
from .validation import as_degrees, check_angle_domain, check_positive

PARAM_NAMES = ("slip_base", "slip_slope", "thrust_scale", "torque_base", "torque_slope")
_JSON_FIELDS = {
    "slip_base": "slip_base",
    "slip_slope": "slip_slope_per_deg",
    "thrust_scale": "thrust_scale_N",
    "torque_base": "torque_base_Nm",
    "torque_slope": "torque_slope_Nm_per_deg",
}
_LOWER = np.array([0.0, 0.0, 0.0, 0.0, 0.0])
_UPPER = np.array([1.0, np.inf, np.inf, np.inf, np.inf])


@dataclass(frozen=True)
class MediaParams:
    name: str
    slip_base: float
    slip_slope: float
    thrust_scale: float
    torque_base: float
    torque_slope: float

    def __post_init__(self):
        if not 0.0 <= self.slip_base <= 1.0:
            raise ValueError("slip_base must lie in [0, 1]")
        for attr in PARAM_NAMES[1:]:
            value = getattr(self, attr)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{attr} must be finite and >= 0")
        for attr in PARAM_NAMES:
            object.__setattr__(self, attr, float(getattr(self, attr)))

    def slip(self, theta):
        deg = as_degrees(theta)
        s = np.clip(self.slip_base + self.slip_slope * np.asarray(deg, dtype=float), 0.0, 1.0)
        return float(s) if np.ndim(s) == 0 else s

    def as_vector(self):
        return np.array([getattr(self, k) for k in PARAM_NAMES])

    @classmethod
    def from_vector(cls, name, vec):
        return cls(name, *(float(v) for v in vec))

    def to_dict(self):
        doc = {"name": self.name}
        doc.update({_JSON_FIELDS[k]: getattr(self, k) for k in PARAM_NAMES})
        return doc

    @classmethod
    def from_dict(cls, doc):
        return cls(name=str(doc["name"]),
                   **{k: float(doc[_JSON_FIELDS[k]]) for k in PARAM_NAMES})


@dataclass(frozen=True)
class Observation:
    """One measured operating point.

    ``thrust`` and ``torque`` are optional; when every observation in a fit
    carries them the thrust scale and torque terms become identifiable
    individually rather than only through their ratio.
    """

    angle: AngleOfAttack
    omega: float
    v_measured: float
    efficiency_measured: float
    thrust: Optional[float] = None
    torque: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.angle, AngleOfAttack):
            object.__setattr__(self, "angle", AngleOfAttack(self.angle))
        if not self.angle.operational:
            raise ValueError(f"angle {self.angle.degrees} outside the 10-35 degree range")
        if not self.omega > 0:
            raise ValueError("omega must be > 0")

    @classmethod
    def from_metrics(cls, m):
        return cls(m.commanded_angle, m.omega_avg, m.v_avg, m.efficiency,
                   thrust=m.f_thrust_max, torque=m.tau_avg)


def _radius(geometry, effective_radius):
    return geometry.effective_radius if effective_radius is None else effective_radius


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def predict_velocity(media, geometry, theta, omega, effective_radius=None):
    """Forward speed (m/s): ideal advance reduced by slip."""
    deg = as_degrees(theta)
    v0 = no_slip_velocity(deg, _radius(geometry, effective_radius), omega)
    return _out(v0 * (1.0 - media.slip(deg)))


def predict_thrust(media, theta):
    deg = as_degrees(theta)
    check_angle_domain(deg)
    return _out(media.thrust_scale * np.cos(np.radians(deg)) * (1.0 - media.slip(deg)))


def predict_torque(media, theta):
    deg = as_degrees(theta)
    check_angle_domain(deg)
    return _out(media.torque_base + media.torque_slope * np.asarray(deg, dtype=float))


def predict_efficiency(media, geometry, theta, omega, effective_radius=None):
    check_positive(omega, "omega")
    deg = as_degrees(theta)
    tau = np.asarray(predict_torque(media, deg))
    if np.any(tau <= 0):
        raise DegenerateParametersError(
            f"media {media.name!r} predicts non-positive torque")
    v = predict_velocity(media, geometry, deg, omega, effective_radius)
    f = predict_thrust(media, deg)
    return _out(f * v / (tau * omega))


# --------------------------------------------------------------------------
# fitting

@dataclass
class FitReport:
    rmse_velocity: float
    rmse_efficiency: float
    iterations: int
    converged: bool
    objective: float
    initial_objective: float
    identifiable: bool
    rmse_thrust: Optional[float] = None
    rmse_torque: Optional[float] = None
    n_observations: int = 0

    def to_dict(self):
        return dict(self.__dict__)


def _stack(observations):
    theta = np.array([o.angle.degrees for o in observations])
    omega = np.array([o.omega for o in observations], dtype=float)
    v = np.array([o.v_measured for o in observations], dtype=float)
    eta = np.array([o.efficiency_measured for o in observations], dtype=float)
    has_ft = all(o.thrust is not None and o.torque is not None for o in observations)
    thrust = np.array([o.thrust for o in observations], dtype=float) if has_ft else None
    torque = np.array([o.torque for o in observations], dtype=float) if has_ft else None
    return theta, omega, v, eta, thrust, torque


def _channel_scale(x):
    m = float(np.max(np.abs(x)))
    return m if m > 0 else 1.0


def _initial_guess(theta, omega, radius_mm, v, eta, thrust, torque):
    """Closed-form starting point from per-channel linear fits."""
    v0 = omega * (radius_mm / 1000.0) * np.tan(np.radians(theta))
    slip = 1.0 - v / v0
    s_b, s_a = np.polyfit(theta, slip, 1)
    s_a = float(np.clip(s_a, 0.0, 1.0))
    s_b = max(float(s_b), 0.0)
    keep = np.clip(1.0 - (s_a + s_b * theta), 0.0, 1.0)
    if torque is not None:
        c_1, c_0 = np.polyfit(theta, torque, 1)
        c_0, c_1 = max(float(c_0), 0.0), max(float(c_1), 0.0)
        denom = np.cos(np.radians(theta)) * keep
        ok = denom > 1e-6
        f_0 = float(np.mean(thrust[ok] / denom[ok])) if np.any(ok) else 0.0
    else:
        # only the ratio f_0 / tau is observable; anchor torque at 1 N*m
        c_0, c_1 = 1.0, 0.0
        denom = np.cos(np.radians(theta)) * keep * v
        ok = np.abs(denom) > 1e-12
        f_0 = float(np.mean(eta[ok] * omega[ok] / denom[ok])) if np.any(ok) else 0.0
    return np.array([s_a, s_b, max(f_0, 0.0), c_0, c_1])


def _initial_simplex(z0, step=0.05):
    n = z0.size
    sim = np.tile(z0, (n + 1, 1))
    for i in range(n):
        sim[i + 1, i] += step
    return sim


def fit_media(observations, geometry=None, effective_radius=None, name="media",
              max_iter=2000, tol=1e-8):
    """Fit :class:`MediaParams` to measured operating points.

    Minimises the sum of squared residuals, each channel normalised by its
    largest absolute measured value, with Nelder-Mead in a parameter space
    scaled by the closed-form starting point. Thrust and torque residuals
    join the objective when every observation carries them; otherwise the
    thrust scale is held at its starting value, since only its ratio to
    torque is observable. Box constraints are enforced
    by projecting simplex vertices. After the simplex shrinks below ``tol``
    the search restarts from the best vertex until a restart no longer
    improves the objective or ``max_iter`` iterations are spent in total.

    Returns ``(params, report)``. Hitting the iteration cap emits a
    :class:`~sklearn.exceptions.ConvergenceWarning` and flags the report.
    """
    observations = list(observations)
    if len(observations) < 4 or len({o.angle.degrees for o in observations}) < 3:
        raise TooFewObservationsError(
            f"need >= 4 observations over >= 3 angles, got {len(observations)} "
            f"over {len({o.angle.degrees for o in observations})}")
    geometry = geometry or ScrewGeometry()
    radius = _radius(geometry, effective_radius)
    theta, omega, v, eta, thrust, torque = _stack(observations)
    identifiable = thrust is not None

    channels = [(v, _channel_scale(v)), (eta, _channel_scale(eta))]
    if identifiable:
        channels += [(thrust, _channel_scale(thrust)), (torque, _channel_scale(torque))]

    p0 = _initial_guess(theta, omega, radius, v, eta, thrust, torque)
    pscale = np.maximum(np.abs(p0), 1e-3)
    v_ideal = omega * (radius / 1000.0) * np.tan(np.radians(theta))
    cos_t = np.cos(np.radians(theta))

    def predict_all(p):
        s_a, s_b, f_0, c_0, c_1 = p
        keep = 1.0 - np.clip(s_a + s_b * theta, 0.0, 1.0)
        vp = v_ideal * keep
        fp = f_0 * cos_t * keep
        tp = c_0 + c_1 * theta
        with np.errstate(divide="ignore", invalid="ignore"):
            ep = fp * vp / (tp * omega)
        return vp, ep, fp, tp

    def objective(z):
        p = np.clip(z * pscale, _LOWER, _UPPER)
        preds = predict_all(p)
        total = 0.0
        for pred, (meas, scale) in zip(preds, channels):
            total += float(np.sum(((pred - meas) / scale) ** 2))
        return total if np.isfinite(total) else np.inf

    # without force channels only f_0 / tau is observable: hold f_0 fixed
    free = np.ones(5, dtype=bool)
    if not identifiable:
        free[2] = False
    z_full = p0 / pscale

    def expand(zf):
        z = z_full.copy()
        z[free] = zf
        return z

    lower, upper = (_LOWER / pscale)[free], (_UPPER / pscale)[free]
    zf = z_full[free]
    reduced = lambda zf: objective(expand(zf))
    first = True
    initial_objective = np.inf
    used = 0
    converged = False
    best_f = np.inf
    while used < max_iter:
        sim = _initial_simplex(zf)
        # step inward at the upper slip bound so the simplex stays full rank
        over = sim[1:, 0] > upper[0]
        sim[1:, 0][over] = zf[0] - 0.05
        sim = np.clip(sim, lower, upper)
        if first:
            initial_objective = min(reduced(x) for x in sim)
            first = False
        res = minimize(reduced, zf, method="Nelder-Mead",
                       bounds=list(zip(lower, upper)),
                       options={"initial_simplex": sim, "maxiter": max_iter - used,
                                "maxfev": 100 * max_iter, "xatol": tol,
                                "fatol": np.inf, "adaptive": False})
        used += int(res.nit)
        converged = res.status == 0
        improved = res.fun < best_f - 1e-15 * max(1.0, abs(best_f))
        if res.fun <= best_f:
            best_f, zf = float(res.fun), res.x
        if not converged or not improved:
            break

    z = expand(zf)
    p = np.clip(z * pscale, _LOWER, _UPPER)
    params = MediaParams.from_vector(name, p)
    vp, ep, fp, tp = predict_all(p)
    rmse = lambda a, b: float(np.sqrt(np.mean((a - b) ** 2)))
    report = FitReport(
        rmse_velocity=rmse(vp, v),
        rmse_efficiency=rmse(ep, eta),
        iterations=used,
        converged=bool(converged),
        objective=best_f,
        initial_objective=float(initial_objective),
        identifiable=identifiable,
        rmse_thrust=rmse(fp, thrust) if identifiable else None,
        rmse_torque=rmse(tp, torque) if identifiable else None,
        n_observations=len(observations),
    )
    if not converged:
        warnings.warn(f"fit for {name!r} stopped at the iteration cap ({max_iter})",
                      ConvergenceWarning, stacklevel=2)
    return params, report


# --------------------------------------------------------------------------
# estimator wrapper

def _observations_from_arrays(X, y):
    X = check_array(X, ensure_min_samples=1)
    y = check_array(y, ensure_min_samples=1)
    if X.shape[1] != 2:
        raise ValueError("X must have columns [angle_deg, omega_rad_s]")
    if y.shape[0] != X.shape[0] or y.shape[1] not in (2, 4):
        raise ValueError("y must have columns [v, efficiency] or [v, efficiency, thrust, torque]")
    obs = []
    for (deg, om), row in zip(X, y):
        extra = {"thrust": row[2], "torque": row[3]} if y.shape[1] == 4 else {}
        obs.append(Observation(AngleOfAttack(deg), om, row[0], row[1], **extra))
    return obs


class MediaModel(BaseEstimator, RegressorMixin):
    """Estimator wrapper around :func:`fit_media`.

    ``X`` has columns ``[angle_deg, omega_rad_s]``; ``y`` has columns
    ``[velocity, efficiency]`` optionally followed by ``[thrust, torque]``.
    :meth:`fit` also accepts a list of :class:`Observation` with ``y=None``.
    :meth:`predict` returns ``[velocity, efficiency]`` per row.
    """

    def __init__(self, name="media", geometry=None, effective_radius=None,
                 max_iter=2000, tol=1e-8):
        self.name = name
        self.geometry = geometry
        self.effective_radius = effective_radius
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        if y is None:
            observations = list(X)
        else:
            observations = _observations_from_arrays(X, y)
        self.geometry_ = self.geometry or ScrewGeometry()
        self.params_, self.report_ = fit_media(
            observations, self.geometry_, self.effective_radius, self.name,
            self.max_iter, self.tol)
        self.n_features_in_ = 2
        return self

    @classmethod
    def from_params(cls, params, geometry=None, effective_radius=None):
        """A fitted model built from known parameters, no data needed."""
        model = cls(name=params.name, geometry=geometry, effective_radius=effective_radius)
        model.geometry_ = geometry or ScrewGeometry()
        model.params_ = params
        model.report_ = None
        model.n_features_in_ = 2
        return model

    def _split(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError("X must have columns [angle_deg, omega_rad_s]")
        return X[:, 0], X[:, 1]

    def predict_velocity(self, X):
        theta, omega = self._split(X)
        return np.asarray(predict_velocity(self.params_, self.geometry_, theta, omega,
                                           self.effective_radius))

    def predict_efficiency(self, X):
        theta, omega = self._split(X)
        return np.asarray(predict_efficiency(self.params_, self.geometry_, theta, omega,
                                             self.effective_radius))

    def predict(self, X):
        return np.column_stack([self.predict_velocity(X), self.predict_efficiency(X)])

    def score(self, X, y, sample_weight=None):
        y = check_array(y)
        return super().score(X, y[:, :2], sample_weight=sample_weight)


# --------------------------------------------------------------------------
# media library files

def library_to_json(params_list):
    from .reporting import json_text
    entries = sorted((p.to_dict() for p in params_list), key=lambda d: d["name"])
    return json_text({"media": entries})


def load_library(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return {d["name"]: MediaParams.from_dict(d) for d in doc["media"]}
