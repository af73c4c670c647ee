"""Variable angle-of-attack screw propulsion: kinematics, trial processing,
media model fitting and angle-of-attack planning."""

from .exceptions import (DegenerateParametersError, DomainError, InvalidTrialError,
                         MalformedInputError, NoSteadyStateError, TooFewObservationsError)
from .kinematics import (AngleOfAttack, ScrewGeometry, angle_from_length, lead_per_revolution,
                         length_from_angle, no_slip_velocity)
from .media import (FitReport, MediaModel, MediaParams, Observation, fit_media,
                    predict_efficiency, predict_thrust, predict_torque, predict_velocity)
from .metrics import (LoadEnvelope, TrialMetrics, TrialMetricsExtractor, load_envelope,
                      locomotive_efficiency, trial_metrics)
from .pipeline import (BaselinePair, LowPassFilter, SteadyStateClipper, Tare, TrialLog,
                       clip_steady_state, gravity_augment, lowpass, tare)
from .planner import (Objective, ParetoPoint, Plan, angle_to_actuator_length, choose_angle,
                      pareto_front, plan)

__version__ = "0.1.0"

__all__ = [
    "DegenerateParametersError",
    "DomainError",
    "InvalidTrialError",
    "MalformedInputError",
    "NoSteadyStateError",
    "TooFewObservationsError",
    "AngleOfAttack",
    "ScrewGeometry",
    "angle_from_length",
    "lead_per_revolution",
    "length_from_angle",
    "no_slip_velocity",
    "FitReport",
    "MediaModel",
    "MediaParams",
    "Observation",
    "fit_media",
    "predict_efficiency",
    "predict_thrust",
    "predict_torque",
    "predict_velocity",
    "LoadEnvelope",
    "TrialMetrics",
    "TrialMetricsExtractor",
    "load_envelope",
    "locomotive_efficiency",
    "trial_metrics",
    "BaselinePair",
    "LowPassFilter",
    "SteadyStateClipper",
    "Tare",
    "TrialLog",
    "clip_steady_state",
    "gravity_augment",
    "lowpass",
    "tare",
    "Objective",
    "ParetoPoint",
    "Plan",
    "angle_to_actuator_length",
    "choose_angle",
    "pareto_front",
    "plan",
]
