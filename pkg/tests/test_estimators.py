import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from screwprop import (BaselinePair, LowPassFilter, MediaModel, SteadyStateClipper, Tare,
                       TrialMetricsExtractor, trial_metrics)
from screwprop.media import predict_efficiency, predict_thrust, predict_torque, predict_velocity
from screwprop.pipeline import clip_steady_state, lowpass, tare
from screwprop.synthetic import make_trial

ANGLES = np.array([10.0, 15.0, 20.0, 25.0, 30.0, 35.0])


def test_transformer_params_and_clone():
    est = LowPassFilter(cutoff_hz=4.0)
    assert est.get_params() == {"cutoff_hz": 4.0, "order": 2}
    c = clone(est).set_params(cutoff_hz=3.0)
    assert c.cutoff_hz == 3.0 and est.cutoff_hz == 4.0
    assert set(SteadyStateClipper().get_params()) == {"manual_range", "threshold_fraction",
                                                      "guard_s"}


def test_pipeline_matches_functions(tradeoff_media):
    log, base = make_trial(tradeoff_media, 20.0, seed=5)
    pipe = make_pipeline(Tare(base), LowPassFilter(5.0), SteadyStateClipper(),
                         TrialMetricsExtractor())
    via_pipe = pipe.fit_transform(log)
    via_funcs = trial_metrics(clip_steady_state(lowpass(tare(log, base), 5.0)))
    assert via_pipe == via_funcs


def test_transformers_map_over_lists(tradeoff_media):
    logs = [make_trial(tradeoff_media, a, seed=i)[0] for i, a in enumerate((10.0, 30.0))]
    out = LowPassFilter().fit_transform(logs)
    assert isinstance(out, list) and len(out) == 2


def test_tare_records_drift():
    prev = BaselinePair(np.zeros(6), np.zeros(6))
    cur = BaselinePair(np.full(6, 0.25), np.zeros(6))
    t = Tare(cur, previous_baseline=prev).fit()
    np.testing.assert_allclose(t.drift_, 0.25)


def _xy(media, geometry, omega=3.0, full=True):
    X = np.column_stack([ANGLES, np.full(ANGLES.shape, omega)])
    cols = [predict_velocity(media, geometry, ANGLES, omega),
            predict_efficiency(media, geometry, ANGLES, omega)]
    if full:
        cols += [predict_thrust(media, ANGLES), predict_torque(media, ANGLES)]
    return X, np.column_stack(cols)


def test_media_model_fit_predict(geometry, tradeoff_media):
    X, y = _xy(tradeoff_media, geometry)
    model = MediaModel(name="mud").fit(X, y)
    np.testing.assert_allclose(model.params_.as_vector(), tradeoff_media.as_vector(), rtol=1e-6)
    pred = model.predict(X)
    assert pred.shape == (6, 2)
    np.testing.assert_allclose(pred, y[:, :2], rtol=1e-6)
    assert model.score(X, y) == pytest.approx(1.0, abs=1e-9)
    assert model.report_.converged


def test_media_model_accepts_observations(geometry, tradeoff_media):
    from screwprop.media import Observation
    X, y = _xy(tradeoff_media, geometry)
    obs = [Observation(a, w, *row) for (a, w), row in zip(X, y)]
    model = MediaModel().fit(obs)
    np.testing.assert_allclose(model.params_.as_vector(), tradeoff_media.as_vector(), rtol=1e-6)


def test_media_model_not_fitted():
    with pytest.raises(NotFittedError):
        MediaModel().predict([[20.0, 3.0]])


def test_media_model_from_params(geometry, tradeoff_media):
    model = MediaModel.from_params(tradeoff_media, geometry)
    v = model.predict_velocity([[20.0, 3.0]])
    assert v[0] == predict_velocity(tradeoff_media, geometry, 20.0, 3.0)


def test_media_model_clone_unfitted(tradeoff_media, geometry):
    X, y = _xy(tradeoff_media, geometry)
    fitted = MediaModel(max_iter=500).fit(X, y)
    c = clone(fitted)
    assert c.get_params()["max_iter"] == 500
    assert not hasattr(c, "params_")


def test_media_model_rejects_bad_shapes():
    with pytest.raises(ValueError):
        MediaModel().fit(np.zeros((6, 3)), np.zeros((6, 2)))
    with pytest.raises(ValueError):
        MediaModel().fit(np.zeros((6, 2)), np.zeros((6, 3)))
