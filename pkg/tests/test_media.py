
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.exceptions import ConvergenceWarning

from screwprop.exceptions import DegenerateParametersError, TooFewObservationsError
from screwprop.kinematics import AngleOfAttack, no_slip_velocity
from screwprop.media import (MediaParams, Observation, fit_media, library_to_json,
                             load_library, predict_efficiency, predict_thrust, predict_torque,
                             predict_velocity)

ANGLES = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0)
OMEGA = 3.0

# frozen from a 30-digit mpmath evaluation of the model formulas
V_20 = 0.08444109434975895      # 2 * 0.232 * tan(20) * (1 - 0.5)
F_20 = 9.396926207859084        # 20 * cos(20) * 0.5
ETA_20 = 0.19837168312888787    # V_20 * F_20 / (2.0 * 2)
F_30 = 13.856406460551018       # 20 * cos(30) * 0.8


def synth(p, g, angles=ANGLES, omega=OMEGA, noise=0.0, seed=0, with_ft=True):
    v = np.array([predict_velocity(p, g, a, omega) for a in angles])
    e = np.array([predict_efficiency(p, g, a, omega) for a in angles])
    f = np.array([predict_thrust(p, a) for a in angles])
    t = np.array([predict_torque(p, a) for a in angles])
    chans = [v, e, f, t]
    if noise:
        rng = np.random.default_rng(seed)
        chans = [c + rng.normal(0.0, noise * np.max(np.abs(c)), c.shape) for c in chans]
    obs = []
    for i, a in enumerate(angles):
        extra = dict(thrust=chans[2][i], torque=chans[3][i]) if with_ft else {}
        obs.append(Observation(AngleOfAttack(a), omega, chans[0][i], chans[1][i], **extra))
    return obs


def test_params_validation():
    with pytest.raises(ValueError):
        MediaParams("x", 1.2, 0, 1, 1, 0)
    with pytest.raises(ValueError):
        MediaParams("x", 0.2, -0.1, 1, 1, 0)
    with pytest.raises(ValueError):
        MediaParams("x", 0.2, 0.0, -1, 1, 0)


def test_slip_clamped():
    p = MediaParams("x", 0.9, 0.01, 1, 1, 0)
    assert p.slip(5.0) == pytest.approx(0.95)
    assert p.slip(35.0) == 1.0


def test_observation_requires_operational_angle():
    with pytest.raises(ValueError):
        Observation(AngleOfAttack(5.0), 1.0, 0.1, 0.1)
    with pytest.raises(ValueError):
        Observation(AngleOfAttack(15.0), 0.0, 0.1, 0.1)


def test_predict_velocity_examples(geometry):
    zero = MediaParams("z", 0.0, 0.0, 10.0, 1.0, 0.0)
    for th in (10.0, 22.5, 35.0):
        assert predict_velocity(zero, geometry, th, 2.0) == no_slip_velocity(th, 232.0, 2.0)
    full = MediaParams("f", 1.0, 0.0, 10.0, 1.0, 0.0)
    assert np.all(predict_velocity(full, geometry, np.arange(10, 36.0), 2.0) == 0.0)
    p = MediaParams("m", 0.3, 0.01, 20.0, 1.0, 0.05)
    assert predict_velocity(p, geometry, 20.0, 2.0, effective_radius=232.0) == pytest.approx(
        V_20, rel=1e-12)


def test_predict_thrust_examples():
    assert predict_thrust(MediaParams("a", 0, 0, 17.0, 1, 0), 0.0) == 17.0
    assert np.all(predict_thrust(MediaParams("a", 0.1, 0, 0.0, 1, 0), np.arange(0, 80.0)) == 0)
    assert predict_thrust(MediaParams("a", 0.2, 0, 20.0, 1, 0), 30.0) == pytest.approx(
        F_30, rel=1e-12)
    assert F_30 == pytest.approx(13.86, abs=0.01)


def test_predict_torque_examples():
    assert predict_torque(MediaParams("a", 0, 0, 1, 2.5, 0.0), 27.0) == 2.5
    assert predict_torque(MediaParams("a", 0, 0, 1, 1.0, 0.05), 20.0) == pytest.approx(2.0)
    assert predict_torque(MediaParams("a", 0, 0, 1, 1.3, 0.05), 0.0) == 1.3


def test_predict_efficiency_examples(geometry):
    p = MediaParams("m", 0.3, 0.01, 20.0, 1.0, 0.05)
    eta = predict_efficiency(p, geometry, 20.0, 2.0)
    assert predict_thrust(p, 20.0) == pytest.approx(F_20, rel=1e-12)
    assert eta == pytest.approx(ETA_20, rel=1e-12)
    assert eta == pytest.approx(0.198, abs=0.005)
    full = MediaParams("s", 1.0, 0.0, 20.0, 1.0, 0.05)
    assert predict_efficiency(full, geometry, 20.0, 2.0) == 0.0


def test_predict_efficiency_degenerate(geometry):
    with pytest.raises(DegenerateParametersError):
        predict_efficiency(MediaParams("d", 0.1, 0, 10, 0.0, 0.0), geometry, 20.0, 2.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(0, 0.05), st.floats(0.1, 50), st.floats(0.01, 3),
       st.floats(0, 0.3), st.floats(0, 60), st.floats(0.1, 10))
def test_slip_never_adds_speed(sa, sb, f0, c0, c1, theta, omega):
    from screwprop.kinematics import ScrewGeometry
    g = ScrewGeometry()
    p = MediaParams("x", sa, sb, f0, c0, c1)
    assert predict_velocity(p, g, theta, omega) <= no_slip_velocity(theta, 232.0, omega)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 0.9), st.floats(0, 0.02), st.floats(0.1, 50), st.floats(0.01, 3),
       st.floats(0, 0.3), st.floats(10, 35), st.floats(0.1, 10))
def test_omega_scaling(sa, sb, f0, c0, c1, theta, omega):
    from screwprop.kinematics import ScrewGeometry
    g = ScrewGeometry()
    p = MediaParams("x", sa, sb, f0, c0, c1)
    v1 = predict_velocity(p, g, theta, omega)
    v2 = predict_velocity(p, g, theta, 2 * omega)
    assert v2 == pytest.approx(2 * v1, rel=1e-12, abs=1e-300)
    e1 = predict_efficiency(p, g, theta, omega)
    e2 = predict_efficiency(p, g, theta, 2 * omega)
    assert e2 == pytest.approx(e1, rel=1e-12, abs=1e-300)


def test_tradeoff_on_reference_media(geometry, tradeoff_media):
    th = np.arange(10.0, 36.0)
    v = predict_velocity(tradeoff_media, geometry, th, OMEGA)
    e = predict_efficiency(tradeoff_media, geometry, th, OMEGA)
    assert np.all(np.diff(v) > 0) and np.all(np.diff(e) < 0)


# --- fitting -------------------------------------------------------------------

def test_fit_noiseless_round_trip(geometry):
    true = MediaParams("m", 0.2, 0.015, 20.0, 1.0, 0.05)
    p, rep = fit_media(synth(true, geometry), geometry, name="m")
    np.testing.assert_allclose(p.as_vector(), true.as_vector(), rtol=1e-3)
    assert rep.converged and rep.identifiable
    assert rep.objective <= rep.initial_objective


def test_fit_noisy_round_trip(geometry):
    true = MediaParams("m", 0.2, 0.015, 20.0, 1.0, 0.05)
    p, rep = fit_media(synth(true, geometry, noise=0.02, seed=7), geometry)
    np.testing.assert_allclose(p.as_vector(), true.as_vector(), rtol=0.10)
    assert rep.rmse_velocity > 0 and rep.rmse_efficiency > 0


def test_fit_without_force_channels_reproduces_curves(geometry, tradeoff_media):
    # only the thrust/torque ratio is observable from (v, eta); the curves still match
    obs = synth(tradeoff_media, geometry, with_ft=False)
    p, rep = fit_media(obs, geometry)
    assert not rep.identifiable
    th = np.arange(10.0, 36.0)
    np.testing.assert_allclose(predict_velocity(p, geometry, th, OMEGA),
                               predict_velocity(tradeoff_media, geometry, th, OMEGA), rtol=1e-4)
    np.testing.assert_allclose(predict_efficiency(p, geometry, th, OMEGA),
                               predict_efficiency(tradeoff_media, geometry, th, OMEGA),
                               rtol=1e-3)
    assert p.slip_base == pytest.approx(tradeoff_media.slip_base, rel=1e-4)


def test_fit_descends_from_initial_simplex(geometry, tradeoff_media):
    obs = synth(tradeoff_media, geometry, noise=0.05, seed=1)
    _, rep = fit_media(obs, geometry)
    assert rep.objective <= rep.initial_objective


def test_fit_deterministic(geometry, tradeoff_media):
    obs = synth(tradeoff_media, geometry, noise=0.03, seed=11)
    a = fit_media(obs, geometry)
    b = fit_media(obs, geometry)
    assert a[0] == b[0]
    assert a[1] == b[1]


def test_fit_too_few(geometry, tradeoff_media):
    obs = synth(tradeoff_media, geometry, angles=(20.0, 20.0, 20.0))
    with pytest.raises(TooFewObservationsError):
        fit_media(obs, geometry)
    with pytest.raises(TooFewObservationsError):
        fit_media(synth(tradeoff_media, geometry, angles=(10.0, 20.0, 20.0, 10.0)), geometry)


def test_fit_iteration_cap_flags_non_convergence(geometry, tradeoff_media):
    obs = synth(tradeoff_media, geometry, noise=0.05, seed=2)
    with pytest.warns(ConvergenceWarning):
        p, rep = fit_media(obs, geometry, max_iter=5)
    assert not rep.converged
    assert rep.iterations <= 5
    assert isinstance(p, MediaParams)


def test_fit_sand_like_media(geometry):
    sand = MediaParams("sand", 0.965, 0.0005, 20.0, 0.9, 0.21)
    p, _ = fit_media(synth(sand, geometry, noise=0.01, seed=3), geometry)
    assert np.all(p.slip(np.arange(10.0, 36.0)) > 0.95)


def test_library_round_trip(tmp_path, tradeoff_media):
    other = MediaParams("sand", 0.97, 0.0005, 20.0, 0.9, 0.21)
    path = tmp_path / "lib.json"
    path.write_text(library_to_json([other, tradeoff_media]))
    lib = load_library(path)
    assert list(lib) == ["mud", "sand"]
    assert lib["mud"] == tradeoff_media
    assert "slip_slope_per_deg" in path.read_text()
