import numpy as np
import pytest

from screwprop.kinematics import ScrewGeometry
from screwprop.media import MediaParams
from screwprop.pipeline import TrialLog


@pytest.fixture
def geometry():
    return ScrewGeometry()


@pytest.fixture
def tradeoff_media():
    return MediaParams("mud", 0.05, 0.011, 30.0, 0.6, 0.225)


def constant_log(n=1250, fs=125.0, force=(0.0, 0.0, 5.0), torque=(0.0, 0.0, 1.0),
                 omega=2.0, speed=0.02, media="mud", angle=20.0):
    """A log whose every channel is constant; position advances at ``speed``."""
    t = np.arange(n) / fs
    return TrialLog(
        sample_rate=fs,
        timestamps=t,
        force=np.tile(np.asarray(force, dtype=float), (n, 1)),
        torque=np.tile(np.asarray(torque, dtype=float), (n, 1)),
        omega=np.full(n, float(omega)),
        position=speed * t,
        media_name=media,
        commanded_angle=angle,
    )


@pytest.fixture
def make_constant_log():
    return constant_log


# --- acceptance criterion reporting -------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    label, text = marker.args
    _CRITERIA[item.nodeid] = (label, text, call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, text, ok in sorted(_CRITERIA.values(), key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label:<4} {text}")
