import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_waveform(rng, horizon=100.0, max_toggles=20):
    from boolres.signal import BooleanWaveform

    k = int(rng.integers(0, max_toggles + 1))
    tr = np.unique(rng.uniform(0, horizon, size=k))
    return BooleanWaveform(int(rng.integers(0, 2)), tr, horizon)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from _helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
