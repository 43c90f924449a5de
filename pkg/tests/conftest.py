import numpy as np
import pytest
from hypothesis import settings, strategies as st

from hyperhom.states import SinglePhotonState, TwoPhotonState

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


@st.composite
def two_photon_states(draw):
    re = np.array(draw(st.lists(finite, min_size=16, max_size=16)))
    im = np.array(draw(st.lists(finite, min_size=16, max_size=16)))
    a = (re + 1j * im).reshape(4, 4)
    n = np.linalg.norm(a)
    if n < 1e-3:
        a = np.eye(4)
        n = 2.0
    return TwoPhotonState(a / n)


@st.composite
def single_photon_states(draw):
    re = np.array(draw(st.lists(finite, min_size=4, max_size=4)))
    im = np.array(draw(st.lists(finite, min_size=4, max_size=4)))
    a = re + 1j * im
    n = np.linalg.norm(a)
    if n < 1e-3:
        a = np.array([1, 0, 0, 0], dtype=complex)
        n = 1.0
    return SinglePhotonState(a / n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
