import numpy as np
import pytest

from solitonlab.core.stationary import stationary_state


@pytest.fixture(autouse=True)
def quiet_env(monkeypatch):
    monkeypatch.setenv("SOLITONLAB_QUIET", "1")
    monkeypatch.setenv("SOLITONLAB_THREADS", "2")
    monkeypatch.setenv("SOLITONLAB_PROGRESS", "0")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ground_state_1():
    return stationary_state(1)


@pytest.fixture(scope="session")
def stationary_ladder():
    return {n: stationary_state(n) for n in range(1, 7)}
