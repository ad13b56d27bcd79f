import numpy as np
import pytest

from qsynapse.evolution import CoupledState, IntegratorConfig, ModelParams
from qsynapse.synapse import SynapseParams
from qsynapse.utils import Profiler


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run long-horizon reproductions')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def reset_profiler():
    yield
    Profiler.reset()


@pytest.fixture
def undepressed():
    return ModelParams(eps1=0., eps2=0., omega=0.05, synapse=SynapseParams(U=0.5, tau=0.001))


@pytest.fixture
def bell_state():
    psi = np.array([0., 1., 1., 0.]) / np.sqrt(2.)
    return np.outer(psi, psi).astype(np.complex128)


@pytest.fixture
def excited_q2():
    return CoupledState.from_label('01')


@pytest.fixture
def short_run():
    return IntegratorConfig(dt=0.01, t_end=50., sample_every=100)
