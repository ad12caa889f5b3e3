import numpy as np
import pytest

from fastslow import chialvo, ChialvoParams, solve_critical_graph
from fastslow.models import chialvo_phi0, euler_discretize, saddle_map, twofast_ode


@pytest.fixture(scope="session")
def chialvo_map():
    return chialvo(ChialvoParams())


@pytest.fixture(scope="session")
def chialvo_graph(chialvo_map):
    k = chialvo_map.params["k"]
    return solve_critical_graph(chialvo_map, x_idx=(1,), lo=1.1, hi=2.9, num=400,
                                y_seed=[chialvo_phi0(1.1, k)])


@pytest.fixture(scope="session")
def chialvo_repelling_graph(chialvo_map):
    k = chialvo_map.params["k"]
    return solve_critical_graph(chialvo_map, x_idx=(1,), lo=3.2, hi=4.5, num=300,
                                y_seed=[chialvo_phi0(3.2, k)])


@pytest.fixture(scope="session")
def twofast():
    return twofast_ode()


@pytest.fixture(scope="session")
def twofast_map(twofast):
    return euler_discretize(twofast, 0.2)


@pytest.fixture(scope="session")
def twofast_graph(twofast_map):
    return solve_critical_graph(twofast_map, x_idx=(0,), lo=0.2, hi=1.2, num=41,
                                y_seed=[0.04, 0.008])


@pytest.fixture(scope="session")
def saddle():
    return saddle_map()


@pytest.fixture(scope="session")
def saddle_graph(saddle):
    return solve_critical_graph(saddle, x_idx=(0,), lo=-1.0, hi=1.0, num=41,
                                y_seed=[np.sin(-1.0), 1.0])
