import numpy as np
import pytest

from rulek import _backend
from rulek.graph import Instance, build_graph

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def graph_of(points, side=10.0):
    return build_graph(Instance(np.asarray(points, dtype=float), side))


@pytest.fixture
def path3():
    return graph_of([(0, 0), (1, 0), (2, 0)])


@pytest.fixture
def k4():
    return graph_of([(5, 5), (5.2, 5), (5, 5.2), (5.2, 5.2)])


@pytest.fixture
def far_pair():
    return graph_of([(1, 1), (5, 5)])


@pytest.fixture
def single():
    return graph_of([(3, 3)])


BACKENDS = ["python"] + (["cython"] if _backend.name == "cython" else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    before = _backend.name
    _backend.use(request.param)
    yield request.param
    _backend.use(before)
