import pytest

from lagwalk import default_case_graph
from helpers import complete_graph, cycle_graph, figure_walk_graph, path_graph


@pytest.fixture(scope="session")
def study_graph():
    """The frozen core-periphery demo graph (100 nodes, 20 cases)."""
    return default_case_graph()


@pytest.fixture()
def path5():
    return path_graph(5)


@pytest.fixture()
def k3():
    return complete_graph(3, values=[1.0, 1.0, 1.0])


@pytest.fixture()
def c4():
    return cycle_graph(4)


@pytest.fixture()
def figure_graph():
    return figure_walk_graph()
