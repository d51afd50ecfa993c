import pytest

from gpme.graph import Graph


def path_graph(n, w=1.0, mu=1.0, kappa=None, prefix="x"):
    nodes = [f"{prefix}{i}" for i in range(1, n + 1)]
    edges = [(a, b, w) for a, b in zip(nodes, nodes[1:])]
    return Graph(nodes, edges, {x: mu for x in nodes}, kappa or {})


FIG1_EDGES = [(8, 6), (6, 5), (8, 5), (5, 4), (4, 0), (0, 7), (7, 8), (7, 6), (8, 9),
              (9, 3), (3, 2), (1, 0), (1, 2), (4, 3), (3, 0)]


@pytest.fixture
def two_node():
    return Graph(["a", "b"], [("a", "b", 1.0)], {"a": 1.0, "b": 1.0})


@pytest.fixture
def path4():
    return path_graph(4)


@pytest.fixture
def fig1():
    nodes = [f"x{i}" for i in range(10)]
    return Graph(nodes, [(f"x{a}", f"x{b}", 1.0) for a, b in FIG1_EDGES], {x: 1.0 for x in nodes})


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
