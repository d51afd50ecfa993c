import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import path_graph
from gpme.checks import random_graph
from gpme.errors import GraphError, TruncationError
from gpme.families import half_line, star_infinite
from gpme.graph import (Graph, LazyGraph, connected_components, degree, dirichlet_restrict,
                        exhaustion, load_graph, save_graph)


def test_degree_isolated_node():
    G = Graph(["a"], [])
    assert degree(G, "a") == (0.0, 0.0)


def test_degree_killing_and_measure():
    G = Graph(["a"], [], mu={"a": 0.5}, kappa={"a": 2.0})
    assert degree(G, "a") == (2.0, 4.0)


def test_degree_middle_of_path():
    G = path_graph(3)
    assert degree(G, "x2") == (2.0, 2.0)


def test_degree_unknown_node():
    with pytest.raises(GraphError):
        degree(path_graph(2), "nope")


def test_components_complete_graph():
    G = Graph("abc", [("a", "b", 1), ("b", "c", 1), ("a", "c", 1)])
    assert connected_components(G) == [["a", "b", "c"]]


def test_components_two_edges():
    G = Graph("abcd", [("a", "b", 1), ("c", "d", 2)])
    assert [len(b) for b in connected_components(G)] == [2, 2]


def test_components_fig1(fig1):
    blocks = connected_components(fig1)
    assert len(blocks) == 1 and len(blocks[0]) == 10


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_components_partition(seed):
    G = random_graph(np.random.default_rng(seed), 25)
    blocks = connected_components(G)
    flat = [x for b in blocks for x in b]
    assert sorted(flat) == sorted(G.nodes) and len(flat) == len(set(flat))
    label = {x: i for i, b in enumerate(blocks) for x in b}
    for u, v, _ in G.edges():
        assert label[u] == label[v]


def test_dirichlet_whole_graph():
    G = path_graph(3, kappa={"x1": 0.5})
    sub = dirichlet_restrict(G, G.nodes)
    assert all(b == 0 for b in sub.b_dir.values())
    assert sub.kappa_dir == {"x1": 0.5, "x2": 0.0, "x3": 0.0}


def test_dirichlet_path_prefix():
    sub = dirichlet_restrict(path_graph(3), ["x1", "x2"])
    assert [sub.b_dir[x] for x in sub.nodes] == [0.0, 1.0]
    assert [sub.kappa_dir[x] for x in sub.nodes] == [0.0, 1.0]
    assert sub.interior == ["x1"] and sub.boundary == ["x2"]


def test_dirichlet_whole_component():
    G = Graph("abcd", [("a", "b", 1), ("c", "d", 2)])
    sub = dirichlet_restrict(G, ["c", "d"])
    assert all(b == 0 for b in sub.b_dir.values())


def test_dirichlet_fig1_interior_and_boundary(fig1):
    sub = dirichlet_restrict(fig1, ["x4", "x5", "x6", "x7", "x8", "x9"])
    assert sorted(sub.interior) == ["x5", "x6", "x8"]
    assert sorted(sub.boundary) == ["x4", "x7", "x9"]
    # x4 ~ x0, x3; x7 ~ x0; x9 ~ x3
    assert sub.b_dir["x4"] == 2 and sub.b_dir["x7"] == 1 and sub.b_dir["x9"] == 1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dirichlet_killing_is_edge_deficiency(seed):
    rng = np.random.default_rng(seed)
    G = random_graph(rng, 20)
    A = [x for x in G.nodes if rng.random() < 0.5] or [G.nodes[0]]
    sub = dirichlet_restrict(G, A)
    for x in A:
        out = math.fsum(w for y, w in G.neighbors(x) if y not in A)
        assert sub.kappa_dir[x] - G.kappa_at(x) == pytest.approx(out, abs=1e-14)


def test_exhaustion_telescoping():
    H = half_line(w={"kind": "geometric", "scale": 1.0, "ratio": 0.7})
    sets = exhaustion(H, 8)
    for X, Y in zip(sets, sets[1:]):
        a, b = dirichlet_restrict(H, X), dirichlet_restrict(H, Y)
        new = set(Y) - set(X)
        for x in X:
            extra = math.fsum(w for y, w in H.neighbors(x) if y in new)
            assert a.kappa_dir[x] == pytest.approx(b.kappa_dir[x] + extra, abs=1e-15)


def test_half_line_balls():
    sets = exhaustion(half_line(), 5)
    assert sets == [[str(i) for i in range(k)] for k in range(1, 6)]


def test_finite_exhaustion_stabilizes():
    G = path_graph(4)
    sets = exhaustion(G, 7)
    assert sets[3] == list(G.nodes) and sets[6] == sets[3]


def test_star_adds_one_leaf_per_step():
    sets = exhaustion(star_infinite(), 6)
    assert [len(X) for X in sets] == [1, 2, 3, 4, 5, 6]
    assert sets[-1] == ["0", "1", "2", "3", "4", "5"]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from([-1, 1]), max_size=15))
def test_lattice_walk_is_eventually_covered(steps):
    from gpme.families import integer_lattice_1d
    pos = 0
    for s in steps:
        pos += s
    sets = exhaustion(integer_lattice_1d(), 2 * len(steps) + 2)
    assert str(pos) in sets[-1]


def test_rejects_bad_graphs():
    with pytest.raises(GraphError):
        Graph("ab", [("a", "a", 1)])
    with pytest.raises(GraphError):
        Graph("ab", [("a", "b", 1), ("b", "a", 2)])
    with pytest.raises(GraphError):
        Graph("ab", [("a", "c", 1)])
    with pytest.raises(GraphError):
        Graph("ab", [], mu={"a": 0})
    with pytest.raises(GraphError):
        Graph("ab", [("a", "b", -1)])


def test_json_roundtrip(tmp_path, fig1):
    p = tmp_path / "g.json"
    save_graph(fig1, p)
    H = load_graph(p)
    assert H.nodes == fig1.nodes and H.edges() == fig1.edges()


def test_json_format(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"nodes": [{"id": "a", "mu": 2, "kappa": 1}, {"id": "b"}],
                             "edges": [{"u": "a", "v": "b", "w": 3}]}))
    G = load_graph(p)
    assert G.mu_at("a") == 2 and G.kappa_at("a") == 1 and G.weight("a", "b") == 3


def test_malformed_json(tmp_path):
    p = tmp_path / "g.json"
    p.write_text("{nodes")
    with pytest.raises(GraphError):
        load_graph(p)


def test_lazy_flags_are_checked_on_truncation():
    H = half_line()
    rep = H.verify_flags(exhaustion(H, 5)[-1])
    assert rep["scope"] == "verified-on-truncation" and rep["deg_bound_ok"] and rep["symmetric"]


def test_star_weight_sum_needs_query():
    G = LazyGraph("0", lambda x: iter(()), lambda x: 0.0, lambda x: 1.0, locally_finite=False)
    with pytest.raises(TruncationError):
        G.weight_sum("0")
