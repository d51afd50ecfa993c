import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import path_graph
from gpme.errors import GpmeError
from gpme.functions import (NodeFunction, bracket_plus, function_from_csv, function_from_json,
                            function_to_csv, norm, sign_split)
from gpme.graph import Graph

G2 = Graph(["a", "b"], [("a", "b", 1.0)])
GM = Graph(["a", "b", "c"], [], mu={"a": 2.0, "b": 0.5, "c": 3.0})

# magnitudes below 1e-100 would underflow when squared inside the l2 norm
values = st.one_of(st.just(0.0), st.floats(1e-100, 1e3), st.floats(-1e3, -1e-100))
triples = st.fixed_dictionaries({"a": values, "b": values, "c": values})


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_norm_of_zero(p):
    assert norm(NodeFunction.zero(GM), p) == 0


def test_norm_scaled_delta():
    f = NodeFunction({"a": 3.0}, GM)
    assert norm(f, 1) == 6 and norm(f, math.inf) == 3


def test_norm_l2_two_ones():
    assert norm(NodeFunction({"a": 1, "b": 1}, G2), 2) == pytest.approx(math.sqrt(2), rel=1e-15)


def test_bracket_self_is_squared_norm():
    k = NodeFunction({"a": 1.5, "b": -2.0, "c": 0.25}, GM)
    for p in (1, 2):
        assert bracket_plus(k, k, p) == pytest.approx(norm(k, p) ** 2, rel=1e-14)


def test_bracket_l1_positive_k_collapses_to_mass():
    k = NodeFunction({"a": 1.0, "b": 0.5}, GM)
    z = NodeFunction({"a": -4.0, "b": 3.0}, GM)
    assert bracket_plus(z, k, 1) == norm(k, 1) * (-4.0 * 2.0 + 3.0 * 0.5)


def test_bracket_l1_zero_set_uses_abs():
    k = NodeFunction({"a": 1.0}, GM)
    z = NodeFunction({"b": -2.0, "c": 1.0}, GM)
    assert bracket_plus(z, k, 1) == norm(k, 1) * (2.0 * 0.5 + 1.0 * 3.0)


def test_bracket_rejects_other_p():
    with pytest.raises(GpmeError):
        bracket_plus(NodeFunction.zero(GM), NodeFunction.zero(GM), 3)


@settings(max_examples=100, deadline=None)
@given(triples, triples)
def test_bracket_bounded_by_norm_product(zv, kv):
    z, k = NodeFunction(zv, GM), NodeFunction(kv, GM)
    for p in (1, 2):
        b = bracket_plus(z, k, p)
        bound = norm(z, p) * norm(k, p)
        assert abs(b) <= bound * (1 + 1e-12) + 1e-300


@settings(max_examples=100, deadline=None)
@given(triples)
def test_sign_split_recombines(gv):
    g = NodeFunction(gv, GM)
    parts = sign_split(g)
    assert parts.positive.is_nonnegative() and parts.negative.is_nonpositive()
    assert parts.positive + parts.negative == g


def test_sign_split_examples():
    g = NodeFunction({"a": 2.0, "b": -3.0}, G2)
    parts = sign_split(g)
    assert parts.positive == NodeFunction({"a": 2.0}, G2)
    assert parts.negative == NodeFunction({"b": -3.0}, G2)
    nonneg = NodeFunction({"a": 1.0}, G2)
    assert sign_split(nonneg).positive == nonneg and sign_split(nonneg).negative == NodeFunction.zero(G2)
    z = sign_split(NodeFunction.zero(G2))
    assert z.positive == z.negative == NodeFunction.zero(G2)


@settings(max_examples=100, deadline=None)
@given(triples, triples)
def test_triangle_inequality(fv, gv):
    f, g = NodeFunction(fv, GM), NodeFunction(gv, GM)
    for p in (1, 2, math.inf):
        assert norm(f + g, p) <= (norm(f, p) + norm(g, p)) * (1 + 1e-12) + 1e-300


def test_equality_ignores_explicit_zeros():
    assert NodeFunction({"a": 0.0, "b": 1.0}, G2) == NodeFunction({"b": 1.0}, G2)
    assert NodeFunction({"a": 1e-300}, G2) != NodeFunction.zero(G2)


def test_absent_nodes_read_zero():
    f = NodeFunction({"a": 1.0}, G2)
    assert f("b") == 0.0 and f.support == ["a"]


def test_rejects_non_finite():
    with pytest.raises(GpmeError):
        NodeFunction({"a": float("nan")}, G2)


def test_array_roundtrip():
    G = path_graph(5)
    arr = np.linspace(-1, 1, 5)
    assert np.array_equal(NodeFunction.from_array(G, arr).to_array(), arr)


def test_json_and_csv_roundtrip():
    f = NodeFunction({"a": 0.1, "b": -1 / 3}, G2)
    assert function_from_json(f.to_dict(), G2) == f
    assert function_from_csv(function_to_csv(f), G2) == f
    with pytest.raises(GpmeError):
        function_from_json([1, 2], G2)
    with pytest.raises(GpmeError):
        function_from_csv("node,value\na,x\n", G2)
