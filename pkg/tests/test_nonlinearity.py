import math

import pytest
from hypothesis import given, settings, strategies as st

from gpme.errors import GpmeError
from gpme.functions import NodeFunction
from gpme.graph import Graph
from gpme.nonlinearity import (Expression, check_nonlinearity, custom, extend, extend_inverse,
                               from_config, power_law)

G2 = Graph(["a", "b"], [("a", "b", 1.0)])


def test_m1_is_identity():
    nl = power_law(1)
    assert nl.phi(-2.5) == -2.5 and nl.psi(7.0) == 7.0
    assert nl.global_lipschitz == 1.0 and nl.regime == "heat"


def test_m2_negative_argument():
    nl = power_law(2)
    assert nl.phi(-3.0) == -9.0 and nl.psi(-9.0) == -3.0


def test_m4_value():
    assert power_law(4).phi(2.0) == 16.0


def test_regimes():
    assert power_law(3).regime == "PME" and power_law(0.5).regime == "FDE"
    assert power_law(3).global_lipschitz is None and power_law(0.5).global_lipschitz is None


@pytest.mark.parametrize("m", [0, -1, float("inf"), float("nan")])
def test_rejects_bad_exponent(m):
    with pytest.raises(GpmeError):
        power_law(m)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([0.3, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0]),
       st.one_of(st.just(0.0), st.floats(1e-60, 1e3), st.floats(-1e3, -1e-60)))
def test_psi_inverts_phi(m, s):
    nl = power_law(m)
    assert nl.psi(nl.phi(s)) == pytest.approx(s, rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([0.5, 1.0, 2.0, 4.0]), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_phi_is_increasing_and_odd(m, a, b):
    nl = power_law(m)
    if a < b:
        assert nl.phi(a) <= nl.phi(b)
    assert nl.phi(-a) == -nl.phi(a)


@pytest.mark.parametrize("m", [0.5, 2.0, 3.0])
def test_derivatives_match_finite_differences(m):
    nl = power_law(m)
    for s in (-2.0, -0.3, 0.7, 1.9):
        h = 1e-6 * max(1.0, abs(s))
        fd = (nl.phi(s + h) - nl.phi(s - h)) / (2 * h)
        assert nl.phi_prime(s) == pytest.approx(fd, rel=1e-6)
        v = nl.phi(s)
        hv = 1e-6 * max(1.0, abs(v))
        fdv = (nl.psi(v + hv) - nl.psi(v - hv)) / (2 * hv)
        assert nl.psi_prime(v) == pytest.approx(fdv, rel=1e-5)


def test_extend_examples():
    nl = power_law(2)
    assert extend(nl, NodeFunction.zero(G2)) == NodeFunction.zero(G2)
    u = NodeFunction({"a": 1.0, "b": -2.0}, G2)
    assert extend(nl, u) == NodeFunction({"a": 1.0, "b": -4.0}, G2)
    assert extend_inverse(nl, extend(nl, u)) == u


def test_custom_expression():
    nl = custom("s*abs(s)", "sgn(s)*abs(s)^0.5")
    assert nl.phi(-3.0) == -9.0 and nl.psi(16.0) == 4.0
    assert nl.phi_prime(2.0) == 4.0


def test_custom_linear_is_globally_lipschitz():
    nl = custom("2*s", "s/2", global_lipschitz=2.0)
    assert nl.locally_lipschitz and nl.global_lipschitz == 2.0


def test_custom_rejects_wrong_inverse():
    with pytest.raises(GpmeError):
        custom("2*s", "s/3")


def test_custom_rejects_decreasing_phi():
    with pytest.raises(GpmeError):
        custom("-s", "-s")


def test_custom_rejects_phi_nonzero_at_origin():
    with pytest.raises(GpmeError):
        custom("s+1", "s-1")


@pytest.mark.parametrize("text", ["__import__('os')", "s.real", "exp(s)", "[s]", "lambda: 1"])
def test_expression_whitelist(text):
    with pytest.raises(GpmeError):
        Expression(text)


def test_from_config_variants():
    assert from_config('{"family":"power_law","m":2}').m == 2
    assert from_config({"family": "custom", "phi": "3*s", "psi": "s/3",
                        "global_lipschitz": 3}).global_lipschitz == 3
    for bad in ("{", '{"family":"power_law"}', '{"family":"tanh"}', "[1]"):
        with pytest.raises(GpmeError):
            from_config(bad)


def test_check_nonlinearity_accepts_power_laws():
    for m in (0.25, 1.0, 5.0):
        check_nonlinearity(power_law(m))
    assert math.isinf(power_law(0.5).phi_prime(0.0))
