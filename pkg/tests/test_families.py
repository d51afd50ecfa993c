import pytest

from gpme.errors import GraphError
from gpme.families import binary_tree, half_line, integer_lattice_1d, make_family, star_infinite
from gpme.nonlinearity import power_law


def test_half_line_structure():
    H = half_line()
    assert sorted(dict(H.neighbors("0"))) == ["1"]
    assert sorted(dict(H.neighbors("3"))) == ["2", "4"]
    assert H.h1 and H.h2 and H.uniform_deg_bound == 2


def test_lattice_and_tree_degrees():
    assert len(list(integer_lattice_1d().neighbors("-4"))) == 2
    T = binary_tree()
    assert sorted(dict(T.neighbors("r"))) == ["r0", "r1"]
    assert sorted(dict(T.neighbors("r01"))) == ["r0", "r010", "r011"]
    assert T.uniform_deg_bound == 3


def test_star_lacks_all_hypotheses():
    S = star_infinite()
    assert S.hypotheses(power_law(2)) == {"H1": False, "H2": False, "H3": False}
    assert S.level("0") == 0 and S.level("17") == 1
    assert S.weight("0", "3") == S.weight("3", "0") > 0 and S.weight("2", "3") == 0


def test_star_weight_sum_converges():
    S = star_infinite()
    partial = sum(S.weight("0", str(i)) for i in range(1, 200))
    assert S.weight_sum("0") == pytest.approx(partial, rel=1e-12)


def test_geometric_measure_breaks_h2():
    H = half_line(mu={"kind": "geometric", "scale": 1.0, "ratio": 0.5})
    assert not H.h2 and H.uniform_deg_bound is None


def test_make_family():
    assert make_family("half_line", {"kappa": 0.5}).kappa_at("7") == 0.5
    with pytest.raises(GraphError):
        make_family("torus")
    with pytest.raises(GraphError):
        make_family("half_line", {"colour": 1})
    with pytest.raises(GraphError):
        make_family("half_line", {"mu": {"kind": "sawtooth"}})
