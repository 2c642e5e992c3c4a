from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plattice.domain import build_domain
from plattice.model import (
    F_eval,
    Potential,
    PowerNonlinearity,
    check_growth_conditions,
    critical_exponent,
    f_eval,
    negative_part_check,
)


def test_critical_exponent():
    assert critical_exponent(1.5, 2) == pytest.approx(6.0)
    assert critical_exponent(2, 3) == pytest.approx(6.0)
    assert critical_exponent(2, 2) is None


def test_power_values():
    d = build_domain(1, 3)
    nl = PowerNonlinearity(4)
    assert f_eval(nl, d, 0, 2.0) == 8.0
    assert F_eval(nl, d, 0, 2.0) == 4.0
    assert f_eval(nl, d, 0, -2.0) == -8.0
    assert F_eval(nl, d, 0, 0.0) == 0.0


@pytest.mark.parametrize("q", [2.5, 4.0, 6.0])
def test_primitive_by_finite_difference(q):
    d = build_domain(1, 3)
    nl = PowerNonlinearity(q)
    t, h = 1.3, 1e-6
    fd = (F_eval(nl, d, 0, t + h) - F_eval(nl, d, 0, t - h)) / (2 * h)
    assert fd == pytest.approx(f_eval(nl, d, 0, t), rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.floats(2.1, 8), st.floats(-1e3, 1e3), st.floats(0.1, 5))
def test_oddness_and_ratio(q, s, a):
    nl = PowerNonlinearity(q)
    assert nl.f(-s, a) == -nl.f(s, a)
    if abs(s) > 1e-3:
        # f s / (p F) = q / p exactly for the power family, here with p = 2
        assert nl.f(s, a) * s / (2 * nl.F(s, a)) == pytest.approx(q / 2, rel=1e-12)


def test_periodic_weight():
    d = build_domain(1, 4, "torus")
    nl = PowerNonlinearity.from_dict(
        {"q": 4, "weight": {"period": 2, "table": [1.0, 3.0]}}
    )
    assert nl.weights(d).tolist() == [1.0, 3.0, 1.0, 3.0]
    assert f_eval(nl, d, 1, 2.0) == 24.0


def test_periodic_potential_is_periodic():
    d = build_domain(2, 6, "torus")
    table = [[1.0, 2.0], [3.0, 4.0]]
    V = Potential("periodic", period=2, table=table).values(d).reshape(6, 6)
    assert np.array_equal(V, np.roll(V, 2, axis=0))
    assert np.array_equal(V, np.roll(V, 2, axis=1))
    assert V[1, 0] == 3.0


def test_periodic_potential_must_divide_side():
    with pytest.raises(ValueError):
        Potential("periodic", period=2, table=[1.0, 2.0]).values(build_domain(1, 5, "torus"))


def test_decaying_potential():
    d = build_domain(1, 9)
    pot = Potential.from_dict({"mode": "decaying", "limit": 1.0, "deviations": [{"at": [4], "value": -0.5}]})
    V = pot.values(d)
    assert V[4] == 0.5 and np.all(np.delete(V, 4) == 1.0)
    well = Potential("decaying", limit=1.0, depth=0.8, width=1.5).values(d)
    assert np.all(well <= 1.0)
    assert np.argmin(well) == 4
    with pytest.raises(ValueError):
        Potential.from_dict({"mode": "decaying", "limit": 1.0, "deviations": [{"at": [0], "value": 0.1}]})


@pytest.mark.parametrize(
    "data",
    [
        {"mode": "constant", "value": 0.5},
        {"mode": "periodic", "period": 2, "table": [1.0, 2.0]},
        {"mode": "decaying", "limit": 1.0, "deviations": [{"at": [1], "value": -0.2}], "depth": 0.0, "width": 1.0},
    ],
)
def test_potential_round_trip(data):
    assert Potential.from_dict(data).to_dict() == data


def test_growth_boundary_exponent():
    at_critical = check_growth_conditions(PowerNonlinearity(6), 1.5, 2)
    assert at_critical["small"].passed is False
    above = check_growth_conditions(PowerNonlinearity(6.5), 1.5, 2)
    assert above.ok


def test_growth_q_equals_p():
    rep = check_growth_conditions(PowerNonlinearity(2), 2, 3)
    assert rep["monotone"].passed is False
    assert "monotone" in [c.name for c in rep.failures]


def test_growth_subcritical_power_fails_small_amplitude():
    # f = o(|t|^(p*-1)) at 0 needs q > p*; q=4 < p*=6 gives a ratio |t|^(-2)
    rep = check_growth_conditions(PowerNonlinearity(4), 2, 3)
    assert rep["small"].passed is False
    assert rep["growth"].passed and rep["monotone"].passed and rep["superlinear"].passed


def test_growth_supercritical_power_passes():
    rep = check_growth_conditions(PowerNonlinearity(7), 2, 3)
    assert rep.ok
    assert all(c.passed for c in rep.conditions)


def test_growth_small_skipped_without_critical_exponent():
    rep = check_growth_conditions(PowerNonlinearity(4), 2, 2)
    assert rep["small"].passed is None
    assert rep.ok


def test_negative_part_examples():
    assert negative_part_check(np.array([1.0, 2.0]), 2, 4, 1.0) == {
        "norm": 0.0, "exponent": 2.0, "threshold": 1.0, "passed": True,
    }
    one = negative_part_check(np.array([-0.5, 1.0]), 2, 4, 0.8)
    assert one["norm"] == pytest.approx(0.5) and one["passed"] is True  # 0.5 < 0.64
    assert negative_part_check(np.array([-0.5, 1.0]), 2, 4, 0.7)["passed"] is False  # 0.5 > 0.49
    two = negative_part_check(np.array([-0.3, -0.4]), 2, 4, 1.0)
    assert two["norm"] == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ValueError):
        negative_part_check(np.array([1.0]), 2, 2, 1.0)
