import math

import pytest
from hypothesis import given, strategies as st

from tactile_climb.bounds import (CapacityInput, bound_friction, bound_geometry, capacity_from_robot,
                                  derived_h0, max_climb_height, slope_adjusted_h0)
from tactile_climb.morphology import RobotConfig


def test_reference_values():
    inp = CapacityInput()
    assert bound_geometry(inp) == pytest.approx(0.24, abs=1e-15)
    assert bound_friction(inp) == pytest.approx(0.344, abs=1e-3)
    assert max_climb_height(inp) == pytest.approx(0.24, abs=1e-15)


def test_geometry_cases():
    assert bound_geometry(CapacityInput(Lc=0.2, Lh=0.2)) == pytest.approx(0.27)
    assert bound_geometry(CapacityInput(h0=1e-9, Lc=0.1, Lh=0.2)) == pytest.approx(0.2)


def test_friction_cases():
    assert bound_friction(CapacityInput(mu=0.0)) == 0.0
    assert bound_friction(CapacityInput(mu=1.0, L=1.0)) == pytest.approx(math.sin(0.2 * math.pi))
    assert bound_friction(CapacityInput(mu=1.0, L=1.0)) == pytest.approx(0.588, abs=1e-3)


def test_min_of_bounds():
    small = CapacityInput(mu=0.01)
    assert max_climb_height(small) == bound_friction(small)
    mu = math.tan(math.asin(0.24 / 0.95) / 0.8)
    both = CapacityInput(mu=mu)
    assert bound_friction(both) == pytest.approx(bound_geometry(both))
    assert max_climb_height(both) == pytest.approx(0.24)


def test_validation():
    with pytest.raises(ValueError):
        CapacityInput(h0=0.0)
    with pytest.raises(ValueError):
        CapacityInput(mu=-0.1)


def test_robot_helpers():
    inp = capacity_from_robot(RobotConfig())
    assert inp == CapacityInput()
    h = derived_h0(RobotConfig(), 2 * math.pi / 9)
    assert 0.06 < h < 0.12
    assert slope_adjusted_h0(0.07, 60.0) > 0.07
    assert slope_adjusted_h0(0.07, 60.0, rise=0.01) == pytest.approx(0.08)


pos = st.floats(0.01, 1.0)


@given(h0=pos, Lc=pos, Lh=pos, mu=pos, L=pos, which=st.sampled_from(["h0", "Lc", "Lh", "mu", "L"]),
       bump=st.floats(0.0, 0.5))
def test_monotone(h0, Lc, Lh, mu, L, which, bump):
    base = dict(h0=h0, Lc=Lc, Lh=Lh, mu=mu, L=L)
    more = dict(base, **{which: base[which] + bump})
    assert max_climb_height(CapacityInput(**more)) >= max_climb_height(CapacityInput(**base)) - 1e-15
