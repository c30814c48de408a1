import math
import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import scalar_leg
from tactile_climb.gait import (AV_MAX, GaitParams, GaitPhase, body_angle, contact_phase,
                                leg_angle_left, leg_angle_right, leg_angles, stance_flag,
                                stance_mask, vertical_angle, vertical_wave)

params_st = st.builds(
    GaitParams,
    Theta_leg=st.floats(0.0, 1.0), Theta_body=st.floats(0.0, 1.0), A_v=st.floats(0.0, AV_MAX),
    D=st.floats(0.05, 0.95), xi=st.floats(0.5, 3.0), n=st.integers(3, 10))


def test_leg_examples(gait):
    assert leg_angle_left(0.0, 1, gait) == pytest.approx(math.pi / 6)
    assert leg_angle_right(0.0, 1, gait) == pytest.approx(-math.pi / 6)
    assert leg_angle_right(math.pi, 1, gait) == pytest.approx(math.pi / 6)
    edge = 2 * math.pi * gait.D
    assert leg_angle_left(edge - 1e-12, 1, gait) == pytest.approx(-math.pi / 6)
    assert leg_angle_left(edge, 1, gait) == pytest.approx(-math.pi / 6)


def test_body_and_vertical_examples(gait):
    assert body_angle(0.0, 1, gait) == pytest.approx(math.pi / 18)
    assert body_angle(math.pi / 2, 1, gait) == pytest.approx(0.0, abs=1e-15)
    assert vertical_angle(0.0, 1, gait) == pytest.approx(gait.A_v)
    assert vertical_angle(math.pi, 1, gait) == pytest.approx(gait.A_v)


def test_stance_flag(gait):
    assert stance_flag(1e-9, 1, "left", gait)
    assert not stance_flag(math.pi + 1e-9, 1, "left", gait)
    for D in (0.3, 0.5, 0.7):
        p = GaitParams(D=D)
        taus = np.linspace(0, 2 * math.pi, 4000, endpoint=False)
        frac = np.mean([stance_flag(t, 2, "right", p) for t in taus])
        assert frac == pytest.approx(D, abs=1e-3)


def test_contact_phase_coordination(gait):
    ph = GaitPhase.from_body(1.0, gait)
    assert ph.tau_c == pytest.approx(1.0 - (gait.xi / gait.n + 0.5) * math.pi)
    assert contact_phase(1.0, gait) == ph.tau_c
    assert GaitPhase.at_time(gait.cycle_period, gait).tau_b == pytest.approx(2 * math.pi)


def test_validation():
    with pytest.raises(ValueError, match="stability limit"):
        GaitParams(A_v=0.8)
    with pytest.raises(ValueError):
        GaitParams(D=1.0)
    with pytest.raises(IndexError):
        leg_angle_left(0.0, 0, GaitParams())
    with pytest.raises(IndexError):
        vertical_angle(0.0, 6, GaitParams())
    with pytest.raises(ValueError):
        stance_flag(0.0, 1, "up", GaitParams())


@pytest.mark.parametrize("D", [0.3, 0.5, 0.7])
def test_branch_continuity(D):
    p = GaitParams(D=D)
    for edge in (2 * math.pi * D, 2 * math.pi):
        left = leg_angle_left(edge - 1e-11, 1, p)
        right = leg_angle_left(edge + 1e-11, 1, p)
        assert abs(left - right) < 1e-9


@given(p=params_st, tau=st.floats(-20, 20), data=st.data())
def test_matches_scalar_oracle(p, tau, data):
    i = data.draw(st.integers(1, p.n))
    ref = scalar_leg(tau, i, p.Theta_leg, p.D, p.xi, p.n)
    assert abs(leg_angle_left(tau, i, p) - ref) < 1e-12
    ref_r = scalar_leg(tau + math.pi, i, p.Theta_leg, p.D, p.xi, p.n)
    assert abs(leg_angle_right(tau, i, p) - ref_r) < 1e-12


@given(p=params_st, tau=st.floats(-20, 20), data=st.data())
def test_phase_shift_consistency(p, tau, data):
    i = data.draw(st.integers(1, p.n))
    shifted = leg_angle_left(tau - 2 * math.pi * p.xi / p.n * (i - 1), 1, p)
    assert leg_angle_left(tau, i, p) == pytest.approx(shifted, abs=1e-12)


@given(p=params_st, tau=st.floats(-20, 20))
def test_bounded(p, tau):
    assert np.all(np.abs(leg_angles(tau, p)) <= p.Theta_leg + 1e-15)
    assert np.all(np.abs(vertical_wave(tau, p)) <= p.A_v + 1e-15)
    for j in range(1, p.n):
        assert vertical_wave(tau, p)[j - 1] == pytest.approx(vertical_angle(tau, j, p), abs=1e-12)
        assert abs(body_angle(tau, j, p)) <= p.Theta_body + 1e-15


@given(p=params_st, tau=st.floats(-20, 20))
def test_vectorised_forms_agree(p, tau):
    ang = leg_angles(tau, p)
    mask = stance_mask(tau, p)
    for i in range(1, p.n + 1):
        assert ang[i - 1, 0] == pytest.approx(leg_angle_left(tau, i, p), abs=1e-12)
        assert ang[i - 1, 1] == pytest.approx(leg_angle_right(tau, i, p), abs=1e-12)
        assert mask[i - 1, 0] == stance_flag(tau, i, "left", p)


def test_array_input_is_fast(gait):
    taus = np.random.default_rng(0).uniform(-10, 10, 10_000)
    t0 = time.perf_counter()
    out = leg_angle_left(taus, 3, gait)
    assert out.shape == taus.shape
    assert time.perf_counter() - t0 < 1.0
