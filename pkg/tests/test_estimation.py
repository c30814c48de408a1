import numpy as np
import pytest
from hypothesis import given, strategies as st

from tactile_climb.estimation import ObstacleEstimate, estimate, estimate_from_arrays
from tactile_climb.sensing import SensorHistory, push_sample


def oracle(hits, zs):
    chosen = [z for h, z in zip(hits, zs) if h]
    pos = sorted((z for z in chosen if z > 0), reverse=True)[:3]
    neg = sorted(z for z in chosen if z < 0)[:3]
    return (sum(pos) / len(pos) if pos else None, sum(neg) / len(neg) if neg else None)


def test_examples():
    e = estimate_from_arrays([1, 1, 1, 1], [0.10, 0.08, 0.12, 0.02])
    assert e.z_max == pytest.approx(0.10) and e.z_min is None
    e = estimate_from_arrays([], [])
    assert e.z_max is None and e.z_min is None and not e.any_hit
    e = estimate_from_arrays([1, 1], [-0.04, -0.06])
    assert e.z_min == pytest.approx(-0.05) and e.z_max is None


def test_zero_and_misses_ignored():
    e = estimate_from_arrays([1, 0, 1], [0.0, 0.5, -0.02])
    assert e.z_max is None and e.z_min == pytest.approx(-0.02)


def test_history_entry_point():
    h = SensorHistory()
    for z in (0.1, 0.2, -0.1):
        push_sample(h, True, z)
    assert estimate(h) == estimate_from_arrays([1, 1, 1], [0.1, 0.2, -0.1])


def test_misaligned_rejected():
    with pytest.raises(ValueError):
        estimate_from_arrays([1, 1], [0.1])


def test_sign_invariants():
    with pytest.raises(ValueError):
        ObstacleEstimate(z_max=-0.1)
    with pytest.raises(ValueError):
        ObstacleEstimate(z_min=0.1)


window = st.lists(st.tuples(st.booleans(), st.floats(-0.3, 0.3)), max_size=12)


@given(window)
def test_matches_oracle(samples):
    hits = [h for h, _ in samples]
    zs = [z for _, z in samples]
    e = estimate_from_arrays(hits, zs)
    zmax, zmin = oracle(hits, zs)
    assert (e.z_max is None) == (zmax is None) and (e.z_min is None) == (zmin is None)
    if zmax is not None:
        assert e.z_max == pytest.approx(zmax, abs=1e-15)
    if zmin is not None:
        assert e.z_min == pytest.approx(zmin, abs=1e-15)


@given(window, st.randoms())
def test_permutation_invariant(samples, rnd):
    shuffled = list(samples)
    rnd.shuffle(shuffled)
    a = estimate_from_arrays([h for h, _ in samples], [z for _, z in samples])
    b = estimate_from_arrays([h for h, _ in shuffled], [z for _, z in shuffled])
    for u, v in ((a.z_max, b.z_max), (a.z_min, b.z_min)):
        assert (u is None) == (v is None)
        if u is not None:
            assert u == pytest.approx(v, abs=1e-15)


@given(window)
def test_adding_a_taller_hit_never_lowers_z_max(samples):
    hits = [h for h, _ in samples]
    zs = [z for _, z in samples]
    before = estimate_from_arrays(hits, zs)
    after = estimate_from_arrays(hits + [True], zs + [0.31])
    assert after.z_max is not None
    if before.z_max is not None:
        assert after.z_max >= before.z_max - 1e-15
    assert np.sign(after.z_max) == 1
