import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tactile_climb import _kernels_py as P
from tactile_climb import kernels
from tactile_climb.morphology import RobotConfig, make_box_course

C = pytest.importorskip("tactile_climb._kernels")
R = RobotConfig()
T = make_box_course(0.15)


def args(theta, stance, xh):
    tx, tz = T.arrays()
    return (np.asarray(theta, float), R.segment_lengths(), np.asarray(R.masses, float), R.com_fractions(),
            R.geometry_vector(), np.asarray(stance, np.uint8), xh, tx, tz)


@settings(max_examples=60, deadline=None)
@given(theta=st.lists(st.floats(-0.9, 0.9), min_size=5, max_size=5),
       stance=st.lists(st.booleans(), min_size=6, max_size=6), xh=st.floats(0.0, 1.5),
       local=st.booleans())
def test_backends_agree(theta, stance, xh, local):
    a = C.rest_pose(*args(theta, stance, xh), -1.0, 1.0, 61, 25, local)
    b = P.rest_pose(*args(theta, stance, xh), -1.0, 1.0, 61, 25, local)
    assert np.allclose(a, b, atol=1e-9)


@given(theta=st.lists(st.floats(-0.9, 0.9), min_size=5, max_size=5), psi=st.floats(-1, 1),
       xh=st.floats(0.0, 1.5))
def test_support_offset_agrees(theta, psi, xh):
    a = C.support_offset(*args(theta, [1] * 6, xh), psi)
    b = P.support_offset(*args(theta, [1] * 6, xh), psi)
    assert np.allclose(a, b, atol=1e-12)


def test_ground_height_many():
    tx, tz = T.arrays()
    xs = np.linspace(-1, 2, 101)
    assert np.allclose(C.ground_height_many(tx, tz, xs), np.interp(xs, tx, tz))


def test_argument_checks():
    with pytest.raises(ValueError):
        P.rest_pose(*args([0] * 5, [1] * 6, 0.3), -1.0, 1.0, 2, 25)
    with pytest.raises(ValueError):
        C.rest_pose(*args([0] * 5, [1] * 6, 0.3), -1.0, 1.0, 2, 25)


def test_backend_switch():
    assert kernels.BACKEND in ("cython", "python")
    env = dict(os.environ, TACTILE_CLIMB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from tactile_climb import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
