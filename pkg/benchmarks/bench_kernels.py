"""Time the compiled settling kernel against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--calls N] [--trial]
"""
import argparse
import importlib
import os
import subprocess
import sys
import time

import numpy as np

from tactile_climb import _kernels_py
from tactile_climb.morphology import RobotConfig, make_box_course


def kernel_args(rng, robot, terrain):
    tx, tz = terrain.arrays()
    theta = rng.uniform(-0.9, 0.9, robot.n_segments - 1)
    stance = (rng.random(robot.n_segments) < 0.5).astype(np.uint8)
    return (theta, robot.segment_lengths(), np.asarray(robot.masses, float), robot.com_fractions(),
            robot.geometry_vector(), stance, float(rng.uniform(0.0, 1.0)), tx, tz, -0.6, 0.6, 61, 25, True)


def time_calls(mod, cases):
    t0 = time.perf_counter()
    for args in cases:
        mod.rest_pose(*args)
    return (time.perf_counter() - t0) / len(cases)


def time_trial(pure: bool) -> float:
    env = dict(os.environ, TACTILE_CLIMB_PURE="1" if pure else "0")
    code = ("import time;from tactile_climb.harness import preset;from tactile_climb.sim import run_trial;"
            "sc=preset('fig9_box')[0];t=time.perf_counter();run_trial(sc);print(time.perf_counter()-t)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--calls", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trial", action="store_true", help="also time one full feedback trial per backend")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    robot = RobotConfig()
    terrain = make_box_course(0.15)
    cases = [kernel_args(rng, robot, terrain) for _ in range(args.calls)]

    try:
        compiled = importlib.import_module("tactile_climb._kernels")
    except ImportError:
        compiled = None
    t_py = time_calls(_kernels_py, cases)
    print(f"python   rest_pose {t_py * 1e3:8.3f} ms/call")
    if compiled is not None:
        t_c = time_calls(compiled, cases)
        worst = max(np.max(np.abs(np.subtract(compiled.rest_pose(*a), _kernels_py.rest_pose(*a))))
                    for a in cases[:50])
        print(f"cython   rest_pose {t_c * 1e3:8.3f} ms/call  speedup {t_py / t_c:6.1f}x  max diff {worst:.1e}")
    else:
        print("cython   extension not built")
    if args.trial:
        print(f"trial    python {time_trial(True):6.2f} s")
        if compiled is not None:
            print(f"trial    cython {time_trial(False):6.2f} s")


if __name__ == "__main__":
    main()
