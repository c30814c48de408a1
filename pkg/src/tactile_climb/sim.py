"""Quasi-static sagittal simulator for the many-legged robot.

Each tick the commanded joint angles define a rigid chain. The chain is
placed by choosing the head pitch and height that minimise the centre of
mass without penetrating the terrain, with stance toes as supports. The
robot then tries to advance by the propulsion law; a move is rejected if any
body point would sweep through the ground or ends up wedged against a face
too steep to slide up under friction.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from ._kernels_py import chain_geometry
from .control import (DESCEND, DRAG, OPEN_LOOP, RAISE_UP, ControlOutput, FeedbackController,
                      JointServo, duty_factors)
from .gait import GaitParams, contact_phase, stance_mask, vertical_wave
from .morphology import RobotConfig, TerrainProfile
from .sensing import (DELTA, TICKS_PER_CYCLE, AntennaConfig, HeadPose, SensorHistory,
                      antenna_angle, antenna_rest_angle, probe, push_sample)

PSI_WINDOW = 0.6
N_GRID = 61
N_GOLDEN = 25
N_SUB = 6
ABUT_GAP = 0.005  # clearance kept between a blocked head and the rise, meters
SNAP_DEPTH = 0.02  # deepest a re-posed chain may sink before being lifted out, meters
STUCK_DX = 0.001  # per cycle
STUCK_CYCLES = 2


@dataclass
class ChainPose:
    """World placement of the chain for one set of joint angles."""

    x_head: float
    z_head: float
    psi: float
    theta: np.ndarray
    front: np.ndarray
    rear: np.ndarray
    outline: np.ndarray
    shoulder: np.ndarray
    com: np.ndarray
    phi: np.ndarray
    support: np.ndarray

    @property
    def head(self) -> HeadPose:
        return HeadPose(self.x_head, self.z_head, self.psi)

    @property
    def tail(self) -> np.ndarray:
        return self.rear[-1]

    def toes(self, robot: RobotConfig) -> np.ndarray:
        t = self.shoulder.copy()
        t[:, 1] -= robot.leg_radius
        return t


@dataclass
class SimState:
    x_head: float
    joint_angles: np.ndarray
    theta_a: float
    pose: ChainPose
    clock: float = 0.0
    tau_b: float = 0.0
    tick: int = 0
    history: SensorHistory = None
    contacts: np.ndarray = None
    stance: np.ndarray = None
    climb: float = 0.0
    settle_blocked: bool = False


@dataclass(frozen=True)
class StepOutcome:
    advanced: float
    blocked: bool
    pivot: Optional[str] = None
    head_blocked: bool = False
    c: float = 1.0
    r: float = 1.0


def _place(theta, robot: RobotConfig, x_head, psi, zoff, support) -> ChainPose:
    g = chain_geometry(theta, robot.segment_lengths(), robot.com_fractions(),
                       robot.geometry_vector(), psi)
    shift = np.array([x_head, zoff])
    return ChainPose(
        x_head=float(x_head), z_head=float(zoff), psi=float(psi), theta=np.array(theta, dtype=float),
        front=g["front"][0] + shift, rear=g["rear"][0] + shift, outline=g["outline"][0] + shift,
        shoulder=g["shoulder"][0] + shift, com=g["com"][0] + shift, phi=g["phi"][0],
        support=np.array(support, dtype=bool))


def _solve(theta, robot: RobotConfig, terrain: TerrainProfile, x_head, support, psi_center,
           window=PSI_WINDOW, ngrid=N_GRID, local=True):
    tx, tz = terrain.arrays()
    psi, zoff, _ = kernels.rest_pose(
        np.ascontiguousarray(theta, dtype=float), robot.segment_lengths(),
        np.asarray(robot.masses, dtype=float), robot.com_fractions(), robot.geometry_vector(),
        np.ascontiguousarray(support, dtype=np.uint8), float(x_head), tx, tz,
        psi_center - window, psi_center + window, ngrid, N_GOLDEN, local)
    return _place(theta, robot, x_head, psi, zoff, support)


def segment_support(stance: np.ndarray) -> np.ndarray:
    """A segment's toes bear load when either of its legs is in stance."""
    return np.asarray(stance, dtype=bool).any(axis=1)


def settle_chain(state: SimState, commands: ControlOutput, terrain: TerrainProfile,
                 robot: RobotConfig, support=None, window=PSI_WINDOW) -> SimState:
    """Apply joint commands and rest the chain at the current head-joint x.

    A pose the body can only reach by sweeping through the terrain is
    infeasible; the chain then keeps its previous pose and ``settle_blocked``
    is set.
    """
    theta = np.clip(np.asarray(commands.theta_v, dtype=float), -robot.joint_limit, robot.joint_limit)
    if support is None:
        support = state.pose.support if state.pose is not None else np.ones(robot.n_segments, bool)
    center = state.pose.psi if state.pose is not None else 0.0
    pose = _solve(theta, robot, terrain, state.x_head, support, center, window)
    state.settle_blocked = state.pose is not None and _settle_infeasible(state.pose, pose, terrain)
    if not state.settle_blocked:
        state.joint_angles = theta
        state.pose = pose
    return state


def _settle_infeasible(p0: ChainPose, p1: ChainPose, terrain: TerrainProfile) -> bool:
    """Re-posing happens as a turn followed by a lift onto the terrain.

    The turn is taken at the old head-joint height. A vertex it carries
    more than SNAP_DEPTH into the ground through the side of a face, with
    open ground beside it, could only be lifted out by sliding up that face.
    """
    if _sweep_hits(p0.outline, p1.outline, terrain):
        return True
    lift = p1.z_head - p0.z_head
    if lift <= SNAP_DEPTH:
        return False
    turned = p1.outline - np.array([0.0, lift])
    tx, tz = terrain.arrays()
    x, z = turned[:, 0], turned[:, 1]
    deep = np.interp(x, tx, tz) - z > SNAP_DEPTH
    side = np.minimum(np.interp(x - SNAP_DEPTH, tx, tz), np.interp(x + SNAP_DEPTH, tx, tz)) < z
    return bool((deep & side).any())


def penetration(points: np.ndarray, terrain: TerrainProfile) -> tuple[np.ndarray, np.ndarray]:
    """Depth of terrain above each outline vertex and above each outline edge.

    ``points`` has shape (..., m, 2). Returns (vertex_depth (..., m),
    edge_depth (..., m-1)); positive values mean the body is inside the ground.
    Edge depth is taken at the terrain vertices the edge spans.
    """
    tx, tz = terrain.arrays()
    vd = np.interp(points[..., 0], tx, tz) - points[..., 1]
    a = points[..., :-1, :]
    b = points[..., 1:, :]
    lo = np.minimum(a[..., 0], b[..., 0])[..., None]
    hi = np.maximum(a[..., 0], b[..., 0])[..., None]
    inside = (tx >= lo) & (tx <= hi) & ((hi - lo) > 1e-12)
    dx = b[..., 0] - a[..., 0]
    safe = np.where(np.abs(dx) > 0.0, dx, 1.0)
    zl = a[..., 1, None] + (tx - a[..., 0, None]) * ((b[..., 1] - a[..., 1]) / safe)[..., None]
    ed = np.where(inside, tz - zl, -np.inf).max(axis=-1)
    return vd, ed


def min_clearance(pose: ChainPose, terrain: TerrainProfile) -> float:
    vd, ed = penetration(pose.outline, terrain)
    return -float(max(vd.max(), ed.max() if ed.size else -np.inf))


def _terrain_slope_ahead(terrain: TerrainProfile, x):
    tx, tz = terrain.arrays()
    i = np.clip(np.searchsorted(tx, x, side="right") - 1, 0, len(tx) - 2)
    inside = (x >= tx[0]) & (x < tx[-1])
    slope = np.arctan2(tz[i + 1] - tz[i], tx[i + 1] - tx[i])
    return np.where(inside, slope, 0.0)


def terrain_max(terrain: TerrainProfile, lo, hi) -> np.ndarray:
    """Highest ground over each interval [lo, hi]."""
    tx, tz = terrain.arrays()
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    out = np.maximum(np.interp(lo, tx, tz), np.interp(hi, tx, tz))
    for k in range(lo.size):
        sel = (tx > lo[k]) & (tx < hi[k])
        if sel.any():
            out[k] = max(out[k], tz[sel].max())
    return out


def head_abuts(pose: ChainPose, terrain: TerrainProfile, reach: float, delta: float = DELTA) -> bool:
    """True when the head's front, carried ``reach`` forward, would meet a rise above it.

    The front is the hook, the nose chamfer and the belly under the head
    joint; a rise that stays below all three passes under the head.
    """
    front = pose.outline[:3]
    top = terrain_max(terrain, front[:, 0], front[:, 0] + reach)
    return bool((top > front[:, 1] + delta).any())


def _sweep_hits(p0: np.ndarray, p1: np.ndarray, terrain: TerrainProfile, delta=DELTA, nsub=N_SUB):
    """Indices of outline points whose straight path from p0 to p1 dips into the ground."""
    s = np.linspace(0.0, 1.0, nsub + 1)[1:, None, None]
    path = p0[None] + s * (p1 - p0)[None]
    vd, ed = penetration(path, terrain)
    bad = np.nonzero((vd > delta).any(axis=0))[0].tolist()
    for k in np.nonzero((ed > delta).any(axis=0))[0]:
        bad += [int(k), int(k) + 1]
    return sorted(set(bad))


def _toe_sweep(t0: np.ndarray, t1: np.ndarray, terrain: TerrainProfile, delta=DELTA, nsub=N_SUB):
    s = np.linspace(0.0, 1.0, nsub + 1)[1:, None, None]
    path = t0[None] + s * (t1 - t0)[None]
    tx, tz = terrain.arrays()
    depth = np.interp(path[..., 0], tx, tz) - path[..., 1]
    return (depth > delta).any(axis=0)


def leg_contacts(pose: ChainPose, stance: np.ndarray, terrain: TerrainProfile, robot: RobotConfig,
                 delta: float = DELTA) -> np.ndarray:
    """(n, 2) contact flags: stance legs whose toe finds ground within reach."""
    toes = pose.toes(robot)
    reach = toes[:, 1] - terrain.g(toes[:, 0]) <= delta + robot.leg_reach + 1e-12
    ok = reach & pose.support
    return np.asarray(stance, dtype=bool) & ok[:, None]


def propulsion_factors(pose: ChainPose, contacts: np.ndarray, stance: np.ndarray,
                       terrain: TerrainProfile, robot: RobotConfig) -> tuple[float, float]:
    """Contact fraction c and slope factor r for the propulsion law."""
    n_stance = int(np.count_nonzero(stance))
    c = np.count_nonzero(contacts) / n_stance if n_stance else 0.0
    seg = np.nonzero(contacts.any(axis=1))[0]
    if seg.size >= 2:
        toes_x = pose.shoulder[seg, 0]
        ground = terrain.g(toes_x)
        dz = float(ground[np.argmax(toes_x)] - ground[np.argmin(toes_x)])
        alpha = math.asin(max(-1.0, min(1.0, dz / robot.L)))
    else:
        alpha = 0.0
    alpha_max = 0.8 * math.atan(robot.mu)
    r = max(0.0, min(1.0, 1.0 - alpha / alpha_max))
    return c, r


def pivot_check(state: SimState, terrain: TerrainProfile, robot: RobotConfig,
                delta: float = DELTA) -> Optional[str]:
    """Anchor of the head on raised terrain: ``"belly"``, ``"leg"`` or None.

    A contact counts only on ground higher than the ground under the head
    joint, and a body vertex only where that ground is shallow enough to bear
    load. Belly anchors must lie within Lc of the head joint, leg (hook)
    anchors within Lh.
    """
    pose = state.pose
    j = np.array([pose.x_head, pose.z_head])
    base = terrain.g(pose.x_head)
    ol = pose.outline[:3]
    tx, tz = terrain.arrays()
    found = None
    gz = terrain.g(ol[:, 0])
    bearing = _terrain_slope_ahead(terrain, ol[:, 0]) < math.atan(1.0 / robot.mu)
    for k in range(3):
        if bearing[k] and abs(ol[k, 1] - gz[k]) < delta and gz[k] > base + delta:
            d = float(np.hypot(*(ol[k] - j)))
            if k == 0 and d <= robot.Lh + 1e-9:
                return "leg"
            if k > 0 and d <= robot.Lc + 1e-9:
                found = "belly"
    for k in range(2):
        a, b = ol[k], ol[k + 1]
        lo, hi = min(a[0], b[0]), max(a[0], b[0])
        sel = (tx >= lo) & (tx <= hi) & (tz > base + delta)
        if hi - lo <= 1e-12 or not sel.any():
            continue
        zl = a[1] + (tx[sel] - a[0]) * (b[1] - a[1]) / (b[0] - a[0])
        close = np.abs(zl - tz[sel]) < delta
        for px, pz in zip(tx[sel][close], tz[sel][close]):
            d = float(np.hypot(px - j[0], pz - j[1]))
            if k == 0 and d <= robot.Lh + 1e-9:
                return "leg"
            if d <= robot.Lc + 1e-9:
                found = "belly"
    return found


def com_height(pose: ChainPose, robot: RobotConfig) -> float:
    m = np.asarray(robot.masses, dtype=float)
    return float(m @ pose.com[:, 1] / m.sum())


def _try_move(state: SimState, dx: float, terrain: TerrainProfile, robot: RobotConfig) -> ChainPose:
    """Rest the chain at x + dx; legs whose toes would drag through a rise fold away."""
    p0 = state.pose
    support = p0.support.copy()
    toes0 = p0.toes(robot)
    for _ in range(3):
        p1 = _solve(p0.theta, robot, terrain, state.x_head + dx, support, p0.psi)
        fold = _toe_sweep(toes0, p1.toes(robot), terrain) & support
        if not fold.any():
            return p1
        support &= ~fold
    return _solve(p0.theta, robot, terrain, state.x_head + dx, support, p0.psi)


def advance(state: SimState, terrain: TerrainProfile, robot: RobotConfig, params: GaitParams,
            dt: float) -> tuple[SimState, StepOutcome]:
    """Propel the settled chain forward by v_nom * dt/T * c * r unless the head abuts a rise.

    A head blocked by a rise taller than its clearance still advances when a
    pivot hold anchors it on the raised ground.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    stance = state.stance if state.stance is not None else np.ones((robot.n_segments, 2), bool)
    contacts = leg_contacts(state.pose, stance, terrain, robot)
    c, r = propulsion_factors(state.pose, contacts, stance, terrain, robot)
    dx = robot.v_nom * (dt / params.cycle_period) * c * r
    moved = 0.0
    head_blocked = False
    if dx > 0:
        pivot = pivot_check(state, terrain, robot)
        head_blocked = pivot is None and head_abuts(state.pose, terrain, dx + ABUT_GAP)
        if not head_blocked:
            state.pose = _try_move(state, dx, terrain, robot)
            state.x_head = state.pose.x_head
            moved = dx
    pivot = pivot_check(state, terrain, robot)
    return state, StepOutcome(moved, head_blocked or state.settle_blocked, pivot, head_blocked, c, r)


# ---------------------------------------------------------------------------
# trial loop


@dataclass
class TrialRecord:
    """Per-tick trace columns plus a summary dictionary."""

    columns: dict
    summary: dict
    segment_count: int = 6

    def __len__(self):
        return len(self.columns["tick"])

    def column(self, name) -> np.ndarray:
        return np.asarray(self.columns[name])


def trace_header(n_segments: int) -> list[str]:
    nj = n_segments - 1
    cols = ["tick", "t", "tau_b", "x_head", "z_head", "pitch_head", "tail_x", "tail_z"]
    cols += [f"theta_{j}" for j in range(1, nj + 1)]
    cols += ["theta_a", "climb", "hit", "z_local", "z_max", "z_min", "head_cmd", "pitch_joint",
             "mode", "advanced", "blocked", "pivot", "c", "r", "min_clearance"]
    cols += [f"contact_{s}{side}" for s in range(1, n_segments + 1) for side in "LR"]
    cols += [f"duty_{s}" for s in range(1, n_segments + 1)]
    return cols


def start_x(terrain: TerrainProfile, robot: RobotConfig, offset: float) -> float:
    """Head-joint x that leaves ``offset`` between the level antenna tip and the first obstacle."""
    return terrain.near_edge - offset - robot.L1 - robot.La


def run_trial(scenario, controller: Optional[str] = None, cycles: Optional[int] = None,
              start_offset: Optional[float] = None) -> TrialRecord:
    """Tick the full sense-estimate-control-settle-advance loop.

    ``scenario`` supplies ``terrain``, ``robot``, ``gait``, ``antenna``,
    ``head``, ``pitch``, ``controller``, ``cycles`` and ``start_offset``;
    the keyword arguments override the matching fields.
    """
    wall0 = time.perf_counter()
    robot: RobotConfig = scenario.robot
    gait: GaitParams = scenario.gait
    terrain: TerrainProfile = scenario.terrain
    antenna: AntennaConfig = scenario.antenna
    mode_name = controller or scenario.controller
    if mode_name not in (OPEN_LOOP, "feedback"):
        raise ValueError(f"unknown controller {mode_name!r}")
    n_cycles = int(cycles if cycles is not None else scenario.cycles)
    if n_cycles < 1:
        raise ValueError("cycles must be >= 1")
    offset = scenario.start_offset if start_offset is None else start_offset
    if gait.n != robot.n_segments:
        raise ValueError("gait leg-pair count must equal the segment count")

    ticks = TICKS_PER_CYCLE
    dt = gait.cycle_period / ticks
    nj = robot.n_segments - 1
    feedback = mode_name == "feedback"
    ctrl = FeedbackController(scenario.head, scenario.pitch, robot.joint_limit, ticks // 4)
    servo = JointServo(nj, robot.joint_limit / (ticks / 2))
    history = SensorHistory(ticks // 4, ticks, 2 * robot.n_segments)

    x0 = start_x(terrain, robot, offset)
    wave0 = vertical_wave(0.0, gait)
    servo.reset(wave0)
    stance0 = stance_mask(contact_phase(0.0, gait), gait)
    pose = _solve(wave0, robot, terrain, x0, segment_support(stance0), 0.0, window=1.2, ngrid=121,
                  local=False)
    state = SimState(x_head=x0, joint_angles=wave0.copy(), theta_a=0.0, pose=pose,
                     history=history, stance=stance0)

    header = trace_header(robot.n_segments)
    cols = {k: [] for k in header}
    far = terrain.far_edge
    success_tick = None
    stuck = False
    cycle_start_x = x0
    slow_cycles = 0
    max_z = pose.z_head

    for tick in range(n_cycles * ticks):
        t = tick * dt
        tau_b = 2 * math.pi * t / gait.cycle_period
        tau_c = contact_phase(tau_b, gait)
        stance = stance_mask(tau_c, gait)
        wave = vertical_wave(tau_b, gait)
        if feedback:
            out = ctrl.step(tick, t, history, wave)
            controlled = np.zeros(nj, bool)
            controlled[0] = True
            if out.active_pitch_joint is not None:
                controlled[out.active_pitch_joint - 1] = True
            realized = servo.update(out.theta_v, wave, controlled)
            head_cmd = ctrl.head_target
            mode = out.mode
        else:
            out = ControlOutput(tuple(wave), None, OPEN_LOOP)
            realized = servo.update(wave, wave, np.zeros(nj, bool))
            head_cmd = float(wave[0])
            mode = OPEN_LOOP
        theta = realized.copy()
        theta[0] = min(theta[0] + state.climb, robot.joint_limit)

        state.tick, state.clock, state.tau_b, state.stance = tick, t, tau_b, stance
        settle_chain(state, ControlOutput(tuple(theta), out.active_pitch_joint, mode), terrain, robot,
                     support=segment_support(stance))
        state, outcome = advance(state, terrain, robot, gait, dt)

        # front legs climb a blocking face while the head is being raised
        rate = servo.rate
        head_up = feedback and mode == RAISE_UP and out.active_pitch_joint != 1
        if state.settle_blocked:
            held = state.joint_angles.copy()
            held[0] = max(-robot.joint_limit, held[0] - state.climb)
            servo.hold(held)
        elif head_up and outcome.head_blocked and outcome.pivot is None:
            state.climb = min(state.climb + rate, max(0.0, robot.joint_limit - realized[0]))
        elif not head_up:
            state.climb = max(0.0, state.climb - rate)

        pose = state.pose
        state.theta_a = antenna_rest_angle(pose.head, state.theta_a, antenna_angle(tau_b, antenna),
                                           antenna, robot, terrain)
        hit, zl = probe(pose.head, pose.theta[0], state.theta_a, antenna, robot, terrain)
        contacts = leg_contacts(pose, stance, terrain, robot)
        state.contacts = contacts
        push_sample(history, hit, zl, contacts.reshape(-1))
        duties = duty_factors(history.contact_traces, 2, ticks).values

        est = ctrl.last_estimate
        row = [tick, t, tau_b, pose.x_head, pose.z_head, pose.psi, pose.tail[0], pose.tail[1]]
        row += list(pose.theta)
        row += [state.theta_a, state.climb, int(hit), zl,
                est.z_max if feedback and est.z_max is not None else math.nan,
                est.z_min if feedback and est.z_min is not None else math.nan,
                head_cmd, out.active_pitch_joint or 0, mode, outcome.advanced,
                int(outcome.blocked), outcome.pivot or "", outcome.c, outcome.r,
                min_clearance(pose, terrain)]
        row += [int(v) for v in contacts.reshape(-1)]
        row += list(duties)
        for k, v in zip(header, row):
            cols[k].append(v)

        max_z = max(max_z, pose.z_head)
        if success_tick is None and pose.x_head > far:
            success_tick = tick
        if (tick + 1) % ticks == 0:
            if pose.x_head - cycle_start_x < STUCK_DX:
                slow_cycles += 1
            else:
                slow_cycles = 0
            cycle_start_x = pose.x_head
            if slow_cycles >= STUCK_CYCLES and success_tick is None:
                stuck = True
                break

    xs = np.asarray(cols["x_head"])
    summary = {
        "scenario": getattr(scenario, "name", ""),
        "controller": mode_name,
        "success": success_tick is not None,
        "stuck": stuck,
        "success_tick": success_tick,
        "cycles_used": None if success_tick is None else (success_tick + 1) / ticks,
        "cycles": n_cycles,
        "ticks": len(xs),
        "x_start": float(x0),
        "x_final": float(xs[-1]),
        "total_dx": float(xs[-1] - x0),
        "max_height": float(max_z),
        "far_edge": float(far),
        "wall_time": time.perf_counter() - wall0,
    }
    return TrialRecord(cols, summary, robot.n_segments)
