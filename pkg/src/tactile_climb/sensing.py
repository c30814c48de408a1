"""Geometric antenna and foot-contact sensors plus their rolling histories."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .morphology import RobotConfig, TerrainProfile

DELTA = 0.005  # contact tolerance, meters
TICKS_PER_CYCLE = 40
WINDOW_TICKS = TICKS_PER_CYCLE // 4


@dataclass(frozen=True)
class AntennaConfig:
    A_a: float = 5 * math.pi / 18
    w_a: float = 4.0
    hit_force_threshold: float = 1.0  # informational; contact is geometric
    La: float = 0.10
    delta: float = DELTA

    def __post_init__(self):
        if not 0 < self.A_a < math.pi / 2:
            raise ValueError("A_a must lie in (0, pi/2)")
        if not self.w_a > 0:
            raise ValueError("w_a must be positive")
        if not self.La > 0:
            raise ValueError("La must be positive")


@dataclass(frozen=True)
class HeadPose:
    """World pose of the head segment: joint position and absolute pitch."""

    x: float
    z: float
    pitch: float


def antenna_angle(tau_b, cfg: AntennaConfig):
    """Sweep angle of the antenna joint relative to the head axis."""
    out = cfg.A_a * np.sin(cfg.w_a * np.asarray(tau_b, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def tip_z_local(theta_v1, theta_a, robot: RobotConfig, La: float | None = None):
    """Antenna tip height in the head-joint frame from joint angles alone."""
    la = robot.La if La is None else La
    return robot.L1 * np.sin(theta_v1) + la * np.sin(np.add(theta_v1, theta_a))


def antenna_tip(head: HeadPose, theta_a: float, robot: RobotConfig, La: float) -> tuple[float, float]:
    nx = head.x + robot.L1 * math.cos(head.pitch)
    nz = head.z + robot.L1 * math.sin(head.pitch)
    return nx + La * math.cos(head.pitch + theta_a), nz + La * math.sin(head.pitch + theta_a)


def _tip_inside(head: HeadPose, theta_a: float, robot: RobotConfig, La: float,
                terrain: TerrainProfile) -> bool:
    tx, tz = antenna_tip(head, theta_a, robot, La)
    return tz < terrain.g(tx)


def antenna_rest_angle(head: HeadPose, previous: float, commanded: float, cfg: AntennaConfig,
                       robot: RobotConfig, terrain: TerrainProfile,
                       step: float = math.radians(1.0)) -> float:
    """Antenna joint angle reached when sweeping toward ``commanded``.

    The antenna is rigid: it stops where its tip first meets the terrain.
    When the body has carried the tip into the ground, it is first deflected
    to the nearest free angle within +-pi/2 (upward on ties).
    """
    lim = math.pi / 2

    def inside(a):
        return _tip_inside(head, a, robot, cfg.La, terrain)

    def boundary(free, blocked):
        for _ in range(30):
            mid = 0.5 * (free + blocked)
            if inside(mid):
                blocked = mid
            else:
                free = mid
        return free

    start = float(previous)
    if inside(start):
        found = None
        for k in range(1, int(math.ceil(2 * lim / step)) + 1):
            for a in (start + k * step, start - k * step):
                if -lim <= a <= lim and not inside(a):
                    found = a
                    break
            if found is not None:
                break
        if found is None:
            return float(commanded)
        start = boundary(found, found - step if found > start else found + step)
    n = max(1, int(math.ceil(abs(commanded - start) / step)))
    a0 = start
    for k in range(1, n + 1):
        a1 = start + (commanded - start) * k / n
        if inside(a1):
            return boundary(a0, a1)
        a0 = a1
    return float(commanded)


def probe(head_pose: HeadPose, theta_v1: float, theta_a: float, cfg: AntennaConfig,
          robot: RobotConfig, terrain: TerrainProfile) -> tuple[bool, float]:
    """Antenna hit bit and the head-frame tip height.

    The hit is geometric: the tip lies at or below the ground under it plus
    the contact tolerance. The returned height ignores the world pose.
    """
    tx, tz = antenna_tip(head_pose, theta_a, robot, cfg.La)
    hit = tz <= terrain.g(tx) + cfg.delta
    return bool(hit), float(tip_z_local(theta_v1, theta_a, robot, cfg.La))


def foot_contact(leg_world_toe_z, terrain_z, delta: float = DELTA):
    """Binary contact; the tolerance boundary counts as contact."""
    return np.asarray(leg_world_toe_z) <= np.asarray(terrain_z) + delta + 1e-12


@dataclass
class SensorHistory:
    """Index-aligned hit/tip-height windows plus one cycle of per-leg contacts.

    ``contact_traces`` holds one deque per leg, ordered segment-major
    (segment 1 left, segment 1 right, segment 2 left, ...).
    """

    window: int = WINDOW_TICKS
    cycle: int = TICKS_PER_CYCLE
    n_legs: int = 12
    H: deque = field(default=None)
    Z: deque = field(default=None)
    contact_traces: list = field(default=None)

    def __post_init__(self):
        if self.window < 1 or self.cycle < 1:
            raise ValueError("window and cycle must be >= 1")
        if self.H is None:
            self.H = deque(maxlen=self.window)
        if self.Z is None:
            self.Z = deque(maxlen=self.window)
        if self.contact_traces is None:
            self.contact_traces = [deque(maxlen=self.cycle) for _ in range(self.n_legs)]

    def __len__(self):
        return len(self.H)

    def hits(self) -> np.ndarray:
        return np.fromiter(self.H, dtype=bool, count=len(self.H))

    def heights(self) -> np.ndarray:
        return np.fromiter(self.Z, dtype=float, count=len(self.Z))

    def copy(self) -> "SensorHistory":
        out = SensorHistory(self.window, self.cycle, self.n_legs)
        out.H.extend(self.H)
        out.Z.extend(self.Z)
        for src, dst in zip(self.contact_traces, out.contact_traces):
            dst.extend(src)
        return out


def push_sample(history: SensorHistory, hit: bool, z: float, leg_contacts=None) -> SensorHistory:
    """Append one tick of sensor data; the oldest samples fall out of the windows."""
    history.H.append(bool(hit))
    history.Z.append(float(z))
    if leg_contacts is not None:
        flags = list(leg_contacts)
        if len(flags) != history.n_legs:
            raise ValueError(f"expected {history.n_legs} leg contacts, got {len(flags)}")
        for trace, c in zip(history.contact_traces, flags):
            trace.append(bool(c))
    return history
