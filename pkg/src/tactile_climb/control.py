"""Head controller, duty-factor tracking, pitch-down controller and arbitration.

Controller distances are meters and gains radians per meter. Positive joint
angles pitch the segment ahead of the joint upward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .estimation import ObstacleEstimate, estimate
from .sensing import TICKS_PER_CYCLE, SensorHistory

RAISE_UP = "raise_up"
DRAG = "drag"
DESCEND = "descend"
OPEN_LOOP = "open_loop"
MODES = (RAISE_UP, DRAG, DESCEND)


@dataclass(frozen=True)
class HeadControllerParams:
    Kp1: float = 2.0
    Kp2: float = 1.0
    a: float = 0.06
    theta0: float = 2 * math.pi / 9

    def __post_init__(self):
        if self.Kp1 < 0 or self.Kp2 < 0:
            raise ValueError("gains must be non-negative")
        if not self.a > 0 or not self.theta0 > 0:
            raise ValueError("a and theta0 must be positive")


@dataclass(frozen=True)
class PitchDownParams:
    A_p: float = math.pi / 12
    theta_p: float = -math.pi / 6
    duty_threshold: float = 0.2

    def __post_init__(self):
        if self.A_p < 0:
            raise ValueError("A_p must be non-negative")
        if not self.theta_p < 0:
            raise ValueError("theta_p must be negative")
        if not 0 < self.duty_threshold < 1:
            raise ValueError("duty_threshold must lie in (0, 1)")


@dataclass(frozen=True)
class ControlOutput:
    theta_v: tuple
    active_pitch_joint: Optional[int] = None
    mode: str = DRAG


def head_branch(est: ObstacleEstimate) -> str:
    """Which of the three head-controller branches fires for ``est``."""
    if est.z_max is None and est.z_min is None:
        return DESCEND
    if est.z_min is None:
        return RAISE_UP
    if est.z_max is not None and est.z_max >= abs(est.z_min):
        return RAISE_UP
    return DRAG


def head_command(est: ObstacleEstimate, params: HeadControllerParams = HeadControllerParams(),
                 joint_limit: float = math.pi / 2) -> float:
    """Head joint target; raise on taller evidence, follow the contour otherwise."""
    branch = head_branch(est)
    if branch == RAISE_UP:
        cmd = params.Kp1 * (est.z_max + params.a)
    elif branch == DRAG:
        cmd = -params.Kp2 * (abs(est.z_min) - params.a)
    else:
        cmd = -params.theta0
    return float(np.clip(cmd, -joint_limit, joint_limit))


@dataclass(frozen=True)
class DutyFactors:
    values: np.ndarray
    complete: bool


def duty_factors(contact_traces: Sequence[Sequence[bool]], legs_per_segment=2,
                 cycle: int = TICKS_PER_CYCLE) -> DutyFactors:
    """Per-segment mean over its legs of the contact fraction.

    ``legs_per_segment`` is either a count (legs listed segment-major) or an
    explicit list of leg-index lists. ``complete`` is False when any trace
    covers less than ``cycle`` samples.
    """
    traces = [np.asarray(list(t), dtype=bool) for t in contact_traces]
    if isinstance(legs_per_segment, int):
        k = legs_per_segment
        groups = [list(range(s * k, (s + 1) * k)) for s in range(len(traces) // k)]
    else:
        groups = [list(g) for g in legs_per_segment]
    out = np.empty(len(groups))
    for s, g in enumerate(groups):
        fr = [traces[i].mean() if traces[i].size else 0.0 for i in g]
        out[s] = float(np.mean(fr)) if fr else 0.0
    complete = all(t.size >= cycle for t in traces)
    return DutyFactors(out, complete)


def select_floating_joint(duties, params: PitchDownParams = PitchDownParams()) -> Optional[int]:
    """Joint just ahead of the lowest-index floating segment (segments counted from 1).

    The head segment is never considered since no vertical joint lies ahead of it.
    """
    d = np.asarray(duties, dtype=float)
    for s in range(2, len(d) + 1):
        if d[s - 1] < params.duty_threshold:
            return s - 1
    return None


def pitch_down_command(t: float, params: PitchDownParams = PitchDownParams()) -> float:
    return params.A_p * math.sin(4.0 * t) + params.theta_p


def arbitrate(head_cmd: float, pitch_joint: Optional[int], pitch_cmd: float, wave: Sequence[float],
              joint_limit: float = math.pi / 2, mode: str = DRAG) -> ControlOutput:
    """Compose joint commands; the pitch-down controller wins at the head joint."""
    th = np.array(wave, dtype=float)
    th[0] = head_cmd
    if pitch_joint is not None:
        if not 1 <= pitch_joint <= len(th):
            raise IndexError(f"pitch joint {pitch_joint} outside 1..{len(th)}")
        th[pitch_joint - 1] = pitch_cmd
    th = np.clip(th, -joint_limit, joint_limit)
    return ControlOutput(tuple(float(v) for v in th), pitch_joint, mode)


@dataclass
class FeedbackController:
    """Stateful wrapper that re-plans targets on quarter-cycle boundaries."""

    head: HeadControllerParams = HeadControllerParams()
    pitch: PitchDownParams = PitchDownParams()
    joint_limit: float = math.pi / 2
    cadence: int = TICKS_PER_CYCLE // 4
    head_target: float = 0.0
    pitch_joint: Optional[int] = None
    pitch_target: float = 0.0
    mode: str = DRAG
    last_estimate: ObstacleEstimate = field(default_factory=ObstacleEstimate)
    last_duties: Optional[np.ndarray] = None

    def replan(self, t: float, history: SensorHistory):
        est = estimate(history)
        self.last_estimate = est
        self.mode = head_branch(est)
        self.head_target = head_command(est, self.head, self.joint_limit)
        duties = duty_factors(history.contact_traces, 2, history.cycle).values
        self.last_duties = duties
        self.pitch_joint = select_floating_joint(duties, self.pitch)
        self.pitch_target = pitch_down_command(t, self.pitch)

    def step(self, tick: int, t: float, history: SensorHistory, wave) -> ControlOutput:
        if tick % self.cadence == 0:
            self.replan(t, history)
        return arbitrate(self.head_target, self.pitch_joint, self.pitch_target, wave,
                         self.joint_limit, self.mode)


@dataclass
class JointServo:
    """Rate-limited tracking for controller-driven joints.

    Joints following the wave template track it exactly; a joint that was
    driven by a controller slews back until it meets the wave again.
    """

    n_joints: int
    rate: float
    angles: np.ndarray = None
    following: np.ndarray = None

    def __post_init__(self):
        if self.angles is None:
            self.angles = np.zeros(self.n_joints)
        if self.following is None:
            self.following = np.ones(self.n_joints, dtype=bool)

    def reset(self, angles):
        self.angles = np.array(angles, dtype=float)
        self.following[:] = True

    def hold(self, angles):
        """Pin the joints at ``angles``; each slews back to its target from there."""
        self.angles = np.array(angles, dtype=float)
        self.following[:] = False

    def update(self, targets, wave, controlled) -> np.ndarray:
        targets = np.asarray(targets, dtype=float)
        wave = np.asarray(wave, dtype=float)
        controlled = np.asarray(controlled, dtype=bool)
        step = np.clip(targets - self.angles, -self.rate, self.rate)
        moved = self.angles + step
        caught = ~controlled & (np.abs(targets - self.angles) <= self.rate)
        free = ~controlled & (self.following | caught)
        self.angles = np.where(free, wave, moved)
        self.following = free
        return self.angles.copy()
