"""Closed-form climbing-capacity limits for box-like obstacles."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .morphology import RobotConfig


@dataclass(frozen=True)
class CapacityInput:
    h0: float = 0.07
    Lc: float = 0.15
    Lh: float = 0.17
    mu: float = 0.5
    L: float = 0.95

    def __post_init__(self):
        for name in ("h0", "Lc", "Lh", "L"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")


def bound_geometry(inp: CapacityInput) -> float:
    """Head-hook limit: head-joint clearance plus the longer pivot reach."""
    return inp.h0 + max(inp.Lc, inp.Lh)


def bound_friction(inp: CapacityInput) -> float:
    """Slope limit: body length on an incline at 80% of the friction angle."""
    return math.sin(0.8 * math.atan(inp.mu)) * inp.L


def max_climb_height(inp: CapacityInput) -> float:
    return min(bound_geometry(inp), bound_friction(inp))


def derived_h0(robot: RobotConfig, A_v: float) -> float:
    """Head-joint ground clearance at the crest of the vertical wave.

    Axis height over flat ground plus the rise of the first joint when the
    segment behind it tilts by half the relative joint amplitude.
    """
    return robot.leg_radius + robot.segment_length * math.sin(A_v / 2.0)


def slope_adjusted_h0(h0: float, slope_deg: float, advance: float = 0.05,
                      rise: float = math.inf) -> float:
    """Heuristic clearance gain on an inclined face (an extrapolation).

    If the head joint can creep ``advance`` meters onto the face before the
    hook, it gains ``advance * tan(slope)`` of height, capped by the rise.
    """
    if not 0 < slope_deg < 90:
        raise ValueError("slope_deg must lie in (0, 90)")
    return h0 + min(rise, advance * math.tan(math.radians(slope_deg)))


def capacity_from_robot(robot: RobotConfig, h0: float = 0.07) -> CapacityInput:
    return CapacityInput(h0=h0, Lc=robot.Lc, Lh=robot.Lh, mu=robot.mu, L=robot.L)
