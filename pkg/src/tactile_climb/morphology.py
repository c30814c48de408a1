"""Robot description and sagittal terrain profiles.

Lengths are meters and angles radians. Both config types are frozen so one
instance can be shared across concurrently running trials.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

RAMP_RUN = 0.001  # horizontal run used for "vertical" faces


@dataclass(frozen=True)
class RobotConfig:
    """Morphology constants of the many-legged robot.

    The first block of fields are the robot's nominal dimensions. The second
    block holds simulator geometry chosen for this model:
    segment masses, where each segment carries its leg pair, how far a leg
    can passively extend to find ground, and the chamfer under the head's
    leading edge.
    """

    n_segments: int = 6
    segment_length: float = 0.15
    L1: float = 0.15
    La: float = 0.10
    h_belly: float = 0.05
    leg_radius: float = 0.06
    Lc: float = 0.15
    Lh: float = 0.17
    L: float = 0.95
    mu: float = 0.5
    v_nom: float = 0.20  # meters per gait cycle on flat ground
    joint_limit: float = math.pi / 2

    masses: tuple = (0.27, 0.18, 0.1375, 0.1375, 0.1375, 0.1375)
    leg_frac: float = 0.5
    leg_reach: float = 0.03
    nose_run: float = 0.04
    nose_rise: float = 0.03

    def __post_init__(self):
        if isinstance(self.masses, list):
            object.__setattr__(self, "masses", tuple(self.masses))
        errors = self.problems()
        if errors:
            raise ValueError("invalid RobotConfig: " + "; ".join(errors))

    def problems(self) -> list[str]:
        out = []
        if self.n_segments < 3:
            out.append("n_segments must be >= 3")
        for name in ("segment_length", "L1", "La", "h_belly", "leg_radius", "Lc", "Lh", "L", "mu",
                     "v_nom", "joint_limit"):
            if not getattr(self, name) > 0:
                out.append(f"{name} must be > 0")
        if self.Lc > self.L1 + self.La:
            out.append("Lc must not exceed L1 + La")
        if not self.h_belly < self.leg_radius:
            out.append("h_belly must be below leg_radius")
        if len(self.masses) != self.n_segments:
            out.append("masses needs one entry per segment")
        elif min(self.masses) <= 0:
            out.append("masses must be positive")
        if not 0.0 <= self.leg_frac <= 1.0:
            out.append("leg_frac must lie in [0, 1]")
        if self.leg_reach < 0 or self.nose_run < 0 or self.nose_rise < 0:
            out.append("leg_reach, nose_run and nose_rise must be >= 0")
        if self.nose_run > self.Lh:
            out.append("nose_run must not exceed Lh")
        return out

    @property
    def belly_offset(self) -> float:
        """Depth of the belly plate below the backbone axis."""
        return self.leg_radius - self.h_belly

    def segment_lengths(self) -> np.ndarray:
        return np.array([self.L1] + [self.segment_length] * (self.n_segments - 1))

    def com_fractions(self) -> np.ndarray:
        """Mass-centre position along each segment, measured from its rear end.

        The head's front mechanism has its centre of mass ``Lc`` ahead of the
        head joint; the fraction may exceed 1 when the antenna shifts it past
        the nose.
        """
        return np.array([self.Lc / self.L1] + [0.5] * (self.n_segments - 1))

    def geometry_vector(self) -> np.ndarray:
        return np.array([self.belly_offset, self.leg_radius, self.leg_frac, self.Lh,
                         self.nose_run, self.nose_rise])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["masses"] = list(self.masses)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RobotConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown RobotConfig keys: {', '.join(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Obstacle:
    """Footprint of one raised feature on a course, for success bookkeeping."""

    near_x: float
    far_x: float
    height: float


@dataclass(frozen=True)
class TerrainProfile:
    """Piecewise-linear ground height z = g(x) with clamped ends."""

    vertices: tuple
    obstacles: tuple = field(default=())
    name: str = ""

    def __post_init__(self):
        v = tuple((float(x), float(z)) for x, z in self.vertices)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if len(v) < 2:
            raise ValueError("terrain needs at least 2 vertices")
        xs = np.array([p[0] for p in v])
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite([p[1] for p in v])):
            raise ValueError("terrain vertices must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("terrain x must be strictly increasing")

    @property
    def x(self) -> np.ndarray:
        return np.ascontiguousarray([p[0] for p in self.vertices], dtype=float)

    @property
    def z(self) -> np.ndarray:
        return np.ascontiguousarray([p[1] for p in self.vertices], dtype=float)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x, self.z

    def g(self, x):
        """Ground height at ``x`` (scalar or array)."""
        out = np.interp(x, self.x, self.z)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def far_edge(self) -> float:
        """x past which the head counts as having crossed every obstacle."""
        if self.obstacles:
            return max(o.far_x for o in self.obstacles)
        return self.vertices[-1][0]

    @property
    def near_edge(self) -> float:
        if self.obstacles:
            return min(o.near_x for o in self.obstacles)
        return self.vertices[0][0]

    @property
    def max_height(self) -> float:
        return max(p[1] for p in self.vertices)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "vertices": [list(p) for p in self.vertices],
            "obstacles": [asdict(o) for o in self.obstacles],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TerrainProfile":
        obs = tuple(Obstacle(**o) for o in data.get("obstacles", ()))
        return cls(vertices=tuple(map(tuple, data["vertices"])), obstacles=obs,
                   name=data.get("name", ""))


def ground_height(terrain: TerrainProfile, x: float) -> float:
    """Ground height under ``x``; clamped to the end heights outside the profile."""
    return terrain.g(x)


def flat_course(length: float = 3.0, z: float = 0.0) -> TerrainProfile:
    return TerrainProfile(((0.0, z), (length, z)), name="flat")


def make_box_course(height: float, width: float = 0.45, approach: float = 0.5,
                    ramp: float = RAMP_RUN) -> TerrainProfile:
    """Flat approach, box of ``height`` and ``width``, flat exit as long as the approach.

    The rise occupies ``[approach - ramp, approach]`` and the drop mirrors it
    after the plateau.
    """
    if not width > 0:
        raise ValueError("box width must be positive")
    if height < 0:
        raise ValueError("box height must be non-negative")
    if not 0 < ramp < approach:
        raise ValueError("need 0 < ramp < approach")
    a, w = float(approach), float(width)
    end = 2 * a + w
    if height == 0:
        return TerrainProfile(((0.0, 0.0), (end, 0.0)), name="box:0")
    verts = ((0.0, 0.0), (a - ramp, 0.0), (a, height), (a + w, height),
             (a + w + ramp, 0.0), (end, 0.0))
    return TerrainProfile(verts, obstacles=(Obstacle(a - ramp, a + w + ramp, float(height)),),
                          name=f"box:{height:g}")


def make_multi_box_course(heights: Sequence[float], gaps: Sequence[float], width: float = 0.45,
                          approach: float = 0.5, ramp: float = RAMP_RUN) -> TerrainProfile:
    """Boxes in a row; ``gaps[k]`` is the flat run between box k and box k+1."""
    if len(gaps) != max(len(heights) - 1, 0):
        raise ValueError("need one gap between each pair of boxes")
    if not width > 0:
        raise ValueError("box width must be positive")
    verts = [(0.0, 0.0)]
    obs = []
    x = float(approach)
    for k, h in enumerate(heights):
        verts += [(x - ramp, 0.0), (x, h), (x + width, h), (x + width + ramp, 0.0)]
        obs.append(Obstacle(x - ramp, x + width + ramp, float(h)))
        x += width + 2 * ramp + (gaps[k] if k < len(gaps) else 0.0)
    verts.append((x + approach, 0.0))
    name = "boxes:" + "+".join(f"{h:g}" for h in heights)
    return TerrainProfile(tuple(verts), obstacles=tuple(obs), name=name)


def make_cylinder_stack_course(base_height: float, slope_deg: float, top_height: float,
                               top_width: float = 0.18, approach: float = 0.5,
                               bump: float = 0.015, diameter: float = 0.09,
                               samples_per_bump: int = 8) -> TerrainProfile:
    """Trapezoid with scalloped inclined faces standing in for a bundle of tubes.

    Each face rises from ``base_height`` to ``top_height`` at ``slope_deg``.
    One bump of height ``bump`` is laid per tube layer along the face, so the
    face still meets the plateau and the ground at its nominal corners.
    """
    if not 0 < slope_deg < 90:
        raise ValueError("slope_deg must lie in (0, 90)")
    if bump < 0 or bump > diameter / 2:
        raise ValueError("bump depth must lie in [0, tube radius]")
    rise = top_height - base_height
    a = float(approach)
    if rise <= 0:
        return TerrainProfile(((0.0, base_height), (2 * a + top_width, base_height)),
                              name="cylinders:flat")
    run = rise / math.tan(math.radians(slope_deg))
    layers = max(1, int(round(rise / (diameter * math.sin(math.radians(slope_deg))))))
    u = np.linspace(0.0, 1.0, layers * samples_per_bump + 1)
    face = base_height + rise * u + bump * np.abs(np.sin(math.pi * layers * u))
    face[-1] = top_height
    up_x = a + run * u
    down_x = a + run + top_width + run * u
    verts = [(0.0, base_height)]
    verts += list(zip(up_x, face))
    verts += list(zip(down_x, face[::-1]))
    end = down_x[-1] + a
    verts.append((end, base_height))
    obs = (Obstacle(a, float(down_x[-1]), float(top_height)),)
    return TerrainProfile(tuple(verts), obstacles=obs,
                          name=f"cylinders:{slope_deg:g}deg:{top_height:g}")


def face_run(rise: float, slope_deg: float) -> float:
    """Horizontal run of an inclined face."""
    return rise / math.tan(math.radians(slope_deg))
