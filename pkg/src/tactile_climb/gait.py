"""Wave templates for leg stepping, horizontal and vertical body undulation.

Leg indices run 1..n (one left/right pair per segment) and joint indices
1..n-1 (joint i sits between segment i and segment i+1). Vertical joint
angles are positive when the segment ahead of the joint pitches up.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

TWO_PI = 2.0 * math.pi
AV_MAX = 2.0 * math.pi / 9.0  # largest vertical amplitude with stable forward motion


@dataclass(frozen=True)
class GaitParams:
    Theta_leg: float = math.pi / 6
    Theta_body: float = math.pi / 18
    A_v: float = math.pi / 9
    D: float = 0.5
    xi: float = 1.5
    n: int = 6
    cycle_period: float = 3.0

    def __post_init__(self):
        errors = self.problems()
        if errors:
            raise ValueError("invalid GaitParams: " + "; ".join(errors))

    def problems(self) -> list[str]:
        out = []
        if not 0.0 < self.D < 1.0:
            out.append("D must lie in (0, 1)")
        if self.Theta_leg < 0 or self.Theta_body < 0 or self.A_v < 0:
            out.append("amplitudes must be non-negative")
        if self.A_v > AV_MAX + 1e-12:
            out.append(f"A_v={self.A_v:.4f} exceeds the stability limit 2*pi/9={AV_MAX:.4f}")
        if not self.xi > 0:
            out.append("xi must be positive")
        if self.n < 2:
            out.append("n must be >= 2")
        if not self.cycle_period > 0:
            out.append("cycle_period must be positive")
        return out

    @property
    def shift(self) -> float:
        """Phase lag between neighbouring legs or joints, 2*pi*xi/n."""
        return TWO_PI * self.xi / self.n

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GaitParams":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown GaitParams keys: {', '.join(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class GaitPhase:
    """Body phase and the contact phase that coordinates stepping with it."""

    tau_b: float
    tau_c: float

    @classmethod
    def from_body(cls, tau_b: float, params: GaitParams) -> "GaitPhase":
        return cls(tau_b, contact_phase(tau_b, params))

    @classmethod
    def at_time(cls, t: float, params: GaitParams) -> "GaitPhase":
        return cls.from_body(TWO_PI * t / params.cycle_period, params)


def contact_phase(tau_b, params: GaitParams):
    return tau_b - (params.xi / params.n + 0.5) * math.pi


def _check_leg(i: int, params: GaitParams):
    if not 1 <= i <= params.n:
        raise IndexError(f"leg index {i} outside 1..{params.n}")


def _check_joint(i: int, params: GaitParams):
    if not 1 <= i <= params.n - 1:
        raise IndexError(f"joint index {i} outside 1..{params.n - 1}")


def _template(tau, params: GaitParams):
    """Piecewise cosine of the first leg, vectorised over ``tau``."""
    t = np.mod(tau, TWO_PI)
    D = params.D
    stance = t < TWO_PI * D
    a = np.cos(t / (2.0 * D))
    b = -np.cos((t - TWO_PI * D) / (2.0 * (1.0 - D)))
    return params.Theta_leg * np.where(stance, a, b)


def leg_angle_left(phase, i: int, params: GaitParams):
    """Shoulder angle of left leg ``i`` at contact phase ``phase``."""
    _check_leg(i, params)
    out = _template(np.asarray(phase, dtype=float) - params.shift * (i - 1), params)
    return float(out) if np.ndim(out) == 0 else out


def leg_angle_right(phase, i: int, params: GaitParams):
    """Right leg ``i``; the left template half a cycle later."""
    return leg_angle_left(np.asarray(phase, dtype=float) + math.pi, i, params)


def body_angle(tau_b, i: int, params: GaitParams):
    """Horizontal joint ``i``. Logged only; it does not act in the sagittal plane."""
    _check_joint(i, params)
    out = params.Theta_body * np.cos(np.asarray(tau_b, dtype=float) - params.shift * (i - 1))
    return float(out) if np.ndim(out) == 0 else out


def vertical_angle(tau_b, i: int, params: GaitParams):
    """Vertical joint ``i``; twice the temporal frequency of the horizontal wave."""
    _check_joint(i, params)
    out = params.A_v * np.cos(2.0 * np.asarray(tau_b, dtype=float) - 2.0 * params.shift * (i - 1))
    return float(out) if np.ndim(out) == 0 else out


def stance_flag(phase, i: int, side: str, params: GaitParams) -> bool:
    """True while the leg is on the stance branch of its template."""
    _check_leg(i, params)
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    p = phase - params.shift * (i - 1) + (math.pi if side == "right" else 0.0)
    return bool(np.mod(p, TWO_PI) < TWO_PI * params.D)


def vertical_wave(tau_b: float, params: GaitParams) -> np.ndarray:
    """All vertical joint angles, joints 1..n-1."""
    j = np.arange(params.n - 1)
    return params.A_v * np.cos(2.0 * tau_b - 2.0 * params.shift * j)


def body_wave(tau_b: float, params: GaitParams) -> np.ndarray:
    j = np.arange(params.n - 1)
    return params.Theta_body * np.cos(tau_b - params.shift * j)


def stance_mask(tau_c: float, params: GaitParams) -> np.ndarray:
    """(n, 2) stance flags; column 0 is the left leg, column 1 the right."""
    p = tau_c - params.shift * np.arange(params.n)
    both = np.stack((p, p + math.pi), axis=1)
    return np.mod(both, TWO_PI) < TWO_PI * params.D


def leg_angles(tau_c: float, params: GaitParams) -> np.ndarray:
    """(n, 2) shoulder angles, left then right."""
    p = tau_c - params.shift * np.arange(params.n)
    return _template(np.stack((p, p + math.pi), axis=1), params)
