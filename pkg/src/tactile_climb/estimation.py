"""Obstacle extremes from the antenna hit and tip-height windows."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sensing import SensorHistory

N_AVG = 3


@dataclass(frozen=True)
class ObstacleEstimate:
    z_max: Optional[float] = None
    z_min: Optional[float] = None
    window_ticks: int = 0

    def __post_init__(self):
        if self.z_max is not None and not self.z_max > 0:
            raise ValueError("z_max must be positive when present")
        if self.z_min is not None and not self.z_min < 0:
            raise ValueError("z_min must be negative when present")

    @property
    def any_hit(self) -> bool:
        return self.z_max is not None or self.z_min is not None


def estimate_from_arrays(hits, heights) -> ObstacleEstimate:
    """Average the three highest positive and three lowest negative hit heights."""
    h = np.asarray(hits, dtype=bool)
    z = np.asarray(heights, dtype=float)
    if h.shape != z.shape:
        raise ValueError("hit and height windows must be aligned")
    zh = z[h]
    pos = np.sort(zh[zh > 0])
    neg = np.sort(zh[zh < 0])
    z_max = float(pos[-N_AVG:].mean()) if pos.size else None
    z_min = float(neg[:N_AVG].mean()) if neg.size else None
    return ObstacleEstimate(z_max, z_min, int(h.size))


def estimate(history: SensorHistory) -> ObstacleEstimate:
    return estimate_from_arrays(history.hits(), history.heights())
