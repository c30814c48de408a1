"""Backend selection for the settling kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module is bound. ``BACKEND`` names whichever one is active. Setting the
environment variable ``TACTILE_CLIMB_PURE=1`` forces the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("TACTILE_CLIMB_PURE", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

ground_height_many = _impl.ground_height_many
support_offset = _impl.support_offset
rest_pose = _impl.rest_pose

__all__ = ["BACKEND", "ground_height_many", "support_offset", "rest_pose"]
