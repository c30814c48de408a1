"""Quasi-static sagittal climbing simulator for a many-legged robot with a tactile antenna."""
from .bounds import CapacityInput, bound_friction, bound_geometry, max_climb_height
from .control import (HeadControllerParams, PitchDownParams, arbitrate, duty_factors, head_command,
                      pitch_down_command, select_floating_joint)
from .estimation import ObstacleEstimate, estimate, estimate_from_arrays
from .gait import GaitParams, body_angle, leg_angle_left, leg_angle_right, stance_flag, vertical_angle
from .harness import Scenario, emit_figure_data, load_scenario, preset, read_trace, run_batch, write_trace
from .kernels import BACKEND
from .morphology import (RobotConfig, TerrainProfile, ground_height, make_box_course,
                         make_cylinder_stack_course, make_multi_box_course)
from .sensing import AntennaConfig, SensorHistory, foot_contact, probe, push_sample, tip_z_local
from .sim import TrialRecord, advance, pivot_check, run_trial, settle_chain

__version__ = "0.1.0"

__all__ = [
    "AntennaConfig", "BACKEND", "CapacityInput", "GaitParams", "HeadControllerParams",
    "ObstacleEstimate", "PitchDownParams", "RobotConfig", "Scenario", "SensorHistory",
    "TerrainProfile", "TrialRecord", "advance", "arbitrate", "body_angle", "bound_friction",
    "bound_geometry", "duty_factors", "emit_figure_data", "estimate", "estimate_from_arrays",
    "foot_contact", "ground_height", "head_command", "leg_angle_left", "leg_angle_right",
    "load_scenario", "make_box_course", "make_cylinder_stack_course", "make_multi_box_course",
    "max_climb_height", "pitch_down_command", "pivot_check", "preset", "probe", "push_sample",
    "read_trace", "run_batch", "run_trial", "select_floating_joint", "settle_chain",
    "stance_flag", "tip_z_local", "vertical_angle", "write_trace",
]
