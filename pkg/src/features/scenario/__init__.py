"""
Scenario package.

Ground-truth scene generation for a moving receiver, a transmitter and a
set of scatterers, plus synthesis of noisy measurement frames.
"""

from .scenario import (
    GroundTruthFrame,
    MeasurementFrame,
    generate_ground_truth,
    paper_scenario,
    simulate,
    straight_line_scenario,
    synthesize_frame,
    waypoint_path,
)

__all__ = [
    "GroundTruthFrame",
    "MeasurementFrame",
    "generate_ground_truth",
    "paper_scenario",
    "simulate",
    "straight_line_scenario",
    "synthesize_frame",
    "waypoint_path",
]
