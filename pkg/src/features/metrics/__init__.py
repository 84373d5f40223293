"""
Metrics package.

OSPA, transmitter and target localization errors, target-track
identification and Monte Carlo aggregation.
"""

from .metrics import (
    OspaParams,
    RunMetrics,
    aggregate,
    evaluate_run,
    identify_target,
    ospa,
    path_length,
    settled_path_length,
    tracks_frame,
)

__all__ = [
    "OspaParams",
    "RunMetrics",
    "aggregate",
    "evaluate_run",
    "identify_target",
    "ospa",
    "path_length",
    "settled_path_length",
    "tracks_frame",
]
