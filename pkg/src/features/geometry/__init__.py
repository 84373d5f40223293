"""
Bistatic multipath geometry package.

Forward measurement functions and their inversions for a planar
transmitter / scatterer / receiver scene.
"""

from .geometry import (
    DegenerateGeometryError,
    DirectMeasurement,
    Pose,
    Position,
    ScatterMeasurement,
    ambiguous_directions,
    aoa,
    aoas,
    position_from_direct,
    ray_ellipse_range,
    ray_ellipse_ranges,
    relative_distance,
    relative_distances,
    rotate,
)

__all__ = [
    "DegenerateGeometryError",
    "DirectMeasurement",
    "Pose",
    "Position",
    "ScatterMeasurement",
    "ambiguous_directions",
    "aoa",
    "aoas",
    "position_from_direct",
    "ray_ellipse_range",
    "ray_ellipse_ranges",
    "relative_distance",
    "relative_distances",
    "rotate",
]
