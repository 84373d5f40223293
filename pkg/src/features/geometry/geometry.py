"""Bistatic multipath geometry in the plane.

Forward measurement functions (relative distance, angle of arrival) and the
closed-form inversions used to place particles. Every public function comes
in a scalar form taking the frozen domain types and an array form taking
``(..., 2)`` numpy arrays for particle kernels.
"""

from dataclasses import dataclass
from typing import Final

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

ORIENTATION_TOL: Final[float] = 1e-12
DEGENERACY_TOL: Final[float] = 1e-12


class DegenerateGeometryError(ValueError):
    """Raised when a geometric quantity is undefined for the given points."""


# =============================================================================
# DOMAIN TYPES
# =============================================================================


@dataclass(frozen=True)
class Position:
    """A point in the 2-D world frame, in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError(f"Position components must be finite, got ({self.x}, {self.y})")

    def as_array(self) -> FloatArray:
        return np.array([self.x, self.y], dtype=np.float64)

    @classmethod
    def from_array(cls, xy: FloatArray | tuple[float, float]) -> "Position":
        return cls(float(xy[0]), float(xy[1]))


@dataclass(frozen=True)
class Pose:
    """Receiver position and antenna-array orientation.

    Attributes:
        position: Receiver position
        orientation: Unit vector the array points along
    """

    position: Position
    orientation: tuple[float, float]

    def __post_init__(self) -> None:
        norm = float(np.hypot(*self.orientation))
        if abs(norm - 1.0) > ORIENTATION_TOL:
            raise ValueError(f"Orientation must be a unit vector, got norm {norm}")

    @classmethod
    def facing(cls, position: Position, direction: tuple[float, float]) -> "Pose":
        """Build a pose whose orientation is ``direction`` normalized."""
        vec = np.asarray(direction, dtype=np.float64)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValueError("Orientation direction must be non-zero")
        unit = vec / norm
        return cls(position, (float(unit[0]), float(unit[1])))

    def orientation_array(self) -> FloatArray:
        return np.asarray(self.orientation, dtype=np.float64)


@dataclass(frozen=True)
class ScatterMeasurement:
    """Relative distance [m] and AOA [rad] of one scattered path (or clutter)."""

    rel_distance: float
    aoa: float


@dataclass(frozen=True)
class DirectMeasurement:
    """AOA [rad] of the direct transmitter-to-receiver path."""

    aoa: float


# =============================================================================
# ARRAY KERNELS
# =============================================================================


def relative_distances(tx: FloatArray, scat: FloatArray, rx: FloatArray) -> FloatArray:
    """Vectorized bistatic relative distance; inputs broadcast over ``(..., 2)``."""
    return (
        np.linalg.norm(scat - tx, axis=-1)
        + np.linalg.norm(rx - scat, axis=-1)
        - np.linalg.norm(tx - rx, axis=-1)
    )


def aoas(target: FloatArray, rx: Pose) -> FloatArray:
    """Vectorized AOA; coincident points yield NaN."""
    delta = np.asarray(target, dtype=np.float64) - rx.position.as_array()
    norm = np.linalg.norm(delta, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = (delta @ rx.orientation_array()) / norm
    angle = np.arccos(np.clip(cos, -1.0, 1.0))
    return np.where(norm > 0.0, angle, np.nan)


def rotate(vec: FloatArray, theta: FloatArray | float) -> FloatArray:
    """Rotate a 2-D vector counter-clockwise by ``theta`` (broadcasts over theta)."""
    theta = np.asarray(theta, dtype=np.float64)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([c * vec[0] - s * vec[1], s * vec[0] + c * vec[1]], axis=-1)


def ray_ellipse_ranges(
    tx: FloatArray, rx: Pose, d: FloatArray, u: FloatArray
) -> tuple[FloatArray, NDArray[np.bool_]]:
    """Vectorized :func:`ray_ellipse_range`.

    Returns:
        Tuple of (ranges, valid mask). Entries with ``d < 0`` or a
        degenerate denominator are marked invalid and their range is NaN.
    """
    w = rx.position.as_array() - np.asarray(tx, dtype=np.float64)
    w_norm = np.linalg.norm(w, axis=-1)
    s = d + w_norm
    denom = 2.0 * (s + np.sum(u * w, axis=-1))
    valid = (d >= 0.0) & (np.abs(denom) >= DEGENERACY_TOL)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (s**2 - w_norm**2) / denom
    return np.where(valid, r, np.nan), valid


# =============================================================================
# SCALAR OPERATIONS
# =============================================================================


def relative_distance(tx: Position, scat: Position, rx: Position) -> float:
    """Excess path length tx -> scat -> rx over the direct path tx -> rx."""
    value = relative_distances(tx.as_array(), scat.as_array(), rx.as_array())
    # Triangle inequality; clamp round-off below zero.
    return max(float(value), 0.0)


def aoa(target: Position, rx: Pose) -> float:
    """Angle in [0, pi] between the receiver orientation and the direction to ``target``.

    Raises:
        DegenerateGeometryError: If ``target`` coincides with the receiver.
    """
    angle = float(aoas(target.as_array(), rx))
    if np.isnan(angle):
        raise DegenerateGeometryError("undefined AOA: target coincides with receiver")
    return angle


def ambiguous_directions(
    rx: Pose, theta: float
) -> tuple[tuple[float, float], tuple[float, float]]:
    """The two unit vectors whose AOA w.r.t. ``rx`` equals ``theta``.

    The first is the orientation rotated by ``+theta``, the second by ``-theta``.
    """
    plus = rotate(rx.orientation_array(), theta)
    minus = rotate(rx.orientation_array(), -theta)
    return (float(plus[0]), float(plus[1])), (float(minus[0]), float(minus[1]))


def ray_ellipse_range(
    tx: Position, rx: Pose, d: float, u: tuple[float, float]
) -> float:
    """Range along ray ``u`` from the receiver to the ellipse of relative distance ``d``.

    Solves ``||rx + r*u - tx|| + r = d + ||rx - tx||`` for ``r >= 0``.

    Raises:
        ValueError: If ``d`` is negative.
        DegenerateGeometryError: If the ray passes through ``tx`` with ``d`` ~ 0.
    """
    if d < 0.0:
        raise ValueError(f"relative distance must be non-negative, got {d}")
    r, valid = ray_ellipse_ranges(tx.as_array(), rx, np.float64(d), np.asarray(u))
    if not bool(valid):
        raise DegenerateGeometryError("degenerate ellipse-ray: denominator below tolerance")
    return float(r)


def position_from_direct(rx: Pose, theta0: float, range_m: float, side: int) -> Position:
    """Place a point at ``range_m`` from the receiver on the ``side`` (+1/-1) AOA branch."""
    if range_m < 0.0:
        raise ValueError(f"range must be non-negative, got {range_m}")
    if side not in (1, -1):
        raise ValueError(f"side must be +1 or -1, got {side}")
    plus, minus = ambiguous_directions(rx, theta0)
    u = np.asarray(plus if side == 1 else minus)
    return Position.from_array(rx.position.as_array() + range_m * u)
