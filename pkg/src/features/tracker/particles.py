"""Weighted particle clouds and systematic resampling."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from features.geometry import Position

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class WeightedParticleSet:
    """Particles approximating a (possibly defective) density.

    Attributes:
        positions: ``(S, 2)`` particle positions
        weights: ``(S,)`` non-negative weights; their sum is the set's mass
    """

    positions: FloatArray
    weights: FloatArray

    def __post_init__(self) -> None:
        positions = np.asarray(self.positions, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if positions.ndim != 2 or positions.shape[1] != 2:
            raise ValueError(f"positions must have shape (S, 2), got {positions.shape}")
        if weights.shape != (positions.shape[0],):
            raise ValueError(
                f"weights must have shape ({positions.shape[0]},), got {weights.shape}"
            )
        if np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and non-negative")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, positions: FloatArray, mass: float = 1.0) -> "WeightedParticleSet":
        """Equal weights summing to ``mass``."""
        n = len(positions)
        return cls(positions, np.full(n, mass / n))

    @property
    def size(self) -> int:
        return int(self.positions.shape[0])

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def mean(self) -> Position:
        """Weighted mean position; the arithmetic mean for equal or zero weights."""
        mass = self.mass
        if mass > 0.0:
            xy = self.weights @ self.positions / mass
        else:
            xy = self.positions.mean(axis=0)
        return Position.from_array(xy)

    def spread(self) -> float:
        """Square root of the trace of the weighted, mean-centred covariance."""
        mass = self.mass
        w = self.weights / mass if mass > 0.0 else np.full(self.size, 1.0 / self.size)
        centred = self.positions - w @ self.positions
        return float(np.sqrt(np.sum(w * np.sum(centred**2, axis=1))))


def systematic_indices(weights: FloatArray, rng: np.random.Generator) -> NDArray[np.intp]:
    """Indices drawn by systematic resampling, one per input particle."""
    n = len(weights)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    points = (rng.random() + np.arange(n)) / n
    return np.minimum(np.searchsorted(cdf, points, side="right"), n - 1)


def resample(
    ps: WeightedParticleSet, target_mass: float, rng: np.random.Generator
) -> WeightedParticleSet:
    """Systematic resampling to equal weights ``target_mass / S``.

    A set with zero mass keeps its positions; only the weights are reset.
    """
    if ps.mass <= 0.0:
        return WeightedParticleSet.uniform(ps.positions.copy(), target_mass)
    idx = systematic_indices(ps.weights, rng)
    return WeightedParticleSet.uniform(ps.positions[idx], target_mass)
