"""Immutable tracker state.

Every step produces a new :class:`TrackerState`; nothing is mutated in place.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

from config.settings import TrackerMode
from features.geometry import Position

from .particles import WeightedParticleSet


class TrackerError(RuntimeError):
    """Raised when the tracker is driven with inputs it cannot process."""


class Stage(str, Enum):
    """Tracker stage: transmitter-only bootstrap, then full tracking."""

    BOOTSTRAP = "bootstrap"
    TRACKING = "tracking"


@dataclass(frozen=True)
class PotentialScatterer:
    """A hypothesized scatterer.

    Attributes:
        particles: Position particles; their mass is the existence probability
        nonexist_prob: Probability that the scatterer does not exist
        id: Stable track identifier, never reused
        birth_step: Step at which the scatterer was hypothesized
    """

    particles: WeightedParticleSet
    nonexist_prob: float
    id: int
    birth_step: int

    @property
    def existence_prob(self) -> float:
        return 1.0 - self.nonexist_prob


@dataclass(frozen=True)
class TrackEstimate:
    """Reported scatterer estimate."""

    id: int
    position: Position
    existence_prob: float


@dataclass(frozen=True)
class Estimate:
    """Per-step output of the tracker.

    Attributes:
        step: Time index
        tx: Transmitter estimate, None before the first direct measurement
        scatterers: Scatterers whose existence probability passes the threshold
    """

    step: int
    tx: Position | None
    scatterers: tuple[TrackEstimate, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class TrackerState:
    """Snapshot of the tracker after a processed step.

    Attributes:
        mode: Tracker variant
        tx_particles: Transmitter belief, None until the first direct measurement
        scatterers: Legacy potential scatterers
        lambda_undetected: Mean number of undetected scatterers
        step: Index of the last frame seen
        stage: Bootstrap or tracking
        transition_step: Step where the transmitter spread first fell below the
            bootstrap threshold, None until then
        next_id: Identifier handed to the next new scatterer
    """

    mode: TrackerMode
    tx_particles: WeightedParticleSet | None = None
    scatterers: tuple[PotentialScatterer, ...] = ()
    lambda_undetected: float = 0.0
    step: int = 0
    stage: Stage = Stage.BOOTSTRAP
    transition_step: int | None = None
    next_id: int = 0

    @property
    def num_scatterers(self) -> int:
        return len(self.scatterers)

    def at_step(self, step: int) -> "TrackerState":
        """Same state, step counter advanced."""
        return replace(self, step=step)

    def with_tx(self, tx_particles: WeightedParticleSet) -> "TrackerState":
        return replace(self, tx_particles=tx_particles)

    def with_scatterers(
        self, scatterers: tuple[PotentialScatterer, ...], next_id: int
    ) -> "TrackerState":
        if next_id < self.next_id:
            raise TrackerError("track identifiers must not be reused")
        return replace(self, scatterers=scatterers, next_id=next_id)

    def entering(self, stage: Stage, transition_step: int) -> "TrackerState":
        """Record the bootstrap transition and switch to ``stage``."""
        return replace(self, stage=stage, transition_step=transition_step)
