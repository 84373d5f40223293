"""
Tracker package.

Particle-based belief propagation over the transmitter, the potential
scatterers and the measurement associations.
"""

from .particles import WeightedParticleSet, resample, systematic_indices
from .state import (
    Estimate,
    PotentialScatterer,
    Stage,
    TrackEstimate,
    TrackerError,
    TrackerState,
)
from .tracker import (
    BirthContext,
    LegacyContext,
    Tracker,
    birth_and_xi,
    bootstrap_tx_step,
    compute_beta,
    estimate,
    evaluate_direct,
    init_tx_particles,
    initial_state,
    phd_update,
    predict_legacy,
    predict_tx,
    prune_and_promote,
    step,
    update_legacy_belief,
    update_new_belief,
    update_tx_belief,
)

__all__ = [
    "BirthContext",
    "Estimate",
    "LegacyContext",
    "PotentialScatterer",
    "Stage",
    "TrackEstimate",
    "Tracker",
    "TrackerError",
    "TrackerState",
    "WeightedParticleSet",
    "birth_and_xi",
    "bootstrap_tx_step",
    "compute_beta",
    "estimate",
    "evaluate_direct",
    "init_tx_particles",
    "initial_state",
    "phd_update",
    "predict_legacy",
    "predict_tx",
    "prune_and_promote",
    "resample",
    "step",
    "systematic_indices",
    "update_legacy_belief",
    "update_new_belief",
    "update_tx_belief",
]
