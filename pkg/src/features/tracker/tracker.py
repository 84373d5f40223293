"""Particle-based belief propagation tracker.

One call to :func:`step` processes one measurement frame. While the tracker
is bootstrapping it only refines the transmitter from the direct-path AOA;
afterwards each step runs the full message schedule:

1. predict the transmitter and every legacy scatterer
2. weight the transmitter particles by the direct-path likelihood
3. build the association inputs (``beta`` per legacy scatterer, ``xi`` per
   measurement, the latter from freshly born particles)
4. run the association loop
5. update the transmitter, legacy and new beliefs from the returned messages
6. advance the undetected-scatterer intensity, prune and promote

Beliefs of a transmitter particle ``s`` and the ``s``-th particle of any
scatterer are combined pairwise ("stacked") so every product of messages
stays linear in the particle count.
"""

from dataclasses import dataclass, replace
from typing import Final

import numpy as np
import structlog
from numpy.typing import NDArray

from config.settings import TrackerConfig, TrackerMode
from features.association import AssocInput, run_association
from features.factors import (
    detection_factors,
    direct_log_likelihoods,
    h_factor_weights,
    random_walk,
)
from features.geometry import (
    Pose,
    ScatterMeasurement,
    ray_ellipse_ranges,
    rotate,
)
from features.scenario import MeasurementFrame

from .particles import WeightedParticleSet, resample
from .state import (
    Estimate,
    PotentialScatterer,
    Stage,
    TrackEstimate,
    TrackerError,
    TrackerState,
)

FloatArray = NDArray[np.float64]

log = structlog.get_logger(__name__)

MAX_BIRTH_RETRIES: Final[int] = 16
MIN_BIRTH_DISTANCE: Final[float] = 1e-3


@dataclass(frozen=True)
class LegacyContext:
    """Predicted legacy scatterer together with its stacked factor table.

    Attributes:
        source: The scatterer before prediction
        particles: Predicted particles, total weight ``1 - alpha``
        alpha: Predicted non-existence probability
        factors: ``(S, M+1)`` table of ``g(tx_s, x_s, 1, a)``
        beta: ``(M+1,)`` message into the association loop
    """

    source: PotentialScatterer
    particles: WeightedParticleSet
    alpha: float
    factors: FloatArray
    beta: FloatArray


@dataclass(frozen=True)
class BirthContext:
    """Particles born from one measurement.

    Attributes:
        positions: ``(S, 2)`` birth positions stacked with the transmitter particles
        h_weights: ``(S,)`` new-scatterer factor per stacked pair
        xi0: Unclaimed entry of the message into the association loop
    """

    positions: FloatArray
    h_weights: FloatArray
    xi0: float


def initial_state(cfg: TrackerConfig, mode: TrackerMode) -> TrackerState:
    """Empty state awaiting its first direct measurement."""
    return TrackerState(mode=mode, lambda_undetected=cfg.lambda_undetected_init)


def _alternating_sides(n: int) -> FloatArray:
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def _normalized(log_w: FloatArray) -> FloatArray | None:
    """Normalize log-weights; None when every weight is zero."""
    top = np.max(log_w)
    if not np.isfinite(top):
        return None
    w = np.exp(log_w - top)
    return w / w.sum()


# =============================================================================
# BOOTSTRAP
# =============================================================================


def init_tx_particles(
    frame: MeasurementFrame, rx: Pose, cfg: TrackerConfig, rng: np.random.Generator
) -> WeightedParticleSet:
    """Spread transmitter particles along both mirror rays of the direct-path AOA.

    Even-indexed particles take the counter-clockwise branch, odd-indexed
    the clockwise one. Ranges are uniform on ``[0, tx_range_max]``.

    Raises:
        TrackerError: If the frame has no direct measurement.
    """
    if frame.direct is None:
        raise TrackerError(f"step {frame.step}: transmitter initialization needs a direct measurement")
    n = cfg.num_particles
    theta = frame.direct.aoa + rng.normal(0.0, cfg.model.sigma_theta_lik, size=n)
    ranges = rng.uniform(0.0, cfg.tx_range_max, size=n)
    dirs = rotate(rx.orientation_array(), _alternating_sides(n) * theta)
    return WeightedParticleSet.uniform(rx.position.as_array() + ranges[:, None] * dirs)


def bootstrap_tx_step(
    state: TrackerState,
    frame: MeasurementFrame,
    rx: Pose,
    cfg: TrackerConfig,
    rng: np.random.Generator,
) -> TrackerState:
    """One importance-sampling step on the transmitter alone.

    The first frame initializes the particles. Later frames propagate them,
    weight by the direct-path likelihood and resample; if every weight
    vanishes the cloud is re-initialized from the current frame. Once the
    cloud's spread drops below ``bootstrap_std_threshold`` the transition
    step is recorded and, except in tx-only mode, tracking begins.
    """
    if state.stage is not Stage.BOOTSTRAP:
        raise TrackerError("bootstrap step called outside the bootstrap stage")
    if frame.direct is None:
        raise TrackerError(f"step {frame.step}: bootstrap needs a direct measurement")

    if state.tx_particles is None:
        particles = init_tx_particles(frame, rx, cfg, rng)
    else:
        moved = random_walk(state.tx_particles.positions, cfg.model.sigma_tx_walk, rng)
        w = np.exp(direct_log_likelihoods(frame.direct.aoa, moved, rx, cfg.model))
        if w.sum() > 0.0:
            particles = resample(WeightedParticleSet(moved, w / w.sum()), 1.0, rng)
        else:
            log.warning("bootstrap_reinitialized", step=frame.step)
            particles = init_tx_particles(frame, rx, cfg, rng)

    state = state.with_tx(particles).at_step(frame.step)
    spread = particles.spread()
    if state.transition_step is not None or spread >= cfg.bootstrap_std_threshold:
        return state

    log.info("stage_transition", step=frame.step, tx_spread=spread, mode=state.mode.value)
    if state.mode is TrackerMode.TX_ONLY:
        return state.entering(Stage.BOOTSTRAP, frame.step)
    if state.mode is TrackerMode.SIMPLIFIED1:
        centre = particles.mean().as_array()
        state = state.with_tx(WeightedParticleSet.uniform(np.tile(centre, (particles.size, 1))))
    return state.entering(Stage.TRACKING, frame.step)


# =============================================================================
# PREDICTION AND MESSAGES INTO THE ASSOCIATION LOOP
# =============================================================================


def predict_tx(
    tx: WeightedParticleSet, cfg: TrackerConfig, rng: np.random.Generator
) -> WeightedParticleSet:
    """Propagate transmitter particles through the random walk; equal weights."""
    return WeightedParticleSet.uniform(random_walk(tx.positions, cfg.model.sigma_tx_walk, rng))


def predict_legacy(
    ps: PotentialScatterer, cfg: TrackerConfig, rng: np.random.Generator
) -> tuple[WeightedParticleSet, float]:
    """Propagate a scatterer and account for survival.

    Returns:
        Predicted particles with total weight ``p_s (1 - q)`` and the
        predicted non-existence probability ``1 - p_s (1 - q)``.
    """
    survive = cfg.model.p_survival * (1.0 - ps.nonexist_prob)
    moved = random_walk(ps.particles.positions, cfg.model.sigma_ps_walk, rng)
    return WeightedParticleSet.uniform(moved, survive), 1.0 - survive


def evaluate_direct(
    tx_pred: WeightedParticleSet,
    z0: float,
    rx: Pose,
    cfg: TrackerConfig,
    rng: np.random.Generator,
) -> WeightedParticleSet:
    """Weight predicted transmitter particles by the direct-path AOA and resample."""
    log_w = np.log(tx_pred.weights) + direct_log_likelihoods(z0, tx_pred.positions, rx, cfg.model)
    w = _normalized(log_w)
    if w is None:
        log.warning("direct_update_degenerate", aoa=z0)
        return tx_pred
    return resample(WeightedParticleSet(tx_pred.positions, w), 1.0, rng)


def compute_beta(
    tx_eval: WeightedParticleSet,
    ps_pred: WeightedParticleSet,
    alpha: float,
    z: FloatArray,
    rx: Pose,
    cfg: TrackerConfig,
) -> tuple[FloatArray, FloatArray]:
    """Message from a legacy scatterer's factor into its association variable.

    Args:
        tx_eval: Resampled transmitter particles
        ps_pred: Predicted scatterer particles (stacked with ``tx_eval``)
        alpha: Predicted non-existence probability
        z: ``(M, 2)`` measurements
        rx: Receiver pose
        cfg: Tracker settings

    Returns:
        The ``(M+1,)`` beta row and the ``(S, M+1)`` factor table it was built from.
    """
    factors = detection_factors(z, tx_eval.positions, ps_pred.positions, rx, cfg.model)
    beta = ps_pred.weights @ factors
    beta[0] += alpha
    return beta, factors


def _birth_positions(
    tx_xy: FloatArray,
    z_m: ScatterMeasurement,
    rx: Pose,
    cfg: TrackerConfig,
    rng: np.random.Generator,
) -> FloatArray:
    n = len(tx_xy)
    p = cfg.model
    sides = _alternating_sides(n)
    orientation = rx.orientation_array()
    d = np.empty(n)
    theta = np.empty(n)
    pending = np.ones(n, dtype=bool)
    r = np.full(n, np.nan)
    u = np.empty((n, 2))

    for _ in range(MAX_BIRTH_RETRIES):
        k = int(pending.sum())
        if k == 0:
            break
        d[pending] = z_m.rel_distance + rng.normal(0.0, p.sigma_d_lik, size=k)
        theta[pending] = z_m.aoa + rng.normal(0.0, p.sigma_theta_lik, size=k)
        u = rotate(orientation, sides * theta)
        r, valid = ray_ellipse_ranges(tx_xy, rx, d, u)
        pending = ~(valid & (theta >= 0.0) & (theta <= np.pi))

    positions = rx.position.as_array() + r[:, None] * u
    if pending.any():
        donors = np.flatnonzero(~pending)
        if donors.size:
            positions[pending] = positions[rng.choice(donors, size=int(pending.sum()))]
        else:
            d[pending] = max(z_m.rel_distance, MIN_BIRTH_DISTANCE)
            theta[pending] = min(max(z_m.aoa, 0.0), np.pi)
            u = rotate(orientation, sides * theta)
            r, _ = ray_ellipse_ranges(tx_xy, rx, d, u)
            positions[pending] = rx.position.as_array() + r[pending, None] * u[pending]
        log.debug("birth_fallback", replaced=int(pending.sum()), donors=int(donors.size))
    return positions


def birth_and_xi(
    tx_eval: WeightedParticleSet,
    z_m: ScatterMeasurement,
    rx: Pose,
    mu_new: float,
    cfg: TrackerConfig,
    rng: np.random.Generator,
) -> BirthContext:
    """Birth particles for measurement ``z_m`` and its unclaimed ``xi`` entry.

    Each transmitter particle gets one birth particle, placed by inverting a
    perturbed copy of the measurement; sides alternate so each mirror branch
    receives half of the particles.
    """
    positions = _birth_positions(tx_eval.positions, z_m, rx, cfg, rng)
    h = h_factor_weights(
        np.array([z_m.rel_distance, z_m.aoa]), tx_eval.positions, positions, rx, mu_new, cfg.model
    )
    return BirthContext(positions=positions, h_weights=h, xi0=1.0 + float(h.mean()))


# =============================================================================
# BELIEF UPDATES
# =============================================================================


def update_tx_belief(
    tx_eval: WeightedParticleSet,
    legacy: list[LegacyContext],
    eta: FloatArray,
    rng: np.random.Generator,
) -> WeightedParticleSet:
    """Fold the messages of every legacy scatterer back into the transmitter.

    The per-scatterer factors multiply, so they are accumulated as logs.
    """
    log_w = np.log(tx_eval.weights)
    with np.errstate(divide="ignore"):
        for ctx, eta_k in zip(legacy, eta, strict=True):
            term = (1.0 - ctx.alpha) * (ctx.factors @ eta_k) + eta_k[0] * ctx.alpha
            log_w = log_w + np.log(term)
    w = _normalized(log_w)
    if w is None:
        log.warning("tx_update_degenerate", num_scatterers=len(legacy))
        return tx_eval
    return resample(WeightedParticleSet(tx_eval.positions, w), 1.0, rng)


def update_legacy_belief(
    ctx: LegacyContext, eta_k: FloatArray, rng: np.random.Generator
) -> PotentialScatterer:
    """Posterior of a legacy scatterer; particle mass plus non-existence equals one."""
    w = ctx.particles.weights * (ctx.factors @ eta_k)
    missed = eta_k[0] * ctx.alpha
    total = w.sum() + missed
    if total <= 0.0:
        nonexist = 1.0
        w = np.zeros_like(w)
    else:
        nonexist = min(max(missed / total, 0.0), 1.0)
        w = w / total
    particles = resample(WeightedParticleSet(ctx.particles.positions, w), 1.0 - nonexist, rng)
    return replace(ctx.source, particles=particles, nonexist_prob=nonexist)


def update_new_belief(
    birth: BirthContext,
    varsigma_m: FloatArray,
    track_id: int,
    birth_step: int,
    rng: np.random.Generator,
) -> PotentialScatterer:
    """Posterior of the scatterer hypothesized from one measurement."""
    w = varsigma_m[0] * birth.h_weights / len(birth.h_weights)
    absent = float(varsigma_m.sum())
    total = w.sum() + absent
    nonexist = min(max(absent / total, 0.0), 1.0)
    particles = resample(WeightedParticleSet(birth.positions, w / total), 1.0 - nonexist, rng)
    return PotentialScatterer(
        particles=particles, nonexist_prob=nonexist, id=track_id, birth_step=birth_step
    )


def phd_update(lambda_undetected: float, cfg: TrackerConfig) -> tuple[float, float]:
    """Undetected-scatterer intensity bookkeeping.

    Returns:
        Mean number of newly detected scatterers this step and the
        undetected mean carried to the next step.
    """
    predicted = lambda_undetected + cfg.lambda_birth
    p_d = cfg.model.p_detect
    return p_d * predicted, (1.0 - p_d) * predicted


def prune_and_promote(
    state: TrackerState,
    legacy: list[PotentialScatterer],
    new: list[PotentialScatterer],
    cfg: TrackerConfig,
) -> TrackerState:
    """Append new scatterers to the legacy list and drop the unlikely ones."""
    candidates = [*legacy, *new]
    survivors = tuple(
        ps for ps in candidates if ps.existence_prob >= cfg.p_prune_threshold
    )
    confirmed = [ps.id for ps in new if ps.existence_prob > cfg.p_exist_threshold]
    if confirmed:
        log.info("scatterers_born", step=state.step, ids=confirmed)
    if len(survivors) < len(candidates):
        log.info("scatterers_pruned", step=state.step, pruned=len(candidates) - len(survivors))
    return state.with_scatterers(survivors, next_id=state.next_id + len(new))


def estimate(state: TrackerState, cfg: TrackerConfig) -> Estimate:
    """Transmitter mean and every scatterer above the existence threshold."""
    tx = state.tx_particles.mean() if state.tx_particles is not None else None
    reported = tuple(
        TrackEstimate(id=ps.id, position=ps.particles.mean(), existence_prob=ps.existence_prob)
        for ps in state.scatterers
        if ps.existence_prob > cfg.p_exist_threshold
    )
    return Estimate(step=state.step, tx=tx, scatterers=reported)


# =============================================================================
# STEP
# =============================================================================


def _tracking_step(
    state: TrackerState,
    frame: MeasurementFrame,
    rx: Pose,
    cfg: TrackerConfig,
    rng: np.random.Generator,
) -> TrackerState:
    if frame.direct is None or state.tx_particles is None:
        raise TrackerError(f"step {frame.step}: tracking needs a direct measurement and a transmitter belief")
    mu_new, lambda_next = phd_update(state.lambda_undetected, cfg)
    z = frame.scatter_array()

    if state.mode is TrackerMode.SIMPLIFIED1:
        tx_eval = state.tx_particles
    else:
        tx_pred = predict_tx(state.tx_particles, cfg, rng)
        tx_eval = evaluate_direct(tx_pred, frame.direct.aoa, rx, cfg, rng)

    legacy: list[LegacyContext] = []
    for ps in state.scatterers:
        pred, alpha = predict_legacy(ps, cfg, rng)
        beta, factors = compute_beta(tx_eval, pred, alpha, z, rx, cfg)
        legacy.append(LegacyContext(ps, pred, alpha, factors, beta))

    births = [birth_and_xi(tx_eval, z_m, rx, mu_new, cfg, rng) for z_m in frame.scatter]

    n_meas = len(births)
    assoc = run_association(
        AssocInput(
            beta=np.array([c.beta for c in legacy]).reshape(len(legacy), n_meas + 1),
            xi0=np.array([b.xi0 for b in births]),
        ),
        max_iter=cfg.assoc_max_iter,
        tol=cfg.assoc_tol,
    )

    if state.mode is TrackerMode.FULL:
        tx_new = update_tx_belief(tx_eval, legacy, assoc.eta, rng)
    elif state.mode is TrackerMode.SIMPLIFIED2:
        tx_new = tx_eval
    else:
        tx_new = state.tx_particles

    updated = [update_legacy_belief(c, eta_k, rng) for c, eta_k in zip(legacy, assoc.eta, strict=True)]
    new = [
        update_new_belief(b, assoc.varsigma[m], state.next_id + m, frame.step, rng)
        for m, b in enumerate(births)
    ]

    state = replace(state, tx_particles=tx_new, lambda_undetected=lambda_next, step=frame.step)
    state = prune_and_promote(state, updated, new, cfg)
    log.debug(
        "tracker_step",
        step=frame.step,
        K=len(legacy),
        M=n_meas,
        mu_new=mu_new,
        iterations=assoc.iterations_used,
        survivors=state.num_scatterers,
    )
    return state


def step(
    state: TrackerState,
    frame: MeasurementFrame,
    rx: Pose,
    cfg: TrackerConfig,
    rng: np.random.Generator,
) -> TrackerState:
    """Process one frame.

    Frames without a direct measurement are skipped; only the step counter
    advances.
    """
    if frame.direct is None:
        log.debug("frame_skipped", step=frame.step)
        return state.at_step(frame.step)
    if state.stage is Stage.BOOTSTRAP:
        return bootstrap_tx_step(state, frame, rx, cfg, rng)
    return _tracking_step(state, frame, rx, cfg, rng)


class Tracker:
    """Stateful wrapper driving :func:`step` over a frame sequence."""

    def __init__(self, cfg: TrackerConfig, mode: TrackerMode, rng: np.random.Generator) -> None:
        self._cfg = cfg
        self._rng = rng
        self._state = initial_state(cfg, mode)

    @property
    def state(self) -> TrackerState:
        return self._state

    def process(self, frame: MeasurementFrame, rx: Pose) -> Estimate:
        """Advance by one frame and return the estimate."""
        self._state = step(self._state, frame, rx, self._cfg, self._rng)
        return estimate(self._state, self._cfg)
