"""Tests for the belief propagation tracker."""

import math

import numpy as np
import pytest
from scipy import stats

from config.settings import ModelParams, TrackerConfig, TrackerMode
from features.factors import g_factor, h_factor_weights
from features.geometry import (
    DirectMeasurement,
    Pose,
    Position,
    ScatterMeasurement,
    aoa,
    aoas,
    relative_distance,
    relative_distances,
)
from features.scenario import (
    MeasurementFrame,
    paper_scenario,
    simulate,
    straight_line_scenario,
    synthesize_frame,
)
from features.tracker import (
    BirthContext,
    LegacyContext,
    PotentialScatterer,
    Stage,
    Tracker,
    TrackerError,
    TrackerState,
    WeightedParticleSet,
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

TX = Position(0.0, 30.0)
SCAT = Position(40.0, 10.0)
RX = Pose(Position(0.0, -20.0), (1.0, 0.0))


def small_config(**overrides) -> TrackerConfig:
    return TrackerConfig(num_particles=200, **overrides)


def direct_frame(step: int = 1, scatter: tuple[ScatterMeasurement, ...] = ()) -> MeasurementFrame:
    return MeasurementFrame(step=step, direct=DirectMeasurement(aoa(TX, RX)), scatter=scatter)


def point_cloud(xy: Position, n: int, mass: float = 1.0) -> WeightedParticleSet:
    return WeightedParticleSet.uniform(np.tile(xy.as_array(), (n, 1)), mass)


def scatterer(q: float, ps_id: int = 0, where: Position = SCAT, n: int = 200) -> PotentialScatterer:
    return PotentialScatterer(point_cloud(where, n, 1.0 - q), q, ps_id, 0)


def tracking_state(cfg: TrackerConfig, *scatterers: PotentialScatterer) -> TrackerState:
    return TrackerState(
        mode=TrackerMode.FULL,
        tx_particles=point_cloud(TX, cfg.num_particles),
        scatterers=scatterers,
        lambda_undetected=0.25,
        step=40,
        stage=Stage.TRACKING,
        transition_step=33,
        next_id=len(scatterers),
    )


def side_of(points: np.ndarray, rx: Pose) -> np.ndarray:
    rel = points - rx.position.as_array()
    q = rx.orientation_array()
    return np.sign(q[0] * rel[:, 1] - q[1] * rel[:, 0])


class TestPhdUpdate:
    """Undetected intensity bookkeeping."""

    def test_reference_values(self):
        """lambda_u=5, lambda_b=1e-4, p_d=0.95."""
        mu, lam = phd_update(5.0, TrackerConfig())
        assert mu == pytest.approx(4.75010, abs=1e-5)
        assert lam == pytest.approx(0.25001, abs=1e-5)

    def test_no_detection(self):
        """p_d=0 detects nothing and the intensity only grows."""
        cfg = TrackerConfig(model=ModelParams(p_detect=0.0))
        mu, lam = phd_update(2.0, cfg)
        assert mu == 0.0
        assert lam == pytest.approx(2.0 + cfg.lambda_birth)

    def test_empty(self):
        """Nothing undetected and no births."""
        assert phd_update(0.0, TrackerConfig(lambda_birth=0.0)) == (0.0, 0.0)


class TestPrediction:
    """Prediction of transmitter and legacy scatterers."""

    def test_predict_legacy_reference(self):
        """q=0.2, p_s=0.999 gives alpha=0.2008."""
        cfg = small_config()
        pred, alpha = predict_legacy(scatterer(0.2), cfg, np.random.default_rng(0))
        assert alpha == pytest.approx(0.2008, abs=1e-12)
        assert pred.mass == pytest.approx(1.0 - alpha, abs=1e-12)

    def test_predict_legacy_certain(self):
        """q=0 with p_s=1 keeps full existence; q=1 stays absent."""
        cfg = small_config(model=ModelParams(p_survival=1.0))
        _, alpha = predict_legacy(scatterer(0.0), cfg, np.random.default_rng(1))
        assert alpha == 0.0
        pred, alpha = predict_legacy(scatterer(1.0), small_config(), np.random.default_rng(1))
        assert alpha == 1.0
        assert np.all(pred.weights == 0.0)

    def test_predict_tx_without_noise(self):
        """Zero walk noise leaves particles in place with unit mass."""
        cfg = small_config(model=ModelParams(sigma_tx_walk=0.0))
        tx = WeightedParticleSet.uniform(np.random.default_rng(2).normal(size=(200, 2)))
        pred = predict_tx(tx, cfg, np.random.default_rng(3))
        assert np.array_equal(pred.positions, tx.positions)
        assert pred.mass == pytest.approx(1.0)

    @pytest.mark.slow
    def test_predict_tx_displacement_variance(self):
        """Displacements have the walk variance."""
        cfg = TrackerConfig(num_particles=100_000)
        tx = WeightedParticleSet.uniform(np.zeros((100_000, 2)))
        pred = predict_tx(tx, cfg, np.random.default_rng(4))
        assert np.allclose(pred.positions.var(axis=0), cfg.model.sigma_tx_walk**2, rtol=0.05)


class TestInitTxParticles:
    """Two-sided transmitter initialization."""

    def test_half_per_side(self):
        """Each mirror branch gets S/2 particles on its own side."""
        cfg = small_config(model=ModelParams(sigma_theta_lik=1e-9))
        ps = init_tx_particles(direct_frame(), RX, cfg, np.random.default_rng(0))
        sides = side_of(ps.positions, RX)
        assert np.sum(sides[0::2] > 0) == 100
        assert np.sum(sides[1::2] < 0) == 100
        assert np.allclose(aoas(ps.positions, RX), aoa(TX, RX), atol=1e-6)
        assert ps.mass == pytest.approx(1.0)

    def test_ranges_uniform(self):
        """Ranges pass a KS uniformity test on [0, tx_range_max]."""
        cfg = TrackerConfig(num_particles=10_000)
        ps = init_tx_particles(direct_frame(), RX, cfg, np.random.default_rng(1))
        ranges = np.linalg.norm(ps.positions - RX.position.as_array(), axis=1)
        assert stats.kstest(ranges, "uniform", args=(0.0, cfg.tx_range_max)).pvalue > 0.01

    def test_requires_direct(self):
        """A frame without a direct path cannot initialize the transmitter."""
        frame = MeasurementFrame(step=1, direct=None)
        with pytest.raises(TrackerError, match="direct measurement"):
            init_tx_particles(frame, RX, small_config(), np.random.default_rng(2))


class TestBootstrap:
    """Transmitter bootstrap stage."""

    def test_infinite_threshold_transitions_at_once(self):
        """An unreachable spread threshold ends the bootstrap after one step."""
        cfg = small_config(bootstrap_std_threshold=1e9)
        state = bootstrap_tx_step(
            initial_state(cfg, TrackerMode.FULL), direct_frame(), RX, cfg, np.random.default_rng(0)
        )
        assert state.stage is Stage.TRACKING
        assert state.transition_step == 1

    def test_tx_only_records_transition_but_stays(self):
        """Tx-only mode records the transition but keeps bootstrapping."""
        cfg = small_config(bootstrap_std_threshold=1e9)
        rng = np.random.default_rng(1)
        state = initial_state(cfg, TrackerMode.TX_ONLY)
        for n in range(1, 4):
            state = step(state, direct_frame(n), RX, cfg, rng)
        assert state.stage is Stage.BOOTSTRAP
        assert state.transition_step == 1
        assert state.num_scatterers == 0

    def test_simplified1_collapses_transmitter(self):
        """Simplified 1 freezes a point estimate of the transmitter."""
        cfg = small_config(bootstrap_std_threshold=1e9)
        state = bootstrap_tx_step(
            initial_state(cfg, TrackerMode.SIMPLIFIED1), direct_frame(), RX, cfg, np.random.default_rng(2)
        )
        assert state.tx_particles is not None
        assert state.tx_particles.spread() == pytest.approx(0.0, abs=1e-9)
        frozen = state.tx_particles.positions.copy()
        state = step(state, direct_frame(2, (ScatterMeasurement(30.0, 1.0),)), RX, cfg, np.random.default_rng(3))
        assert np.array_equal(state.tx_particles.positions, frozen)

    def test_zero_weights_reinitialize(self):
        """A cloud that explains nothing is re-initialized from the frame."""
        cfg = small_config()
        stuck = TrackerState(
            mode=TrackerMode.FULL,
            tx_particles=point_cloud(RX.position, cfg.num_particles),
            step=1,
        )
        cfg_still = small_config(model=ModelParams(sigma_tx_walk=0.0))
        state = bootstrap_tx_step(stuck, direct_frame(2), RX, cfg_still, np.random.default_rng(4))
        assert state.tx_particles is not None
        assert state.tx_particles.spread() > 1.0

    def test_wrong_stage(self):
        """Bootstrap refuses to run in the tracking stage."""
        cfg = small_config()
        with pytest.raises(TrackerError):
            bootstrap_tx_step(tracking_state(cfg), direct_frame(), RX, cfg, np.random.default_rng(5))

    @pytest.mark.slow
    def test_straight_line_keeps_ambiguity(self):
        """Without a turn the mirror ambiguity keeps the spread above the threshold."""
        scene = straight_line_scenario(30).model_copy(update={"sigma_theta_gen": 0.0})
        cfg = TrackerConfig(num_particles=400)
        truth, frames = simulate(scene, np.random.default_rng(6))
        tracker = Tracker(cfg, TrackerMode.FULL, np.random.default_rng(7))
        for t, frame in zip(truth, frames, strict=True):
            tracker.process(frame, t.rx_pose)
        assert tracker.state.stage is Stage.BOOTSTRAP
        assert tracker.state.transition_step is None


class TestDirectEvaluation:
    """Transmitter weighting by the direct path."""

    def test_uniform_likelihood(self):
        """Particles on the measured ray all survive resampling once."""
        ranges = np.linspace(5.0, 100.0, 20)
        positions = RX.position.as_array() + ranges[:, None] * np.array([0.0, 1.0])
        tx = WeightedParticleSet.uniform(positions)
        out = evaluate_direct(tx, math.pi / 2, RX, small_config(), np.random.default_rng(0))
        assert np.array_equal(np.sort(out.positions[:, 1]), np.sort(positions[:, 1]))

    def test_dominant_particle(self):
        """One consistent particle takes over the cloud."""
        positions = np.array([[0.0, 30.0]] + [[50.0, -20.0 + 1e-3 * i] for i in range(1, 10)])
        tx = WeightedParticleSet.uniform(positions)
        out = evaluate_direct(tx, math.pi / 2, RX, small_config(), np.random.default_rng(1))
        assert np.all(out.positions == [0.0, 30.0])


class TestBeta:
    """Messages from legacy scatterers into the association loop."""

    def test_absent_scatterer(self):
        """alpha=1 gives (1, 0, ..., 0)."""
        z = np.array([[44.72136, 0.4636], [10.0, 1.0]])
        tx = point_cloud(TX, 4)
        pred = point_cloud(SCAT, 4, 0.0)
        beta, _ = compute_beta(tx, pred, 1.0, z, RX, small_config())
        assert beta == pytest.approx([1.0, 0.0, 0.0])

    def test_no_detection(self):
        """p_d=0 puts everything on the missed-detection entry."""
        cfg = small_config(model=ModelParams(p_detect=0.0))
        z = np.array([[relative_distance(TX, SCAT, RX.position), aoa(SCAT, RX)]])
        beta, _ = compute_beta(point_cloud(TX, 4), point_cloud(SCAT, 4, 0.7), 0.3, z, RX, cfg)
        assert beta == pytest.approx([1.0, 0.0])

    def test_single_particle_matches_factor(self):
        """One particle, one measurement: beta is the factor plus the absence term."""
        cfg = small_config()
        meas = ScatterMeasurement(relative_distance(TX, SCAT, RX.position) + 0.1, aoa(SCAT, RX))
        frame = direct_frame(1, (meas,))
        alpha = 0.25
        beta, _ = compute_beta(
            point_cloud(TX, 1), point_cloud(SCAT, 1, 1.0 - alpha), alpha, frame.scatter_array(), RX, cfg
        )
        for a in range(2):
            expected = (1 - alpha) * g_factor(TX, SCAT, 1, a, frame, RX, cfg.model)
            expected += alpha if a == 0 else 0.0
            assert beta[a] == pytest.approx(expected, rel=1e-12)


class TestBirth:
    """Birth particles and the unclaimed xi entry."""

    def test_zero_birth_mean(self):
        """mu_n=0 gives xi0=1."""
        z = ScatterMeasurement(relative_distance(TX, SCAT, RX.position), aoa(SCAT, RX))
        ctx = birth_and_xi(point_cloud(TX, 200), z, RX, 0.0, small_config(), np.random.default_rng(0))
        assert ctx.xi0 == 1.0

    def test_births_reproduce_measurement(self):
        """Births lie on both mirror branches and explain the measurement."""
        cfg = small_config()
        z = ScatterMeasurement(relative_distance(TX, SCAT, RX.position), aoa(SCAT, RX))
        tx = point_cloud(TX, 200)
        ctx = birth_and_xi(tx, z, RX, 1.0, cfg, np.random.default_rng(1))
        sides = side_of(ctx.positions, RX)
        assert np.sum(sides > 0) == 100
        d = relative_distances(TX.as_array(), ctx.positions, RX.position.as_array())
        assert np.all(np.abs(d - z.rel_distance) < 6 * cfg.model.sigma_d_lik)
        assert np.all(np.abs(aoas(ctx.positions, RX) - z.aoa) < 6 * cfg.model.sigma_theta_lik)
        expected = h_factor_weights(
            np.array([z.rel_distance, z.aoa]), tx.positions, ctx.positions, RX, 1.0, cfg.model
        )
        assert np.allclose(ctx.h_weights, expected)
        assert ctx.xi0 == pytest.approx(1.0 + expected.mean())
        assert ctx.xi0 > 1.0

    def test_impossible_measurement_falls_back(self):
        """A strongly negative distance still yields finite births."""
        z = ScatterMeasurement(-5.0, 1.0)
        ctx = birth_and_xi(point_cloud(TX, 200), z, RX, 1.0, small_config(), np.random.default_rng(2))
        assert np.all(np.isfinite(ctx.positions))
        assert ctx.positions.shape == (200, 2)

    def test_partially_invalid_angles(self):
        """Angles near pi sometimes leave the valid range; births stay finite."""
        z = ScatterMeasurement(20.0, math.pi - 1e-3)
        ctx = birth_and_xi(point_cloud(TX, 200), z, RX, 1.0, small_config(), np.random.default_rng(3))
        assert np.all(np.isfinite(ctx.positions))


class TestBeliefUpdates:
    """Posterior beliefs after association."""

    @staticmethod
    def legacy_context(alpha: float, factors: np.ndarray) -> LegacyContext:
        n = len(factors)
        particles = WeightedParticleSet.uniform(np.tile(SCAT.as_array(), (n, 1)), 1.0 - alpha)
        return LegacyContext(scatterer(0.1, n=n), particles, alpha, factors, particles.weights @ factors)

    def test_missed_detection_erodes_existence(self):
        """With zero likelihood the existence decays by the missed-detection algebra."""
        alpha = 0.2
        ctx = self.legacy_context(alpha, np.tile([0.05, 0.0], (10, 1)))
        ps = update_legacy_belief(ctx, np.array([1.0, 0.4]), np.random.default_rng(0))
        assert ps.nonexist_prob == pytest.approx(alpha / ((1 - alpha) * 0.05 + alpha))
        assert ps.particles.mass + ps.nonexist_prob == pytest.approx(1.0, abs=1e-9)

    def test_claimed_measurement(self):
        """eta(0)=0 forces existence."""
        ctx = self.legacy_context(0.5, np.tile([0.05, 3.0], (10, 1)))
        ps = update_legacy_belief(ctx, np.array([0.0, 1.0]), np.random.default_rng(1))
        assert ps.nonexist_prob == 0.0
        assert ps.particles.mass == pytest.approx(1.0)

    def test_absent_stays_absent(self):
        """alpha=1 keeps the scatterer absent."""
        ctx = self.legacy_context(1.0, np.tile([0.05, 3.0], (10, 1)))
        ps = update_legacy_belief(ctx, np.array([1.0, 1.0]), np.random.default_rng(2))
        assert ps.nonexist_prob == 1.0
        assert ps.id == 0

    def test_new_belief_hand_check(self):
        """Single particle: w=varsigma(0) h, q = sum(varsigma) / (w + sum(varsigma))."""
        birth = BirthContext(positions=np.array([[1.0, 2.0]]), h_weights=np.array([2.0]), xi0=3.0)
        ps = update_new_belief(birth, np.array([1.0, 0.5]), 7, 12, np.random.default_rng(3))
        assert ps.nonexist_prob == pytest.approx(1.5 / 3.5)
        assert ps.particles.mass == pytest.approx(2.0 / 3.5)
        assert (ps.id, ps.birth_step) == (7, 12)

    def test_new_belief_explained_elsewhere(self):
        """varsigma(0)=0 or no birth intensity means the new scatterer is absent."""
        birth = BirthContext(positions=np.zeros((4, 2)), h_weights=np.full(4, 5.0), xi0=6.0)
        assert update_new_belief(birth, np.array([0.0, 2.0]), 0, 1, np.random.default_rng(4)).nonexist_prob == 1.0
        silent = BirthContext(positions=np.zeros((4, 2)), h_weights=np.zeros(4), xi0=1.0)
        assert update_new_belief(silent, np.array([1.0]), 0, 1, np.random.default_rng(5)).nonexist_prob == 1.0

    def test_tx_without_scatterers(self):
        """With K=0 the transmitter belief is only resampled."""
        positions = np.random.default_rng(6).normal(size=(20, 2))
        tx = WeightedParticleSet.uniform(positions)
        out = update_tx_belief(tx, [], np.empty((0, 1)), np.random.default_rng(7))
        assert np.array_equal(np.sort(out.positions, axis=0), np.sort(positions, axis=0))

    def test_tx_single_particle_pair(self):
        """K=1: transmitter weights follow the hand-computed factor product."""
        tx = WeightedParticleSet.uniform(np.array([[0.0, 30.0], [5.0, 30.0]]))
        factors = np.array([[0.05, 9.0], [0.05, 1.0]])
        alpha = 0.2
        particles = WeightedParticleSet.uniform(np.tile(SCAT.as_array(), (2, 1)), 1 - alpha)
        ctx = LegacyContext(scatterer(0.1, n=2), particles, alpha, factors, particles.weights @ factors)
        eta = np.array([[1.0, 0.5]])
        terms = (1 - alpha) * (factors @ eta[0]) + alpha
        expected = terms / terms.sum()
        counts = np.zeros(2)
        rng = np.random.default_rng(8)
        for _ in range(2000):
            out = update_tx_belief(tx, [ctx], eta, rng)
            counts += [np.sum(out.positions[:, 0] == 0.0), np.sum(out.positions[:, 0] == 5.0)]
        assert counts / counts.sum() == pytest.approx(expected, abs=0.02)


class TestPruneAndEstimate:
    """Pruning, promotion and reporting."""

    def test_threshold_zero_keeps_all(self):
        """Nothing is pruned with a zero threshold."""
        cfg = small_config(p_prune_threshold=0.0)
        state = tracking_state(cfg, scatterer(0.999999, 0))
        out = prune_and_promote(state, list(state.scatterers), [scatterer(1.0, 1)], cfg)
        assert out.num_scatterers == 2
        assert out.next_id == 2

    def test_all_below_threshold(self):
        """Everything unlikely is dropped but ids advance."""
        cfg = small_config()
        state = tracking_state(cfg, scatterer(0.9999, 0))
        out = prune_and_promote(state, list(state.scatterers), [scatterer(0.99999, 1)], cfg)
        assert out.num_scatterers == 0
        assert out.next_id == 2

    def test_none_below_threshold(self):
        """K_n = K_{n-1} + M_n when nothing is pruned."""
        cfg = small_config()
        state = tracking_state(cfg, scatterer(0.1, 0), scatterer(0.2, 1))
        new = [scatterer(0.3, 2), scatterer(0.4, 3), scatterer(0.5, 4)]
        out = prune_and_promote(state, list(state.scatterers), new, cfg)
        assert [ps.id for ps in out.scatterers] == [0, 1, 2, 3, 4]

    def test_estimate_reports_confident_scatterers(self):
        """Only scatterers above the existence threshold are reported."""
        cfg = small_config()
        state = tracking_state(cfg, scatterer(0.1, 0), scatterer(0.9, 1, Position(-40, 10)))
        est = estimate(state, cfg)
        assert est.tx is not None
        assert (est.tx.x, est.tx.y) == pytest.approx((0.0, 30.0))
        assert [t.id for t in est.scatterers] == [0]
        assert est.scatterers[0].existence_prob == pytest.approx(0.9)
        assert (est.scatterers[0].position.x, est.scatterers[0].position.y) == pytest.approx((40.0, 10.0))


class TestStep:
    """Full tracking steps."""

    def test_missing_direct_skips(self):
        """Only the step counter moves when the direct path is absent."""
        cfg = small_config()
        state = tracking_state(cfg, scatterer(0.1))
        out = step(state, MeasurementFrame(step=41, direct=None), RX, cfg, np.random.default_rng(0))
        assert out.step == 41
        assert out.scatterers is state.scatterers
        assert out.tx_particles is state.tx_particles

    def test_no_measurements(self):
        """An empty frame only applies the missed-detection erosion."""
        cfg = small_config()
        state = tracking_state(cfg, scatterer(0.1))
        out = step(state, direct_frame(41), RX, cfg, np.random.default_rng(1))
        alpha = 1 - cfg.model.p_survival * 0.9
        expected = alpha / ((1 - alpha) * (1 - cfg.model.p_detect) + alpha)
        assert out.num_scatterers == 1
        assert out.scatterers[0].nonexist_prob == pytest.approx(expected)
        assert out.next_id == 1

    def test_first_measurement_births_scatterer(self):
        """K=0 and one measurement create one new scatterer."""
        cfg = small_config()
        state = tracking_state(cfg)
        z = ScatterMeasurement(relative_distance(TX, SCAT, RX.position), aoa(SCAT, RX))
        out = step(state, direct_frame(41, (z,)), RX, cfg, np.random.default_rng(2))
        assert out.num_scatterers == 1
        assert out.scatterers[0].id == 0
        assert out.scatterers[0].birth_step == 41
        assert out.lambda_undetected == pytest.approx((1 - 0.95) * (0.25 + cfg.lambda_birth))

    def test_far_clutter_never_raises_existence(self):
        """Clutter far from every prediction cannot increase legacy existence."""
        cfg = small_config()
        state = tracking_state(cfg, scatterer(0.3, 0), scatterer(0.05, 1, Position(-40, 10)))
        rng = np.random.default_rng(3)
        clutter = (ScatterMeasurement(2.0, 0.05), ScatterMeasurement(3.0, 3.1))
        for n in range(41, 61):
            previous = {ps.id: ps.existence_prob for ps in state.scatterers if ps.id < 2}
            state = step(state, direct_frame(n, clutter), RX, cfg, rng)
            for ps in state.scatterers:
                if ps.id in previous:
                    assert ps.existence_prob <= previous[ps.id] + 1e-12

    def test_silent_scatterers_are_pruned(self):
        """Without detections every scatterer eventually disappears."""
        cfg = small_config()
        state = tracking_state(cfg, scatterer(0.0, 0), scatterer(0.2, 1, Position(-40, 10)))
        rng = np.random.default_rng(4)
        for n in range(41, 91):
            state = step(state, direct_frame(n), RX, cfg, rng)
        assert state.num_scatterers == 0


@pytest.mark.slow
@pytest.mark.integration
class TestScenarioRuns:
    """End-to-end runs on the reference scene."""

    @staticmethod
    def run(mode: TrackerMode, seed: int, n_steps: int = 60, particles: int = 200):
        scene = paper_scenario().model_copy(update={"n_steps": n_steps})
        truth, frames = simulate(scene, np.random.default_rng(seed))
        tracker = Tracker(TrackerConfig(num_particles=particles), mode, np.random.default_rng(seed + 1))
        states, estimates = [], []
        for t, frame in zip(truth, frames, strict=True):
            estimates.append(tracker.process(frame, t.rx_pose))
            states.append(tracker.state)
        return truth, states, estimates

    def test_mass_bookkeeping(self):
        """Existence mass and particle mass sum to one at every step of a full run."""
        _, states, _ = self.run(TrackerMode.FULL, seed=1, n_steps=200)
        for state in states:
            assert state.tx_particles is not None
            assert state.tx_particles.mass == pytest.approx(1.0, abs=1e-9)
            for ps in state.scatterers:
                assert abs(ps.particles.mass + ps.nonexist_prob - 1.0) < 1e-9

    def test_identifiers_never_reused(self):
        """Track ids are unique over a run."""
        _, states, _ = self.run(TrackerMode.FULL, seed=2)
        seen: dict[int, int] = {}
        for state in states:
            for ps in state.scatterers:
                assert seen.setdefault(ps.id, ps.birth_step) == ps.birth_step

    def test_deterministic(self):
        """Same seeds give identical estimates."""
        _, _, first = self.run(TrackerMode.SIMPLIFIED2, seed=3, n_steps=45)
        _, _, second = self.run(TrackerMode.SIMPLIFIED2, seed=3, n_steps=45)
        assert first == second

    def test_ambiguity_resolved_after_first_turn(self):
        """The bootstrap ends shortly after the receiver's first turn."""
        truth, states, estimates = self.run(TrackerMode.FULL, seed=4, particles=1000)
        transition = states[-1].transition_step
        assert transition is not None
        assert 30 <= transition <= 40
        tx_err = math.dist((estimates[-1].tx.x, estimates[-1].tx.y), (0.0, 30.0))
        assert tx_err < 5.0

    def test_tx_only_creates_no_scatterers(self):
        """Tx-only mode never hypothesizes scatterers."""
        _, states, _ = self.run(TrackerMode.TX_ONLY, seed=5, n_steps=40)
        assert all(state.num_scatterers == 0 for state in states)
        assert all(state.stage is Stage.BOOTSTRAP for state in states)

    def test_pure_clutter_after_convergence(self):
        """Undetected scatterers in synthesized clutter only lose existence, then vanish."""
        converged_steps, clutter_steps = 100, 50
        scene = paper_scenario().model_copy(update={"n_steps": converged_steps + clutter_steps})
        truth, frames = simulate(scene, np.random.default_rng(6))
        tracker = Tracker(TrackerConfig(num_particles=300), TrackerMode.FULL, np.random.default_rng(7))
        for t, frame in zip(truth[:converged_steps], frames[:converged_steps], strict=True):
            tracker.process(frame, t.rx_pose)
        assert tracker.state.stage is Stage.TRACKING
        legacy_ids = {ps.id for ps in tracker.state.scatterers}
        assert legacy_ids

        clutter_scene = scene.model_copy(update={"p_detect": 0.0, "mu_fa": 5.0})
        rng = np.random.default_rng(8)
        last = None
        for t in truth[converged_steps:]:
            previous = {
                ps.id: ps.existence_prob for ps in tracker.state.scatterers if ps.id in legacy_ids
            }
            last = tracker.process(synthesize_frame(t, clutter_scene, rng), t.rx_pose)
            for ps in tracker.state.scatterers:
                if ps.id in previous:
                    assert ps.existence_prob <= previous[ps.id] + 1e-12
        assert not legacy_ids & {ps.id for ps in tracker.state.scatterers}
        assert last is not None and last.scatterers == ()
