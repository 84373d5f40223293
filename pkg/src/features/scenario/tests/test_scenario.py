"""Tests for scene generation and measurement synthesis."""

import math

import numpy as np
import pytest
from scipy import stats

from features.geometry import Pose, Position, aoa, relative_distance
from features.scenario import (
    GroundTruthFrame,
    generate_ground_truth,
    paper_scenario,
    simulate,
    straight_line_scenario,
    synthesize_frame,
    waypoint_path,
)


def truth_frame(scatterers=((40.0, 10.0), (-10.0, -10.0))) -> GroundTruthFrame:
    return GroundTruthFrame(
        step=1,
        rx_pose=Pose(Position(1.0, -20.0), (1.0, 0.0)),
        tx=Position(0.0, 30.0),
        scatterers=tuple(Position(*p) for p in scatterers),
    )


class TestWaypointPath:
    """Constant-speed path traversal."""

    def test_receiver_first_step(self):
        """Receiver moves 1 m along the first leg."""
        poses = waypoint_path(((0.0, -20.0), (30.0, -20.0)), 1.0, 5)
        assert (poses[1].position.x, poses[1].position.y) == pytest.approx((1.0, -20.0))
        assert poses[1].orientation == pytest.approx((1.0, 0.0))

    def test_target_first_step(self):
        """Target moves 0.4 m along the first leg."""
        poses = waypoint_path(((-10.0, -10.0), (10.0, -10.0)), 0.4, 5)
        assert (poses[1].position.x, poses[1].position.y) == pytest.approx((-9.6, -10.0))

    def test_single_waypoint(self):
        """A single waypoint gives a constant pose."""
        poses = waypoint_path(((3.0, 4.0),), 2.0, 10)
        assert len(poses) == 11
        assert all(p == poses[0] for p in poses)

    def test_empty_waypoints(self):
        """An empty path is rejected."""
        with pytest.raises(ValueError, match="must not be empty"):
            waypoint_path((), 1.0, 3)

    def test_corner_faces_next_leg(self):
        """A pose exactly on a corner already has the post-corner direction."""
        poses = waypoint_path(((0.0, 0.0), (2.0, 0.0), (2.0, 5.0)), 1.0, 4)
        assert (poses[2].position.x, poses[2].position.y) == pytest.approx((2.0, 0.0))
        assert poses[2].orientation == pytest.approx((0.0, 1.0))
        assert (poses[3].position.x, poses[3].position.y) == pytest.approx((2.0, 1.0))

    def test_terminal_hold(self):
        """Past the end the pose holds the last point and direction."""
        poses = waypoint_path(((0.0, 0.0), (0.0, 2.0)), 1.0, 6)
        assert (poses[6].position.x, poses[6].position.y) == pytest.approx((0.0, 2.0))
        assert poses[6].orientation == pytest.approx((0.0, 1.0))

    def test_receiver_loop_turns_at_thirty(self):
        """The reference receiver reaches its first corner at step 30."""
        cfg = paper_scenario()
        poses = waypoint_path(cfg.rx_waypoints, cfg.rx_speed, cfg.n_steps)
        assert poses[29].orientation == pytest.approx((1.0, 0.0))
        assert poses[30].orientation == pytest.approx((0.0, 1.0))


class TestPaperScenario:
    """Reference scene values."""

    def test_values(self):
        """Defaults reproduce the reference scene."""
        cfg = paper_scenario()
        assert cfg.n_steps == 200
        assert cfg.sigma_d_gen == 0.1
        assert cfg.sigma_theta_gen == pytest.approx(math.pi / 180)
        assert cfg.mu_fa == 1.0
        assert cfg.p_detect == 0.95
        assert cfg.tx_position == (0.0, 30.0)
        assert len(cfg.static_scatterers) == 4
        assert cfg.fa_d_range == (0.0, 50.0)

    def test_ground_truth_layout(self):
        """Frames cover steps 1..n with the target listed first."""
        truth = generate_ground_truth(paper_scenario())
        assert [t.step for t in truth] == list(range(1, 201))
        assert len(truth[0].scatterers) == 5
        assert (truth[0].scatterers[0].x, truth[0].scatterers[0].y) == pytest.approx((-9.6, -10.0))
        assert truth[0].scatterers[1] == Position(40.0, 10.0)

    def test_straight_line_never_turns(self):
        """The straight-line helper keeps one orientation."""
        cfg = straight_line_scenario(20)
        truth = generate_ground_truth(cfg)
        assert {t.rx_pose.orientation for t in truth} == {(1.0, 0.0)}


class TestSynthesizeFrame:
    """Noisy frame synthesis."""

    def test_noiseless_exact(self):
        """Zero noise, full detection and no clutter reproduce the geometry."""
        cfg = paper_scenario().model_copy(
            update={"sigma_d_gen": 0.0, "sigma_theta_gen": 0.0, "p_detect": 1.0, "mu_fa": 0.0}
        )
        truth = truth_frame()
        frame = synthesize_frame(truth, cfg, np.random.default_rng(1))
        assert frame.num_measurements == 2
        assert frame.direct is not None
        assert frame.direct.aoa == pytest.approx(aoa(truth.tx, truth.rx_pose))
        expected = sorted(
            (relative_distance(truth.tx, s, truth.rx_pose.position), aoa(s, truth.rx_pose))
            for s in truth.scatterers
        )
        got = sorted((z.rel_distance, z.aoa) for z in frame.scatter)
        assert np.allclose(got, expected, atol=1e-12)

    def test_nothing_detected(self):
        """No detections and no clutter leave only the direct path."""
        cfg = paper_scenario().model_copy(update={"p_detect": 0.0, "mu_fa": 0.0})
        frame = synthesize_frame(truth_frame(), cfg, np.random.default_rng(2))
        assert frame.num_measurements == 0
        assert frame.direct is not None
        assert frame.scatter_array().shape == (0, 2)

    def test_reproducible(self):
        """Identical seeds give identical frames."""
        cfg = paper_scenario()
        a = synthesize_frame(truth_frame(), cfg, np.random.default_rng(42))
        b = synthesize_frame(truth_frame(), cfg, np.random.default_rng(42))
        assert a == b

    def test_simulate_reproducible(self):
        """Whole simulations are reproducible per seed."""
        cfg = straight_line_scenario(15)
        _, frames_a = simulate(cfg, np.random.default_rng(3))
        _, frames_b = simulate(cfg, np.random.default_rng(3))
        assert frames_a == frames_b
        assert len(frames_a) == 15

    @pytest.mark.slow
    def test_clutter_count_mean(self):
        """Mean clutter count matches the Poisson mean."""
        cfg = paper_scenario().model_copy(update={"p_detect": 0.0, "mu_fa": 1.0})
        rng = np.random.default_rng(4)
        truth = truth_frame()
        counts = [synthesize_frame(truth, cfg, rng).num_measurements for _ in range(100_000)]
        assert np.mean(counts) == pytest.approx(1.0, abs=0.02)

    @pytest.mark.slow
    def test_detection_rate(self):
        """Empirical detection rate stays within 3 sigma of p_detect."""
        cfg = paper_scenario().model_copy(update={"mu_fa": 0.0})
        rng = np.random.default_rng(5)
        truth = truth_frame(tuple((float(x), 15.0) for x in range(-50, 50)))
        n_frames = 1000
        detected = sum(synthesize_frame(truth, cfg, rng).num_measurements for _ in range(n_frames))
        trials = n_frames * len(truth.scatterers)
        p = cfg.p_detect
        sigma = math.sqrt(trials * p * (1 - p))
        assert abs(detected - trials * p) < 3 * sigma

    @pytest.mark.slow
    def test_clutter_uniform(self):
        """Clutter distance and AOA pass a KS uniformity test."""
        cfg = paper_scenario().model_copy(update={"p_detect": 0.0, "mu_fa": 5.0})
        rng = np.random.default_rng(6)
        truth = truth_frame()
        z = np.concatenate([synthesize_frame(truth, cfg, rng).scatter_array() for _ in range(2000)])
        assert len(z) > 9000
        assert stats.kstest(z[:, 0], "uniform", args=(0.0, 50.0)).pvalue > 0.01
        assert stats.kstest(z[:, 1], "uniform", args=(0.0, math.pi)).pvalue > 0.01
