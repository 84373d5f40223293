"""Ground-truth scene generation and noisy measurement synthesis.

Step indexing: pose/frame ``n`` is the state after ``n`` steps of motion,
so index 0 is the first waypoint and frames run over ``n = 1 .. n_steps``.
"""

from dataclasses import dataclass, field

import numpy as np
import structlog

from config.settings import ScenarioConfig
from features.geometry import (
    DirectMeasurement,
    Pose,
    Position,
    ScatterMeasurement,
    aoa,
    aoas,
    relative_distances,
)

log = structlog.get_logger(__name__)

_CORNER_TOL = 1e-9


@dataclass(frozen=True)
class GroundTruthFrame:
    """True scene at one step.

    Attributes:
        step: Time index n
        rx_pose: Receiver pose
        tx: Transmitter position
        scatterers: Scatterer positions, moving target first, then statics
    """

    step: int
    rx_pose: Pose
    tx: Position
    scatterers: tuple[Position, ...]


@dataclass(frozen=True)
class MeasurementFrame:
    """Measurements available to the tracker at one step.

    Attributes:
        step: Time index n
        direct: Direct-path AOA, or None when the direct path was not observed
        scatter: Scattered-path and clutter measurements in random order
    """

    step: int
    direct: DirectMeasurement | None
    scatter: tuple[ScatterMeasurement, ...] = field(default_factory=tuple)

    @property
    def num_measurements(self) -> int:
        return len(self.scatter)

    def scatter_array(self) -> np.ndarray:
        """Measurements as an ``(M, 2)`` array of (rel_distance, aoa)."""
        if not self.scatter:
            return np.empty((0, 2))
        return np.array([[z.rel_distance, z.aoa] for z in self.scatter], dtype=np.float64)


def paper_scenario() -> ScenarioConfig:
    """The reference scene: one transmitter, four static scatterers, one moving target."""
    return ScenarioConfig()


def straight_line_scenario(n_steps: int = 30) -> ScenarioConfig:
    """Reference scene with the receiver driving a single straight line.

    The receiver never turns, so the mirror ambiguity of every AOA persists.
    """
    return ScenarioConfig(
        rx_waypoints=((0.0, -20.0), (float(n_steps) + 10.0, -20.0)),
        n_steps=n_steps,
    )


def waypoint_path(
    waypoints: tuple[tuple[float, float], ...] | list[Position],
    speed: float,
    n_steps: int,
) -> list[Pose]:
    """Constant-speed traversal of a piecewise-linear path.

    Args:
        waypoints: Path vertices
        speed: Distance covered per step [m]
        n_steps: Number of steps; ``n_steps + 1`` poses are returned

    Returns:
        Poses for steps ``0 .. n_steps``. Orientation is the direction of the
        segment being traversed; a pose exactly on a corner already faces the
        next segment, and poses past the end hold the last direction.

    Raises:
        ValueError: If no waypoints are given.
    """
    if len(waypoints) == 0:
        raise ValueError("Waypoint list must not be empty")
    pts = np.array(
        [p.as_array() if isinstance(p, Position) else p for p in waypoints], dtype=np.float64
    )
    if len(pts) == 1:
        start = Position.from_array(pts[0])
        return [Pose(start, (1.0, 0.0)) for _ in range(n_steps + 1)]

    seg = np.diff(pts, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    if np.any(seg_len == 0.0):
        raise ValueError("Consecutive waypoints must be distinct")
    dirs = seg / seg_len[:, None]
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]

    poses: list[Pose] = []
    for n in range(n_steps + 1):
        s = n * speed
        if s >= total - _CORNER_TOL:
            xy, d = pts[-1], dirs[-1]
        else:
            j = int(np.searchsorted(cum, s + _CORNER_TOL, side="right")) - 1
            xy, d = pts[j] + (s - cum[j]) * dirs[j], dirs[j]
        poses.append(Pose(Position.from_array(xy), (float(d[0]), float(d[1]))))
    return poses


def generate_ground_truth(cfg: ScenarioConfig) -> list[GroundTruthFrame]:
    """Ground truth for steps ``1 .. n_steps``."""
    rx_path = waypoint_path(cfg.rx_waypoints, cfg.rx_speed, cfg.n_steps)
    target_path = waypoint_path(cfg.target_waypoints, cfg.target_speed, cfg.n_steps)
    tx = Position(*cfg.tx_position)
    statics = tuple(Position(*p) for p in cfg.static_scatterers)
    return [
        GroundTruthFrame(
            step=n,
            rx_pose=rx_path[n],
            tx=tx,
            scatterers=(target_path[n].position, *statics),
        )
        for n in range(1, cfg.n_steps + 1)
    ]


def synthesize_frame(
    truth: GroundTruthFrame, cfg: ScenarioConfig, rng: np.random.Generator
) -> MeasurementFrame:
    """Draw one noisy measurement frame.

    Draw order is fixed (direct noise, detections, scatter noise, clutter
    count, clutter values, shuffle) so a seeded generator reproduces frames
    bit for bit.
    """
    rx = truth.rx_pose
    direct = DirectMeasurement(aoa(truth.tx, rx) + rng.normal(0.0, cfg.sigma_theta_gen))

    scat_xy = np.array([s.as_array() for s in truth.scatterers]).reshape(-1, 2)
    detected = rng.random(len(scat_xy)) < cfg.p_detect
    scat_xy = scat_xy[detected]
    d = relative_distances(truth.tx.as_array(), scat_xy, rx.position.as_array())
    theta = aoas(scat_xy, rx)
    d = d + rng.normal(0.0, cfg.sigma_d_gen, size=len(d))
    theta = theta + rng.normal(0.0, cfg.sigma_theta_gen, size=len(theta))

    n_fa = int(rng.poisson(cfg.mu_fa))
    fa_d = rng.uniform(*cfg.fa_d_range, size=n_fa)
    fa_theta = rng.uniform(*cfg.fa_theta_range, size=n_fa)

    all_d = np.concatenate([d, fa_d])
    all_theta = np.concatenate([theta, fa_theta])
    order = rng.permutation(len(all_d))
    scatter = tuple(
        ScatterMeasurement(float(all_d[i]), float(all_theta[i])) for i in order
    )
    return MeasurementFrame(step=truth.step, direct=direct, scatter=scatter)


def simulate(
    cfg: ScenarioConfig, rng: np.random.Generator
) -> tuple[list[GroundTruthFrame], list[MeasurementFrame]]:
    """Ground truth plus one synthesized frame per step."""
    truth = generate_ground_truth(cfg)
    frames = [synthesize_frame(t, cfg, rng) for t in truth]
    log.debug("scenario_simulated", n_steps=cfg.n_steps, measurements=sum(len(f.scatter) for f in frames))
    return truth, frames
