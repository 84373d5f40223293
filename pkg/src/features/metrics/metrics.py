"""Evaluation metrics: OSPA, localization errors and Monte Carlo aggregation."""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Final

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from features.geometry import Position
from features.scenario import GroundTruthFrame
from features.tracker import Estimate

FloatArray = NDArray[np.float64]

TARGET_MIN_PATH_M: Final[float] = 5.0
TARGET_SETTLE_STEPS: Final[int] = 20
TARGET_SETTLE_FRACTION: Final[float] = 0.5
TARGET_SMOOTH_WINDOW: Final[int] = 10


@dataclass(frozen=True)
class OspaParams:
    """OSPA order ``p`` and cutoff ``c`` [m]."""

    order: float = 1.0
    cutoff: float = 10.0

    def __post_init__(self) -> None:
        if self.order < 1.0:
            raise ValueError(f"OSPA order must be >= 1, got {self.order}")
        if self.cutoff <= 0.0:
            raise ValueError(f"OSPA cutoff must be positive, got {self.cutoff}")


@dataclass(frozen=True)
class RunMetrics:
    """Per-step error series of one Monte Carlo run.

    Attributes:
        tx_error: Transmitter localization error [m]
        target_error: Moving-target error [m], NaN where the target is not reported
        ospa: OSPA between reported scatterers and the true scatterer set [m]
        transition_step: Step at which the bootstrap ended, None if it never did
        tracks: Reported scatterer estimates as rows of
            ``(step, track_id, x, y, existence_prob)``
    """

    tx_error: FloatArray
    target_error: FloatArray
    ospa: FloatArray
    transition_step: int | None
    tracks: pd.DataFrame

    def __post_init__(self) -> None:
        n = len(self.tx_error)
        if len(self.target_error) != n or len(self.ospa) != n:
            raise ValueError("metric series must all have one entry per step")

    @property
    def n_steps(self) -> int:
        return len(self.tx_error)


def _as_points(points: Sequence[Position] | FloatArray) -> FloatArray:
    if isinstance(points, np.ndarray):
        return points.reshape(-1, 2).astype(np.float64)
    return np.array([p.as_array() for p in points], dtype=np.float64).reshape(-1, 2)


def ospa(
    estimated: Sequence[Position] | FloatArray,
    truth: Sequence[Position] | FloatArray,
    params: OspaParams = OspaParams(),
) -> float:
    """Optimal subpattern assignment distance between two finite point sets.

    Uses the Hungarian algorithm on the cutoff distance matrix. Two empty
    sets are at distance zero.
    """
    x, y = _as_points(estimated), _as_points(truth)
    if len(x) > len(y):
        x, y = y, x
    m, n = len(x), len(y)
    if n == 0:
        return 0.0
    c, p = params.cutoff, params.order
    if m == 0:
        return float(c)
    cost = np.minimum(cdist(x, y), c) ** p
    rows, cols = linear_sum_assignment(cost)
    total = cost[rows, cols].sum() + c**p * (n - m)
    return float((total / n) ** (1.0 / p))


def path_length(points: Sequence[Position] | FloatArray) -> float:
    """Cumulative length of the polyline through ``points``."""
    xy = _as_points(points)
    if len(xy) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(xy, axis=0), axis=1).sum())


def settled_path_length(
    points: Sequence[Position] | FloatArray,
    settle_steps: int = TARGET_SETTLE_STEPS,
    settle_fraction: float = TARGET_SETTLE_FRACTION,
    smooth_window: int = TARGET_SMOOTH_WINDOW,
) -> float:
    """Path length of the settled, smoothed tail of a track.

    The first ``max(settle_steps, settle_fraction * len(points))`` reports
    are dropped, and the rest is passed through a centred moving average
    of ``smooth_window`` reports before measuring. With all three set to
    0, 0 and 1 this is :func:`path_length` of the whole series.
    """
    xy = _as_points(points)
    skip = max(settle_steps, int(settle_fraction * len(xy)))
    tail = xy[skip:]
    if len(tail) < 2:
        return 0.0
    if smooth_window > 1:
        tail = (
            pd.DataFrame(tail)
            .rolling(smooth_window, center=True, min_periods=1)
            .mean()
            .to_numpy()
        )
    return path_length(tail)


def identify_target(
    tracks: Mapping[int, Sequence[Position] | FloatArray],
    min_path: float = TARGET_MIN_PATH_M,
    settle_steps: int = TARGET_SETTLE_STEPS,
    settle_fraction: float = TARGET_SETTLE_FRACTION,
    smooth_window: int = TARGET_SMOOTH_WINDOW,
) -> int | None:
    """Id of the track that moved the most once settled, if it moved more than ``min_path``.

    Static scatterer estimates wander while the transmitter belief is still
    wide and jitter afterwards, so only :func:`settled_path_length` counts.
    """
    best_id, best_len = None, min_path
    for track_id, points in tracks.items():
        length = settled_path_length(points, settle_steps, settle_fraction, smooth_window)
        if length > best_len:
            best_id, best_len = track_id, length
    return best_id


def tracks_frame(estimates: Sequence[Estimate]) -> pd.DataFrame:
    """Reported scatterers of every step as one table."""
    rows = [
        (est.step, t.id, t.position.x, t.position.y, t.existence_prob)
        for est in estimates
        for t in est.scatterers
    ]
    return pd.DataFrame(rows, columns=["step", "track_id", "x", "y", "existence_prob"])


def evaluate_run(
    truth: Sequence[GroundTruthFrame],
    estimates: Sequence[Estimate],
    transition_step: int | None,
    params: OspaParams = OspaParams(),
) -> RunMetrics:
    """Per-step errors of one run.

    The true scatterer set contains the moving target and every static
    scatterer. The target track is picked by :func:`identify_target` over
    the whole run; steps where it is not reported get NaN.
    """
    if len(truth) != len(estimates):
        raise ValueError(f"{len(truth)} truth frames but {len(estimates)} estimates")
    tx_error = np.array(
        [
            np.nan if est.tx is None else float(np.linalg.norm(est.tx.as_array() - t.tx.as_array()))
            for t, est in zip(truth, estimates, strict=True)
        ]
    )
    ospa_series = np.array(
        [
            ospa([s.position for s in est.scatterers], t.scatterers, params)
            for t, est in zip(truth, estimates, strict=True)
        ]
    )

    tracks = tracks_frame(estimates)
    histories = {
        int(track_id): group[["x", "y"]].to_numpy()
        for track_id, group in tracks.groupby("track_id", sort=True)
    }
    target_id = identify_target(histories)
    target_error = np.full(len(truth), np.nan)
    if target_id is not None:
        for i, (t, est) in enumerate(zip(truth, estimates, strict=True)):
            for s in est.scatterers:
                if s.id == target_id:
                    target_error[i] = float(
                        np.linalg.norm(s.position.as_array() - t.scatterers[0].as_array())
                    )
    return RunMetrics(
        tx_error=tx_error,
        target_error=target_error,
        ospa=ospa_series,
        transition_step=transition_step,
        tracks=tracks,
    )


def aggregate(runs: Sequence[RunMetrics], params: OspaParams = OspaParams()) -> pd.DataFrame:
    """Per-step means over runs.

    Steps where a run has no target estimate contribute the OSPA cutoff to
    the target error.

    Returns:
        Frame with columns ``step``, ``tx_error``, ``target_error``, ``ospa``.
    """
    if not runs:
        raise ValueError("aggregate needs at least one run")
    n = runs[0].n_steps
    if any(r.n_steps != n for r in runs):
        raise ValueError("all runs must cover the same number of steps")
    tx = np.vstack([r.tx_error for r in runs])
    target = np.vstack([np.nan_to_num(r.target_error, nan=params.cutoff) for r in runs])
    ospa_all = np.vstack([r.ospa for r in runs])
    return pd.DataFrame(
        {
            "step": np.arange(1, n + 1),
            "tx_error": tx.mean(axis=0),
            "target_error": target.mean(axis=0),
            "ospa": ospa_all.mean(axis=0),
        }
    )
