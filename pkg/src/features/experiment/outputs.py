"""CSV result files.

All files are UTF-8 with a header row, ``.`` as decimal separator and LF
line endings. Missing values are written as empty fields.
"""

from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
import structlog

from config.settings import RunConfig, TrackerMode
from features.metrics import OspaParams, aggregate
from features.scenario import MeasurementFrame

from .runner import RunResult

log = structlog.get_logger(__name__)

TX_FILE = "tx_mle.csv"
TARGET_FILE = "target_mle.csv"
OSPA_FILE = "mospa.csv"
SUMMARY_FILE = "summary.csv"
FRAMES_FILE = "frames.csv"


def _write(df: pd.DataFrame, path: Path) -> Path:
    df.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    return path


def tracks_filename(index: int) -> str:
    return f"tracks_run{index}.csv"


def summary_frame(cfg: RunConfig, results: Sequence[RunResult]) -> pd.DataFrame:
    """One-row batch summary; the transition mean skips runs that never left bootstrap."""
    steps = [r.metrics.transition_step for r in results if r.metrics.transition_step is not None]
    return pd.DataFrame(
        {
            "mode": [cfg.mode.value],
            "runs": [len(results)],
            "seed": [cfg.base_seed],
            "stage_transition_mean": [float(np.mean(steps)) if steps else np.nan],
        }
    )


def write_outputs(
    cfg: RunConfig,
    results: Sequence[RunResult],
    out_dir: Path,
    params: OspaParams = OspaParams(),
) -> list[Path]:
    """Write the batch result files and return their paths.

    Transmitter-only batches track no scatterers, so their target, OSPA and
    per-run track files are not written.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    table = aggregate([r.metrics for r in results], params)
    written = [
        _write(
            table[["step", "tx_error"]].rename(columns={"tx_error": "mean_error_m"}),
            out_dir / TX_FILE,
        )
    ]
    if cfg.mode is not TrackerMode.TX_ONLY:
        written.append(
            _write(
                table[["step", "target_error"]].rename(columns={"target_error": "mean_error_m"}),
                out_dir / TARGET_FILE,
            )
        )
        written.append(
            _write(
                table[["step", "ospa"]].rename(columns={"ospa": "mean_ospa_m"}),
                out_dir / OSPA_FILE,
            )
        )
        for r in results:
            written.append(_write(r.metrics.tracks, out_dir / tracks_filename(r.index)))
    written.append(_write(summary_frame(cfg, results), out_dir / SUMMARY_FILE))
    log.info("outputs_written", out_dir=str(out_dir), files=len(written))
    return written


def frames_frame(frames: Sequence[MeasurementFrame]) -> pd.DataFrame:
    """Raw measurements, one row per direct or scattered measurement."""
    rows: list[tuple[int, str, float, float]] = []
    for frame in frames:
        if frame.direct is not None:
            rows.append((frame.step, "direct", np.nan, frame.direct.aoa))
        rows.extend((frame.step, "scatter", z.rel_distance, z.aoa) for z in frame.scatter)
    return pd.DataFrame(rows, columns=["step", "kind", "rel_distance_m", "aoa_rad"])


def write_frames(frames: Sequence[MeasurementFrame], out_dir: Path) -> Path:
    """Write ``frames.csv`` for the given measurement frames."""
    out_dir.mkdir(parents=True, exist_ok=True)
    return _write(frames_frame(frames), out_dir / FRAMES_FILE)
