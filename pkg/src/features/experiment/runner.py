"""Monte Carlo batch execution.

Run ``k`` of a batch draws all of its randomness from
``SeedSequence(entropy=base_seed, spawn_key=(k,))``, so a run's results do
not depend on the worker that executed it or on the pool size.
"""

import os
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import structlog

from config.settings import RunConfig
from features.metrics import OspaParams, RunMetrics, evaluate_run
from features.scenario import MeasurementFrame, simulate
from features.tracker import Estimate, Tracker

from .logging_setup import configure_logging

log = structlog.get_logger(__name__)


@dataclass(frozen=True)
class RunResult:
    """One finished Monte Carlo run."""

    index: int
    metrics: RunMetrics
    estimates: tuple[Estimate, ...]


def run_rng(base_seed: int, index: int) -> np.random.Generator:
    """Independent generator for run ``index`` of a batch."""
    return np.random.default_rng(np.random.SeedSequence(entropy=base_seed, spawn_key=(index,)))


def run_single(cfg: RunConfig, index: int, params: OspaParams = OspaParams()) -> RunResult:
    """Simulate one scene and track it."""
    rng = run_rng(cfg.base_seed, index)
    truth, frames = simulate(cfg.scenario, rng)
    tracker = Tracker(cfg.tracker, cfg.mode, rng)
    estimates = tuple(
        tracker.process(frame, t.rx_pose) for t, frame in zip(truth, frames, strict=True)
    )
    metrics = evaluate_run(truth, estimates, tracker.state.transition_step, params)
    log.info(
        "run_done",
        run=index,
        mode=cfg.mode.value,
        transition_step=metrics.transition_step,
        final_tx_error=float(metrics.tx_error[-1]),
    )
    return RunResult(index=index, metrics=metrics, estimates=estimates)


def synth_frames(cfg: RunConfig, index: int = 0) -> list[MeasurementFrame]:
    """Measurement frames run ``index`` of the batch would see."""
    _, frames = simulate(cfg.scenario, run_rng(cfg.base_seed, index))
    return frames


def _init_worker(level: str, fmt: str) -> None:
    configure_logging(level, fmt)


def run_batch(
    cfg: RunConfig,
    workers: int = 1,
    log_level: str = "INFO",
    log_format: str = "console",
    progress: Callable[[RunResult], None] | None = None,
) -> list[RunResult]:
    """Execute ``cfg.runs`` runs, in run order.

    Args:
        cfg: Batch configuration
        workers: Pool size; 1 runs in-process, 0 uses every CPU
        log_level: Level for worker-process logging
        log_format: Renderer for worker-process logging
        progress: Called with each result as soon as it is collected
    """
    n_workers = workers or os.cpu_count() or 1
    n_workers = min(n_workers, cfg.runs)
    log.info("batch_start", runs=cfg.runs, mode=cfg.mode.value, seed=cfg.base_seed, workers=n_workers)

    results: list[RunResult] = []
    if n_workers <= 1:
        for k in range(cfg.runs):
            result = run_single(cfg, k)
            results.append(result)
            if progress:
                progress(result)
    else:
        with ProcessPoolExecutor(
            max_workers=n_workers, initializer=_init_worker, initargs=(log_level, log_format)
        ) as pool:
            futures = [pool.submit(run_single, cfg, k) for k in range(cfg.runs)]
            for future in futures:
                result = future.result()
                results.append(result)
                if progress:
                    progress(result)

    log.info("batch_done", runs=len(results))
    return results
