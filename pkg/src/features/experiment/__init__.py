"""
Experiment harness.

Batch execution over seeded Monte Carlo runs, CSV outputs and the
command-line interface.
"""

from .cli import main
from .logging_setup import configure_logging
from .outputs import frames_frame, summary_frame, write_frames, write_outputs
from .runner import RunResult, run_batch, run_rng, run_single, synth_frames

__all__ = [
    "RunResult",
    "configure_logging",
    "frames_frame",
    "main",
    "run_batch",
    "run_rng",
    "run_single",
    "summary_frame",
    "synth_frames",
    "write_frames",
    "write_outputs",
]
