"""
Centralized experiment settings with validation.

Scenario, model, tracker and run parameters are immutable pydantic models
whose defaults reproduce the reference simulation scene. Process-level
knobs (logging, worker pool size) come from the environment through
pydantic-settings.
"""

import math
from enum import Enum
from functools import lru_cache
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

Point = tuple[float, float]
Interval = tuple[float, float]


class ConfigError(ValueError):
    """Raised when a configuration source cannot be read or validated."""


class TrackerMode(str, Enum):
    """Tracker variants selectable per run."""

    FULL = "full"
    SIMPLIFIED1 = "simplified1"
    SIMPLIFIED2 = "simplified2"
    TX_ONLY = "tx-only"


def _check_interval(v: Interval) -> Interval:
    lo, hi = v
    if not lo < hi:
        raise ValueError(f"Range must be ordered (lo < hi), got {v}")
    return v


def _check_probability(v: float) -> float:
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"Probability must be in [0, 1], got {v}")
    return v


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class ScenarioConfig(_Frozen):
    """Ground-truth scene and measurement generation settings."""

    tx_position: Point = Field(default=(0.0, 30.0), description="Transmitter position [m]")
    static_scatterers: tuple[Point, ...] = Field(
        default=((40.0, 10.0), (40.0, -10.0), (-40.0, -10.0), (-40.0, 10.0)),
        description="Stationary scatterer positions [m]",
    )
    target_waypoints: tuple[Point, ...] = Field(
        default=(
            (-10.0, -10.0),
            (10.0, -10.0),
            (10.0, 0.0),
            (-10.0, 0.0),
            (-10.0, 10.0),
            (10.0, 10.0),
        ),
        description="Moving target path [m]",
    )
    target_speed: float = Field(default=0.4, gt=0, description="Target speed [m/step]")
    rx_waypoints: tuple[Point, ...] = Field(
        default=(
            (0.0, -20.0),
            (30.0, -20.0),
            (30.0, 20.0),
            (-30.0, 20.0),
            (-30.0, -20.0),
            (0.0, -20.0),
        ),
        description="Receiver path [m]",
    )
    rx_speed: float = Field(default=1.0, gt=0, description="Receiver speed [m/step]")
    n_steps: int = Field(default=200, ge=1, description="Number of time steps")
    sigma_d_gen: float = Field(default=0.1, ge=0, description="Relative distance noise std [m]")
    sigma_theta_gen: float = Field(
        default=math.pi / 180, ge=0, description="AOA noise std [rad]"
    )
    p_detect: float = Field(default=0.95, description="Scattered path detection probability")
    mu_fa: float = Field(default=1.0, ge=0, description="Mean number of false alarms")
    fa_d_range: Interval = Field(default=(0.0, 50.0), description="False alarm distance range [m]")
    fa_theta_range: Interval = Field(
        default=(0.0, math.pi), description="False alarm AOA range [rad]"
    )

    @field_validator("p_detect")
    @classmethod
    def validate_probability(cls, v: float) -> float:
        """Validate detection probability."""
        return _check_probability(v)

    @field_validator("fa_d_range", "fa_theta_range")
    @classmethod
    def validate_range(cls, v: Interval) -> Interval:
        """Validate clutter box bounds."""
        return _check_interval(v)

    @field_validator("target_waypoints", "rx_waypoints")
    @classmethod
    def validate_waypoints(cls, v: tuple[Point, ...]) -> tuple[Point, ...]:
        """Require a non-empty path without repeated consecutive waypoints."""
        if not v:
            raise ValueError("Waypoint list must not be empty")
        for a, b in zip(v, v[1:], strict=False):
            if a == b:
                raise ValueError(f"Consecutive waypoints must differ, got {a} twice")
        return v


class ModelParams(_Frozen):
    """Statistical model used inside the tracker."""

    p_survival: float = Field(default=0.999, description="PS survival probability")
    p_detect: float = Field(default=0.95, description="Detection probability")
    mu_fa: float = Field(default=1.0, gt=0, description="Mean number of false alarms")
    sigma_d_lik: float = Field(default=0.2, gt=0, description="Likelihood distance std [m]")
    sigma_theta_lik: float = Field(
        default=math.pi / 90, gt=0, description="Likelihood AOA std [rad]"
    )
    sigma_tx_walk: float = Field(default=0.1, ge=0, description="Transmitter random walk std [m]")
    sigma_ps_walk: float = Field(default=0.5, ge=0, description="PS random walk std [m]")
    fa_d_range: Interval = Field(default=(0.0, 50.0), description="False alarm distance range [m]")
    fa_theta_range: Interval = Field(
        default=(0.0, math.pi), description="False alarm AOA range [rad]"
    )

    @field_validator("p_survival", "p_detect")
    @classmethod
    def validate_probability(cls, v: float) -> float:
        """Validate probabilities."""
        return _check_probability(v)

    @field_validator("fa_d_range", "fa_theta_range")
    @classmethod
    def validate_range(cls, v: Interval) -> Interval:
        """Validate clutter box bounds."""
        return _check_interval(v)


class TrackerConfig(_Frozen):
    """Particle tracker settings."""

    num_particles: int = Field(default=1000, ge=2, description="Particles per entity (S)")
    p_exist_threshold: float = Field(default=0.5, description="Existence threshold for reporting")
    p_prune_threshold: float = Field(default=1e-3, description="Existence threshold for pruning")
    assoc_tol: float = Field(default=1e-5, gt=0, description="Association convergence tolerance")
    assoc_max_iter: int = Field(default=1000, ge=1, description="Association iteration cap")
    lambda_undetected_init: float = Field(default=5.0, ge=0, description="Initial undetected mean")
    lambda_birth: float = Field(default=1e-4, ge=0, description="Birth mean per step")
    tx_range_max: float = Field(default=150.0, gt=0, description="Max direct path length [m]")
    bootstrap_std_threshold: float = Field(
        default=5.0, gt=0, description="Transmitter std that ends the bootstrap stage [m]"
    )
    model: ModelParams = Field(default_factory=ModelParams)

    @field_validator("p_exist_threshold", "p_prune_threshold")
    @classmethod
    def validate_threshold(cls, v: float) -> float:
        """Validate existence thresholds."""
        return _check_probability(v)

    @field_validator("num_particles")
    @classmethod
    def validate_num_particles(cls, v: int) -> int:
        """Particle count must be even so both ambiguity sides get S/2."""
        if v % 2:
            raise ValueError(f"num_particles must be even, got {v}")
        return v


class RunConfig(_Frozen):
    """A Monte Carlo batch."""

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    tracker: TrackerConfig = Field(default_factory=TrackerConfig)
    mode: TrackerMode = Field(default=TrackerMode.FULL, description="Tracker variant")
    runs: int = Field(default=1, ge=1, description="Number of Monte Carlo runs")
    base_seed: int = Field(default=0, ge=0, lt=2**64, description="Base RNG seed")
    out_dir: Path = Field(default=Path("results"), description="Output directory")

    @model_validator(mode="after")
    def check_scene_and_model(self) -> "RunConfig":
        """The tracker's clutter box must match the simulated one."""
        model = self.tracker.model
        if model.fa_d_range != self.scenario.fa_d_range:
            raise ValueError("model.fa_d_range must equal scenario.fa_d_range")
        if model.fa_theta_range != self.scenario.fa_theta_range:
            raise ValueError("model.fa_theta_range must equal scenario.fa_theta_range")
        return self


class AppSettings(BaseSettings):
    """Process-level settings read from the environment."""

    log_level: str = Field(default="INFO", description="Logging level")
    log_format: str = Field(default="console", description="console or json")
    workers: int = Field(default=1, ge=0, description="Worker processes (0 = all CPUs)")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_prefix="PASSIVE_TRACK_",
        extra="ignore",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of: {valid_levels}")
        return v.upper()

    @field_validator("log_format")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        """Validate log renderer."""
        if v.lower() not in {"console", "json"}:
            raise ValueError("Log format must be 'console' or 'json'")
        return v.lower()


@lru_cache
def get_settings() -> AppSettings:
    """Get cached settings instance."""
    return AppSettings()
