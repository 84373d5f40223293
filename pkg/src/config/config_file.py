"""
Flat ``section.field = value`` configuration files.

Grammar (UTF-8)::

    # comment
    scenario.n_steps = 200
    scenario.tx_position = 0, 30
    scenario.static_scatterers = 40,10; 40,-10; -40,-10; -40,10
    model.sigma_theta_lik = pi/90
    tracker.num_particles = 1000
    run.mode = full

Sections are ``scenario``, ``model``, ``tracker`` and ``run``. Field names
mirror the pydantic models in :mod:`config.settings`. Unknown keys,
duplicates and malformed lines are errors.
"""

import math
import re
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from .settings import (
    ConfigError,
    ModelParams,
    Point,
    RunConfig,
    ScenarioConfig,
    TrackerConfig,
)

_PI_EXPR = re.compile(r"^\s*(?:([-+]?[0-9.eE+-]+)\s*\*\s*)?pi(?:\s*/\s*([0-9.eE+-]+))?\s*$")

_SECTIONS: dict[str, type[BaseModel]] = {
    "scenario": ScenarioConfig,
    "model": ModelParams,
    "tracker": TrackerConfig,
    "run": RunConfig,
}

# Nested models are configured through their own section, not as a field.
_NESTED = {("tracker", "model"), ("run", "scenario"), ("run", "tracker")}


def parse_number(text: str) -> float:
    """Parse a float literal or a ``pi`` expression (``pi``, ``pi/90``, ``2*pi``)."""
    text = text.strip()
    match = _PI_EXPR.match(text)
    if match:
        factor = float(match.group(1)) if match.group(1) else 1.0
        divisor = float(match.group(2)) if match.group(2) else 1.0
        return factor * math.pi / divisor
    return float(text)


def _parse_point(text: str) -> Point:
    parts = [p for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'x,y', got {text!r}")
    return (parse_number(parts[0]), parse_number(parts[1]))


def _parse_value(annotation: Any, text: str) -> Any:
    if annotation == tuple[Point, ...]:
        text = text.strip()
        if not text:
            return ()
        return tuple(_parse_point(chunk) for chunk in text.split(";"))
    if annotation == Point:
        return _parse_point(text)
    if annotation is float:
        return parse_number(text)
    if annotation is int:
        return int(text.strip())
    return text.strip()


def _format_value(value: Any) -> str:
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return "; ".join(_format_value(p) for p in value)
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def parse_run_config(text: str) -> RunConfig:
    """Parse config text into a validated :class:`RunConfig`.

    Raises:
        ConfigError: On malformed lines, unknown or duplicate keys, or
            values that fail validation.
    """
    values: dict[str, dict[str, Any]] = {name: {} for name in _SECTIONS}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.field = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        section, _, name = key.partition(".")
        model = _SECTIONS.get(section)
        if model is None or not name:
            raise ConfigError(f"line {lineno}: unknown section in key {key!r}")
        field = model.model_fields.get(name)
        if field is None or (section, name) in _NESTED:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if name in values[section]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[section][name] = _parse_value(field.annotation, value)
        except ValueError as e:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {e}") from e

    try:
        model_params = ModelParams(**values["model"])
        tracker = TrackerConfig(model=model_params, **values["tracker"])
        scenario = ScenarioConfig(**values["scenario"])
        return RunConfig(scenario=scenario, tracker=tracker, **values["run"])
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def load_run_config(path: Path) -> RunConfig:
    """Read and parse a config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_run_config(text)


def dump_run_config(cfg: RunConfig) -> str:
    """Render a config in the file grammar; ``parse_run_config`` inverts it."""
    blocks = {
        "scenario": cfg.scenario,
        "model": cfg.tracker.model,
        "tracker": cfg.tracker,
        "run": cfg,
    }
    lines: list[str] = []
    for section, model in blocks.items():
        lines.append(f"# {section}")
        for name in type(model).model_fields:
            if (section, name) in _NESTED:
                continue
            lines.append(f"{section}.{name} = {_format_value(getattr(model, name))}")
        lines.append("")
    return "\n".join(lines)
