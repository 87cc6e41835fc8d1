"""
LIE Lab config - Run configuration, TOML loading and presets.

This module provides the RunConfig and SuiteConfig dataclasses, the TOML
reader that fills them, dotted-axis overrides used by sweeps and the CLI,
and the named presets behind ``lie-lab verify``.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Literal

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..constants import (
    CHANNEL_DOCS,
    DEFAULT_ANGLE,
    DEFAULT_CHANNELS,
    DEFAULT_HEADROOM,
    DEFAULT_RADIUS,
)
from ..errors import ConfigError
from ..numerics.geometry import ArcParams, Grid
from ..numerics.perturbations import PerturbationSpec
from ..numerics.solver import SolverConfig

logger = logging.getLogger("lie-lab.config")

# Sweep and CLI shorthands for dotted config paths.
AXIS_ALIASES: dict[str, str] = {
    "N": "n_nodes",
    "nodes": "n_nodes",
    "theta": "angle",
    "R": "radius",
    "tfinal": "solver.t_final",
    "t_final": "solver.t_final",
    "dt_factor": "solver.dt_factor",
    "amplitude": "perturbation.amplitude",
    "family": "perturbation.family",
}


# =============================================================================
# Dataclasses
# =============================================================================


@dataclass(frozen=True)
class SuiteConfig:
    """Parameters of the acceptance suites."""

    ladder: tuple[int, ...] = (128, 256, 512)
    n_list: tuple[int, ...] = (1, 2)
    ring_n: tuple[int, ...] = (2, 3)
    seeds: tuple[int, ...] = tuple(range(10))
    k: int = 4
    amplitude: float = 1e-2
    headroom: float = DEFAULT_HEADROOM
    workers: int = 1

    def __post_init__(self):
        for name in ("ladder", "n_list", "ring_n", "seeds"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        if not 0.0 <= self.headroom < 1.0:
            raise ConfigError(f"headroom must lie in [0, 1), got {self.headroom}")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")

    def to_dict(self) -> dict:
        return {f.name: _plain(getattr(self, f.name)) for f in fields(self)}


@dataclass(frozen=True)
class RunConfig:
    """One fully specified run: problem, grid, solver, perturbation and output."""

    problem: Literal["arc", "ring"] = "arc"
    radius: float = DEFAULT_RADIUS
    angle: float = DEFAULT_ANGLE
    n_nodes: int = 256
    solver: SolverConfig = field(default_factory=SolverConfig)
    perturbation: PerturbationSpec = field(default_factory=lambda: PerturbationSpec("zero"))
    observers: tuple[str, ...] = DEFAULT_CHANNELS
    output: str | None = None
    seed: int = 0
    suite: SuiteConfig = field(default_factory=SuiteConfig)

    def __post_init__(self):
        if self.problem not in ("arc", "ring"):
            raise ConfigError(f"problem must be 'arc' or 'ring', got '{self.problem}'")
        object.__setattr__(self, "observers", tuple(self.observers))
        unknown = [name for name in self.observers if name not in CHANNEL_DOCS]
        if unknown:
            raise ConfigError(f"unknown observer channel(s): {', '.join(unknown)}")
        if self.solver.observers:
            raise ConfigError("observers are selected by name, not passed in the solver config")

    @property
    def is_ring(self) -> bool:
        return self.problem == "ring"

    @property
    def params(self) -> ArcParams | float:
        """ArcParams for arcs, the bare radius for rings."""
        if self.is_ring:
            return float(self.radius)
        return ArcParams(self.radius, self.angle)

    @property
    def grid(self) -> Grid:
        if self.is_ring:
            return Grid.periodic(2.0 * math.pi * self.radius, self.n_nodes)
        return Grid.interval(self.angle * self.radius, self.n_nodes)

    def to_dict(self) -> dict:
        """Nested dictionary in the layout of the TOML file, every default filled."""
        problem: dict[str, Any] = {"kind": self.problem, "radius": self.radius}
        if not self.is_ring:
            problem["angle"] = self.angle
        return {
            "problem": problem,
            "grid": {"n_nodes": self.n_nodes},
            "solver": {k: v for k, v in self.solver.to_dict().items() if k != "observers"},
            "perturbation": self.perturbation.to_dict(),
            "suite": self.suite.to_dict(),
            "output": {"directory": self.output},
            "observers": list(self.observers),
            "seed": self.seed,
        }

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_override(self, axis: str, value: Any) -> "RunConfig":
        """
        Copy with one field replaced.

        Args:
            axis: Field name, dotted path into a nested table
                ("solver.t_final", "perturbation.seed") or an alias
                ("N", "theta", "angle_over_pi")
            value: New value

        Returns:
            New RunConfig

        Raises:
            ConfigError: If the axis is unknown or the value invalid
        """
        if axis == "angle_over_pi":
            return self.with_override("angle", float(value) * math.pi)
        path = AXIS_ALIASES.get(axis, axis)
        head, _, rest = path.partition(".")
        if rest:
            known = head in _NESTED and rest in {f.name for f in fields(getattr(self, head))}
        else:
            known = head in _TOP_LEVEL and head not in _NESTED
        if not known:
            raise ConfigError(f"unknown sweep axis '{axis}'")
        try:
            if not rest:
                return replace(self, **{head: _coerce(head, value)})
            return replace(self, **{head: replace(getattr(self, head), **{rest: value})})
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value {value!r} for '{axis}': {exc}") from exc


_TOP_LEVEL = {f.name for f in fields(RunConfig)}
_NESTED = {"solver", "perturbation", "suite"}


def _coerce(name: str, value: Any) -> Any:
    if name in ("n_nodes", "seed"):
        return int(value)
    if name in ("radius", "angle"):
        return float(value)
    if name == "observers":
        return tuple(value)
    return value


def _plain(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


# =============================================================================
# Loading
# =============================================================================


def _table(data: dict, name: str) -> dict:
    table = data.get(name, {})
    if not isinstance(table, dict):
        raise ConfigError(f"[{name}] must be a table")
    return table


def config_from_dict(data: dict) -> RunConfig:
    """
    Build a RunConfig from the nested layout of the TOML file.

    Missing tables and keys fall back to the dataclass defaults.
    """
    known = {"problem", "grid", "solver", "perturbation", "suite", "output", "observers", "seed"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(extra))}")
    try:
        problem = dict(_table(data, "problem"))
        kwargs: dict[str, Any] = {"problem": problem.pop("kind", "arc")}
        if "radius" in problem:
            kwargs["radius"] = float(problem.pop("radius"))
        if "angle_over_pi" in problem:
            kwargs["angle"] = float(problem.pop("angle_over_pi")) * math.pi
        if "angle" in problem:
            kwargs["angle"] = float(problem.pop("angle"))
        if problem:
            raise ConfigError(f"unknown [problem] key(s): {', '.join(sorted(problem))}")

        grid = _table(data, "grid")
        if "n_nodes" in grid:
            kwargs["n_nodes"] = int(grid["n_nodes"])
        kwargs["solver"] = SolverConfig(**_table(data, "solver"))
        perturbation = _table(data, "perturbation")
        if perturbation:
            kwargs["perturbation"] = PerturbationSpec.from_dict(
                {"family": "zero", **perturbation}
            )
        kwargs["suite"] = SuiteConfig(**_table(data, "suite"))
        output = _table(data, "output")
        if output.get("directory") is not None:
            kwargs["output"] = str(output["directory"])
        if "observers" in data:
            kwargs["observers"] = tuple(data["observers"])
        if "seed" in data:
            kwargs["seed"] = int(data["seed"])
        return RunConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    """Read a TOML run configuration."""
    path = Path(path)
    try:
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc
    logger.info(f"Loaded configuration from {path}")
    return config_from_dict(data)


# =============================================================================
# Presets
# =============================================================================

PRESETS: dict[str, dict] = {
    "arc-accuracy": {
        "grid": {"n_nodes": 256},
        "solver": {"t_final": 0.5, "observe_stride": 50},
        "observers": ["x3_offset", "x3_spread", "arclength"],
        "suite": {"ladder": [128, 256, 512]},
    },
    "conservation": {
        "grid": {"n_nodes": 512},
        "solver": {"t_final": 0.1, "observe_stride": 20},
        "perturbation": {"family": "smooth_random", "amplitude": 1e-2},
        "observers": ["E", "E1", "E2"],
        "suite": {"ladder": [128, 256, 512], "seeds": list(range(10))},
    },
    "stability": {
        "grid": {"n_nodes": 128},
        "solver": {"t_final": 5.0, "observe_stride": 100},
        "perturbation": {"family": "smooth_random", "amplitude": 1e-2},
        "suite": {"seeds": list(range(10)), "amplitude": 1e-2},
    },
    "constant-shift": {
        "grid": {"n_nodes": 256},
        "solver": {"t_final": 0.5, "observe_stride": 50},
        "perturbation": {"family": "constant_shift", "c": [0.0, 0.0, 0.1]},
        "suite": {"seeds": [0]},
    },
    "optimality": {
        "grid": {"n_nodes": 512},
        "solver": {"t_final": 0.25, "observe_stride": 100},
        "suite": {"n_list": [1, 2, 4]},
    },
    "ring": {
        "problem": {"kind": "ring"},
        "grid": {"n_nodes": 384},
        "solver": {"t_final": 0.5, "observe_stride": 25, "snapshot_stride": 0},
        "observers": ["x3_offset", "x3_spread", "E", "arclength"],
        "suite": {"ladder": [192, 384, 768], "ring_n": [2, 3, 4], "k": 4, "seeds": [0, 1]},
    },
    "symmetry": {
        "grid": {"n_nodes": 129},
        "solver": {"t_final": 1.0, "observe_stride": 50},
        "perturbation": {"family": "smooth_random", "amplitude": 2e-2},
        "observers": ["symmetry"],
    },
    "poincare": {
        "grid": {"n_nodes": 256},
        "suite": {"ladder": [128, 256]},
    },
}


def preset(name: str) -> RunConfig:
    """RunConfig of a named preset."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}', expected one of {sorted(PRESETS)}")
    return config_from_dict(PRESETS[name])


def list_preset_names() -> list[str]:
    return sorted(PRESETS)
