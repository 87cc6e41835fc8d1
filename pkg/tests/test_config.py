"""
Test suite for LIE Lab configuration.

Tests TOML loading, overrides, presets and the configuration hash.
"""

import math

import pytest

from lie_lab.errors import ConfigError
from lie_lab.experiments.config import (
    PRESETS,
    RunConfig,
    SuiteConfig,
    config_from_dict,
    list_preset_names,
    load_config,
    preset,
)
from lie_lab.numerics.geometry import ArcParams

SAMPLE_TOML = """
seed = 3
observers = ["E", "phi_ss"]

[problem]
kind = "arc"
radius = 2.0
angle_over_pi = 0.5

[grid]
n_nodes = 65

[solver]
t_final = 0.1
dt_factor = 0.2

[perturbation]
family = "smooth_random"
seed = 4
amplitude = 0.01

[output]
directory = "runs/sample"
"""


class TestLoadConfig:
    """Test TOML loading."""

    def test_load(self, tmp_path):
        """Every table lands in its field."""
        path = tmp_path / "run.toml"
        path.write_text(SAMPLE_TOML)
        config = load_config(path)
        assert config.radius == 2.0
        assert config.angle == pytest.approx(math.pi / 2)
        assert config.n_nodes == 65
        assert config.solver.t_final == 0.1
        assert config.solver.dt_factor == 0.2
        assert config.perturbation.family == "smooth_random"
        assert config.perturbation.seed == 4
        assert config.observers == ("E", "phi_ss")
        assert config.output == "runs/sample"
        assert config.seed == 3

    def test_defaults(self):
        """An empty document is the default configuration."""
        config = config_from_dict({})
        assert config == RunConfig()
        assert isinstance(config.params, ArcParams)

    def test_missing_file(self, tmp_path):
        """Unreadable files raise ConfigError."""
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.toml")

    def test_malformed(self, tmp_path):
        """Malformed TOML raises ConfigError."""
        path = tmp_path / "bad.toml"
        path.write_text("[grid\nn_nodes = ")
        with pytest.raises(ConfigError, match="malformed"):
            load_config(path)

    @pytest.mark.parametrize(
        "data",
        [
            {"extra": 1},
            {"problem": {"kind": "torus"}},
            {"problem": {"shape": "arc"}},
            {"solver": {"t_final": -1.0}},
            {"solver": {"unknown": 1}},
            {"perturbation": {"family": "wiggle"}},
            {"observers": ["nope"]},
            {"suite": {"workers": 0}},
            {"grid": 5},
        ],
    )
    def test_invalid(self, data):
        """Invalid documents raise ConfigError."""
        with pytest.raises(ConfigError):
            config_from_dict(data)

    def test_ring(self):
        """Ring configurations use the bare radius and a periodic grid."""
        config = config_from_dict({"problem": {"kind": "ring", "radius": 2.0}})
        assert config.params == 2.0
        assert config.grid.is_periodic
        assert config.grid.length == pytest.approx(4 * math.pi)


class TestOverrides:
    """Test axis overrides."""

    def test_alias(self):
        """Aliases map to fields."""
        config = RunConfig().with_override("N", 64)
        assert config.n_nodes == 64

    def test_dotted(self):
        """Dotted paths reach nested tables."""
        config = RunConfig().with_override("solver.t_final", 0.3)
        assert config.solver.t_final == 0.3

    def test_angle_over_pi(self):
        """angle_over_pi scales by pi."""
        config = RunConfig().with_override("angle_over_pi", 1.5)
        assert config.angle == pytest.approx(1.5 * math.pi)

    def test_string_values(self):
        """Numeric strings are coerced for top-level fields."""
        assert RunConfig().with_override("n_nodes", "128").n_nodes == 128

    @pytest.mark.parametrize("axis", ["bogus", "solver.bogus", "suite", "problems.kind"])
    def test_unknown_axis(self, axis):
        """Unknown axes raise ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig().with_override(axis, 1)

    def test_invalid_value(self):
        """Invalid values raise ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig().with_override("solver.t_final", -1.0)
        with pytest.raises(ConfigError):
            RunConfig().with_override("n_nodes", "many")


class TestPresets:
    """Test named presets."""

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_load(self, name):
        """Every preset builds a valid configuration."""
        assert isinstance(preset(name), RunConfig)

    def test_unknown(self):
        """Unknown presets raise ConfigError."""
        with pytest.raises(ConfigError):
            preset("nope")

    def test_names(self):
        """Names are sorted."""
        assert list_preset_names() == sorted(PRESETS)

    def test_ring_preset(self):
        """The ring preset splits into four segments."""
        config = preset("ring")
        assert config.is_ring
        assert config.suite.k == 4
        assert all(n % 4 == 0 for n in config.suite.ladder)


class TestHash:
    """Test the configuration hash."""

    def test_stable(self):
        """Equal configurations hash equally."""
        assert preset("stability").config_hash == preset("stability").config_hash

    def test_sensitive(self):
        """Any change alters the hash."""
        base = RunConfig()
        assert base.config_hash != base.with_override("seed", 1).config_hash

    def test_to_dict_round_trip(self):
        """to_dict produces a document that loads back to the same hash."""
        config = preset("conservation")
        assert config_from_dict(config.to_dict()).config_hash == config.config_hash


class TestSuiteConfig:
    """Test suite parameters."""

    def test_lists_become_tuples(self):
        """Sequences are stored as int tuples."""
        suite = SuiteConfig(ladder=[64, 128])
        assert suite.ladder == (64, 128)

    def test_headroom(self):
        """Headroom lies in [0, 1)."""
        with pytest.raises(ConfigError):
            SuiteConfig(headroom=1.0)
