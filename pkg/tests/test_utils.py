"""
Tests for squirrel.utils — settings loading, named random streams, seed parsing.
"""

import numpy as np
import pytest

from squirrel.errors import ConfigError
from squirrel.models import OptimizerSettings
from squirrel.utils import ConfigLoader, named_rng, parse_seeds


class TestConfigLoader:
    def test_defaults_match_model(self):
        settings = ConfigLoader().load()
        assert settings == OptimizerSettings()
        assert settings.n_batches == 16
        assert settings.budget == 128

    def test_dict_override(self):
        settings = ConfigLoader().load({"lcb_kappa": 3.0, "shuffle_portfolio": False})
        assert settings.lcb_kappa == 3.0
        assert settings.shuffle_portfolio is False
        assert settings.gp_restarts == 32

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="Unknown config keys"):
            ConfigLoader().load({"gp_restart": 4})

    def test_invalid_value(self):
        with pytest.raises(ConfigError):
            ConfigLoader().load({"batch_size": 2})

    def test_warmstart_must_fill_init_phase(self):
        with pytest.raises(ConfigError):
            ConfigLoader().load({"n_warmstart_stored": 20})

    def test_yaml_file(self, tmp_path):
        path = tmp_path / "settings.yaml"
        path.write_text("rf_trees: 16\nn_local_chains: 2\n")
        settings = ConfigLoader().load(str(path))
        assert settings.rf_trees == 16
        assert settings.n_local_chains == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigLoader().load(str(tmp_path / "missing.yaml"))

    def test_settings_instance_passes_through(self):
        settings = OptimizerSettings(gp_restarts=4)
        assert ConfigLoader().load(settings) == settings

    def test_bad_type(self):
        with pytest.raises(TypeError):
            ConfigLoader().load(42)


class TestNamedRng:
    def test_deterministic(self):
        assert named_rng(5, "bo").random() == named_rng(5, "bo").random()

    def test_streams_independent(self):
        a = named_rng(5, "bo").random(4)
        b = named_rng(5, "de_final").random(4)
        assert not np.allclose(a, b)

    def test_seeds_independent(self):
        assert named_rng(1, "init").random() != named_rng(2, "init").random()


class TestParseSeeds:
    def test_range(self):
        assert parse_seeds("0..19") == list(range(20))

    def test_list(self):
        assert parse_seeds("1, 4,7") == [1, 4, 7]

    @pytest.mark.parametrize("text", ["", "a..b", "1,x", "5..2"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_seeds(text)
