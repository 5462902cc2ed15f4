import pytest

from src.errors import ConfigError
from src.network.backbone import parse_conv_spec
from src.tracking.config import (
    TrackerConfig,
    apply_settings,
    config_summary,
    load_tracker_config,
    parse_config_values,
)


class TestTrackerConfig:
    def test_defaults(self):
        cfg = TrackerConfig()
        assert cfg.update.gamma == 0.95
        assert cfg.sampler.n_scales == 3
        assert cfg.sampler.scale_step == 0.02
        assert cfg.fc_learning_rate == 1e-3
        assert cfg.grad_clip_norm == 5.0

    def test_single_seed_drives_sampler_and_network(self):
        cfg = TrackerConfig(seed=9)
        assert cfg.sampler.rng_seed == 9
        assert cfg.network.seed == 9
        assert cfg.with_seed(4).network.seed == 4

    def test_batches_need_two_samples(self):
        with pytest.raises(ValueError):
            apply_settings(TrackerConfig(), {"n_pos": 1})

    def test_negative_seed(self):
        with pytest.raises(ValueError):
            TrackerConfig(seed=-1)

    def test_overrides_reach_nested_groups(self):
        cfg = TrackerConfig().with_overrides(n_candidates=50, gamma=0.9, feature_dim=16, freeze_net=True)
        assert cfg.sampler.n_candidates == 50
        assert cfg.update.gamma == 0.9
        assert cfg.network.feature_dim == 16
        assert cfg.freeze_net is True

    def test_unknown_override(self):
        with pytest.raises(ConfigError) as info:
            TrackerConfig().with_overrides(learning_rate=0.1)
        assert info.value.key == "learning_rate"


class TestLoadTrackerConfig:
    def test_reads_key_value_file_with_comments(self, tmp_path):
        path = tmp_path / "gdt.conf"
        path.write_text(
            "# configuração de teste\n"
            "seed = 7\n"
            "gamma = 0.9\n"
            "conv_spec = 5x5/1/8,3x3/1/16\n"
            "fc7_activation = identity\n"
            "freeze_gaussians = true\n"
            "search_radius = 12.5\n",
            encoding="utf-8",
        )

        cfg = load_tracker_config(path)

        assert cfg.seed == 7
        assert cfg.update.gamma == 0.9
        assert cfg.network.conv_spec == parse_conv_spec("5x5/1/8,3x3/1/16")
        assert cfg.network.fc7_activation == "identity"
        assert cfg.freeze_gaussians is True
        assert cfg.sampler.search_radius == 12.5

    def test_unknown_key_is_error(self, tmp_path):
        path = tmp_path / "gdt.conf"
        path.write_text("gama = 0.9\n", encoding="utf-8")
        with pytest.raises(ConfigError) as info:
            load_tracker_config(path)
        assert info.value.key == "gama"

    def test_invalid_value_names_key(self, tmp_path):
        path = tmp_path / "gdt.conf"
        path.write_text("n_candidates = muitos\n", encoding="utf-8")
        with pytest.raises(ConfigError) as info:
            load_tracker_config(path)
        assert info.value.key == "n_candidates"

    def test_invariant_violation_is_config_error(self, tmp_path):
        path = tmp_path / "gdt.conf"
        path.write_text("n_scales = 4\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_tracker_config(path)

    @pytest.mark.parametrize("line", ["n_pos 48", "n_pos: 48"])
    def test_malformed_line_is_error(self, tmp_path, line):
        path = tmp_path / "gdt.conf"
        path.write_text(f"# comentário\n{line}\nn_neg = 40\n", encoding="utf-8")
        with pytest.raises(ConfigError) as info:
            load_tracker_config(path)
        assert info.value.line_number == 2
        assert "48" in str(info.value)

    def test_trailing_comment_and_blank_lines(self, tmp_path):
        path = tmp_path / "gdt.conf"
        path.write_text("\n\nn_pos = 48  # positivos\n\n", encoding="utf-8")
        assert load_tracker_config(path).sampler.n_pos == 48

    def test_not_utf8(self, tmp_path):
        path = tmp_path / "gdt.conf"
        path.write_bytes(b"seed = \xff\xfe\n")
        with pytest.raises(ConfigError):
            load_tracker_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_tracker_config(tmp_path / "nao_existe.conf")

    def test_none_returns_base(self):
        base = TrackerConfig(seed=3)
        assert load_tracker_config(None, base=base) is base

    def test_base_values_survive(self, tmp_path):
        path = tmp_path / "gdt.conf"
        path.write_text("gamma = 0.5\n", encoding="utf-8")
        cfg = load_tracker_config(path, base=TrackerConfig(init_iterations=3))
        assert cfg.init_iterations == 3
        assert cfg.update.gamma == 0.5


class TestParseConfigValues:
    @pytest.mark.parametrize("text, expected", [("true", True), ("0", False), ("sim", True), ("off", False)])
    def test_booleans(self, text, expected):
        assert parse_config_values({"pretrain": text}) == {"pretrain": expected}

    def test_key_without_value(self):
        with pytest.raises(ConfigError):
            parse_config_values({"seed": None})

    def test_bad_conv_spec(self):
        with pytest.raises(ConfigError) as info:
            parse_config_values({"conv_spec": "5x5/1"})
        assert info.value.key == "conv_spec"

    def test_weights_none(self):
        assert parse_config_values({"weights": "none"}) == {"weights": None}


def test_config_summary_lists_top_level_values():
    summary = config_summary(TrackerConfig(seed=2))
    assert summary["seed"] == 2
    assert summary["n_candidates"] == 300
    assert "sampler" not in summary
