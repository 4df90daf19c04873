import json

import pytest

from pyqkt.config import (
    ExperimentConfig,
    ExperimentKind,
    OutputFormat,
    ReproduceTarget,
    load_config_file,
    parse_config,
)
from pyqkt.errors import ConfigError, UnsupportedSpinError
from pyqkt.nonextensive import DEFAULT_Q_GRID


def write_config(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path


class TestDefaults:
    def test_build(self):
        config = parse_config({"kind": "build", "J": 240})
        assert config.alpha == 3.0
        assert config.steps == 3000
        assert config.q_grid == DEFAULT_Q_GRID
        assert config.format is OutputFormat.CSV
        assert config.renormalize and not config.plot

    def test_kind_with_dash(self):
        config = parse_config({"kind": "edge-scan", "J": 120})
        assert config.kind is ExperimentKind.EDGE_SCAN

    def test_enum_values_pass_through(self):
        config = parse_config({"kind": ExperimentKind.REPRODUCE, "target": ReproduceTarget.FIG2})
        assert config.target is ReproduceTarget.FIG2

    def test_format_extensions(self):
        assert OutputFormat.BOTH.extensions == ("csv", "json")
        assert OutputFormat.JSON.extensions == ("json",)


class TestPrecedence:
    def test_flag_overrides_file(self, tmp_path):
        path = write_config(tmp_path, {"kind": "build", "J": 120, "alpha": 2.5})
        config = parse_config({"J": 240, "alpha": None}, path)
        assert config.J == 240
        assert config.alpha == 2.5

    def test_file_keys_with_dashes(self, tmp_path):
        path = write_config(
            tmp_path, {"kind": "delta-sweep", "J": 40, "deltas": [0.001, 0.01], "tail-fraction": 0.3}
        )
        config = parse_config({}, path)
        assert config.deltas == (0.001, 0.01)
        assert config.tail_fraction == 0.3

    def test_string_sequences(self):
        config = parse_config(
            {"kind": "fidelity", "J": 40, "delta": "0.01", "state": "0.0, 1.0, 0.0"}
        )
        assert config.state == (0.0, 1.0, 0.0)
        assert config.delta == 0.01

    def test_lowercase_spin_key(self):
        assert parse_config({"kind": "build", "j": 8}).J == 8


class TestErrors:
    def test_kind_required(self):
        with pytest.raises(ConfigError) as info:
            parse_config({"J": 8})
        assert info.value.key == "kind"

    def test_odd_spin(self):
        with pytest.raises(UnsupportedSpinError) as info:
            parse_config({"kind": "build", "J": 7})
        assert info.value.key == "J"
        assert info.value.exit_code == 1

    def test_odd_spin_in_list(self):
        with pytest.raises(UnsupportedSpinError):
            parse_config({"kind": "table1", "J_list": "120,151"})

    def test_unknown_key(self, tmp_path):
        path = write_config(tmp_path, {"kind": "build", "J": 8, "colour": "red"})
        with pytest.raises(ConfigError) as info:
            parse_config({}, path)
        assert info.value.key == "colour"

    @pytest.mark.parametrize(
        "flags, key",
        [
            ({"kind": "build", "J": "eight"}, "J"),
            ({"kind": "build", "J": True}, "J"),
            ({"kind": "build", "J": 8, "alpha": "fast"}, "alpha"),
            ({"kind": "build", "J": 8, "window": "1,2,3"}, "window"),
            ({"kind": "build", "J": 8, "format": "xml"}, "format"),
            ({"kind": "warp"}, "kind"),
        ],
    )
    def test_type_mismatch(self, flags, key):
        with pytest.raises(ConfigError) as info:
            parse_config(flags)
        assert info.value.key == key

    def test_nested_file(self, tmp_path):
        path = write_config(tmp_path, {"kind": "build", "fit": {"q": 2}})
        with pytest.raises(ConfigError) as info:
            load_config_file(path)
        assert info.value.key == "fit"

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{kind: build")
        with pytest.raises(ConfigError):
            parse_config({}, path)

    def test_state_and_state_z(self):
        with pytest.raises(ConfigError) as info:
            parse_config(
                {"kind": "fidelity", "J": 8, "delta": 0.01, "state": [0, 1, 0], "state_z": 0.3}
            )
        assert info.value.key == "state"

    @pytest.mark.parametrize(
        "flags, key",
        [
            ({"kind": "fidelity", "J": 8, "state_z": 0.3}, "delta"),
            ({"kind": "fidelity", "J": 8, "delta": 0.01}, "state"),
            ({"kind": "delta_sweep", "J": 8}, "deltas"),
            ({"kind": "fit"}, "input"),
            ({"kind": "reproduce"}, "target"),
            ({"kind": "edge_scan"}, "J"),
        ],
    )
    def test_missing_requirements(self, flags, key):
        with pytest.raises(ConfigError) as info:
            parse_config(flags)
        assert info.value.key == key

    @pytest.mark.parametrize(
        "extra, key",
        [
            ({"steps": 0}, "steps"),
            ({"workers": 0}, "workers"),
            ({"tail_fraction": 1.5}, "tail_fraction"),
            ({"q_grid": "0.5,2,0.1"}, "q_grid"),
            ({"window": "20,10"}, "window"),
            ({"z_step": 0}, "z_step"),
        ],
    )
    def test_ranges(self, extra, key):
        with pytest.raises(ConfigError) as info:
            parse_config({"kind": "build", "J": 8, **extra})
        assert info.value.key == key

    def test_deltas_must_increase(self):
        with pytest.raises(ConfigError):
            parse_config({"kind": "delta_sweep", "J": 8, "deltas": "0.01,0.001"})


class TestSnapshot:
    def test_serialisable(self):
        config = parse_config({"kind": "reproduce", "target": "fig3", "format": "both"})
        snapshot = config.snapshot()
        assert snapshot["kind"] == "reproduce"
        assert snapshot["target"] == "fig3"
        assert snapshot["q_grid"] == list(DEFAULT_Q_GRID)
        assert json.loads(json.dumps(snapshot)) == snapshot

    def test_frozen(self):
        config = ExperimentConfig(ExperimentKind.BUILD, J=8)
        with pytest.raises(AttributeError):
            config.J = 10  # type: ignore[misc]
