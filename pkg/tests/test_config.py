import json

import pytest

from pbsherald.config import (
    BUILTIN_CONFIGS,
    ConfigError,
    builtin_config_text,
    load_builtin,
    parse_config,
    resolve_config,
)


def fig3_dict():
    return json.loads(builtin_config_text("fig3"))


class TestBuiltins:
    def test_both_geometries_ship(self):
        assert BUILTIN_CONFIGS == ("fig3", "fig4-recombine")

    def test_fig3_parses(self):
        config = load_builtin("fig3")
        assert len(config.bank.bindings) == 4
        assert len(config.rule.groups) == 2
        assert config.analysis_beams == ("3", "4")
        assert config.source.lam == 0.1

    def test_fig4_recombine_parses(self):
        config = load_builtin("fig4-recombine")
        assert len(config.circuit) == 6
        assert config.analysis_beams == ("3", "4")

    def test_unknown_builtin(self):
        with pytest.raises(ConfigError, match="unknown builtin"):
            builtin_config_text("fig9")


class TestParseErrors:
    def test_empty_file(self):
        with pytest.raises(ConfigError, match="missing source block"):
            parse_config("")

    def test_missing_source_block(self):
        with pytest.raises(ConfigError, match="missing source block"):
            parse_config("{}")

    def test_invalid_json(self):
        with pytest.raises(ConfigError, match="invalid JSON"):
            parse_config("{nope")

    def test_duplicate_detector_id(self):
        text = builtin_config_text("fig3").replace('"D2": "f"', '"D1": "f"', 1)
        with pytest.raises(ConfigError, match="duplicate key"):
            parse_config(text)

    def test_unknown_element_type(self):
        data = fig3_dict()
        data["circuit"][1] = {"type": "teleporter", "beam": "a"}
        with pytest.raises(ConfigError, match="unknown element type"):
            parse_config(json.dumps(data))

    def test_dangling_beam_reports_step(self):
        data = fig3_dict()
        data["circuit"][3] = {"type": "pbs", "in": ["zz"], "out": ["e", "f"]}
        with pytest.raises(ConfigError, match="circuit step 3"):
            parse_config(json.dumps(data))

    def test_detector_beam_not_terminal(self):
        data = fig3_dict()
        # beam "a" exists mid-circuit but is consumed by the analysis PBS
        data["detectors"]["bindings"]["D1"] = "a"
        data["analysis"]["beams"] = ["3", "4", "e"]
        with pytest.raises(ConfigError, match="not terminal"):
            parse_config(json.dumps(data))

    def test_detector_beam_unknown(self):
        data = fig3_dict()
        data["detectors"]["bindings"]["D1"] = "zz"
        with pytest.raises(ConfigError, match="unknown beam"):
            parse_config(json.dumps(data))

    def test_herald_group_with_unknown_id(self):
        data = fig3_dict()
        data["herald"]["groups"] = [["D1", "D9"], ["D3", "D4"]]
        with pytest.raises(ConfigError, match="unknown detector id"):
            parse_config(json.dumps(data))

    def test_analysis_beams_must_match_unmeasured(self):
        data = fig3_dict()
        data["analysis"]["beams"] = ["3"]
        with pytest.raises(ConfigError, match="analysis block"):
            parse_config(json.dumps(data))

    def test_bad_lambda(self):
        data = fig3_dict()
        data["source"]["lambda"] = 2.0
        with pytest.raises(ConfigError, match="source block"):
            parse_config(json.dumps(data))

    def test_unknown_top_level_key(self):
        data = fig3_dict()
        data["extras"] = {}
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(json.dumps(data))

    def test_non_unitary_rotation(self):
        data = fig3_dict()
        data["circuit"][1] = {"type": "rotation", "beam": "a", "matrix": [[1, 1], [1, 1]]}
        with pytest.raises(ConfigError, match="unitary"):
            parse_config(json.dumps(data))

    def test_wrong_schema(self):
        data = fig3_dict()
        data["schema"] = "something-else/9"
        with pytest.raises(ConfigError, match="unsupported schema"):
            parse_config(json.dumps(data))


class TestElementsFromConfig:
    def test_rotation_with_complex_entries(self):
        data = fig3_dict()
        data["circuit"][1] = {
            "type": "rotation",
            "beam": "a",
            "matrix": [[[0, 1], 0], [0, [0, 1]]],
        }
        config = parse_config(json.dumps(data))
        assert "rotation(a)" in config.circuit.elements[1].label

    def test_phase_element(self):
        data = fig3_dict()
        data["circuit"].insert(1, {"type": "phase", "beam": "a", "phi": 0.5})
        config = parse_config(json.dumps(data))
        assert len(config.circuit) == 6

    def test_relabel_element(self):
        data = fig3_dict()
        data["circuit"].insert(1, {"type": "relabel", "in": "a", "out": "a2"})
        data["circuit"][2] = {"type": "hadamard", "beam": "a2"}
        data["circuit"][4] = {"type": "pbs", "in": ["a2"], "out": ["e", "f"]}
        config = parse_config(json.dumps(data))
        assert len(config.circuit) == 6


class TestResolve:
    def test_resolve_builtin_name(self):
        config = resolve_config("fig3")
        assert config.name == "fig3"

    def test_resolve_path(self, tmp_path):
        path = tmp_path / "custom.cfg"
        path.write_text(builtin_config_text("fig3"), encoding="utf-8")
        config = resolve_config(str(path))
        assert config.name == "fig3"  # name key in the file wins over the stem

    def test_resolve_missing(self):
        with pytest.raises(ConfigError, match="not found"):
            resolve_config("no-such-config")

    def test_hash_stable(self):
        a = load_builtin("fig3").config_hash
        b = load_builtin("fig3").config_hash
        assert a == b and len(a) == 64
