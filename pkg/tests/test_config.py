"""Tests for presets, YAML files and dotted overrides."""

import pytest

from moneyflow import PRESETS, ConfigError, Variant, load_config
from moneyflow.config import numeric_key, parse_assignment, preset_settings

# ============================================================================
# Presets and defaults
# ============================================================================


class TestPresets:
    def test_defaults(self):
        cfg = load_config()
        assert cfg.params.alpha1 == 1.5
        assert cfg.params.alpha2 == 10.0
        assert cfg.params.variant is Variant.CORRECT
        assert cfg.initial.c0 == 0.0
        assert cfg.initial.state0.rho == 0.5
        assert cfg.integrator.t_end == 50.0
        assert cfg.sampling.dtau == 0.05
        assert cfg.overrides == {}

    @pytest.mark.parametrize(
        "name, check",
        [
            ("fig-erratum", lambda c: c.params.variant is Variant.ILINSKI_ERRATUM),
            ("fig-alpha1-zero", lambda c: c.params.alpha1 == 0.0),
            ("fig-c0-positive", lambda c: c.initial.c0 == 0.1),
            ("fig-c0-negative", lambda c: c.initial.c0 == -0.1),
            ("fig-correct", lambda c: c.params.variant is Variant.CORRECT),
            ("fig-indicators", lambda c: c.params.alpha2 == 10.0),
        ],
    )
    def test_named_presets(self, name, check):
        cfg = load_config(preset=name)
        assert check(cfg), f"Preset {name} resolved to {cfg}"
        assert cfg.preset == name
        assert cfg.overrides == {}, "A bare preset has no overrides"

    def test_all_presets_build(self):
        for name in PRESETS:
            preset_settings(name)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError) as exc:
            load_config(preset="fig-99")
        assert exc.value.field == "preset"


# ============================================================================
# Assignments
# ============================================================================


class TestAssignments:
    def test_parse(self):
        assert parse_assignment("model.alpha1=0.5") == ("model.alpha1", 0.5)
        assert parse_assignment("output.svg=false") == ("output.svg", False)
        assert parse_assignment("initial.eta_prime0=") == ("initial.eta_prime0", None)

    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            parse_assignment("model.alpha1")

    def test_override_is_recorded(self):
        cfg = load_config(preset="fig-correct", assignments=["model.alpha1=0.5"])
        assert cfg.params.alpha1 == 0.5
        assert cfg.overrides == {"model.alpha1": 0.5}

    def test_exponent_string(self):
        cfg = load_config(assignments=["integrator.rel_tol=1e-8"])
        assert cfg.integrator.rel_tol == 1e-8

    @pytest.mark.parametrize("text", ["model.alpha9=1", "modle.alpha1=1", "alpha1=1"])
    def test_unknown_key(self, text):
        with pytest.raises(ConfigError) as exc:
            load_config(assignments=[text])
        assert exc.value.field is not None

    def test_unknown_key_names_path(self):
        with pytest.raises(ConfigError) as exc:
            load_config(assignments=["model.alpha9=1"])
        assert exc.value.field == "model.alpha9"
        assert "model.alpha9" in str(exc.value)

    def test_boolean_is_not_a_number(self):
        with pytest.raises(ConfigError) as exc:
            load_config(assignments=["model.alpha1=true"])
        assert exc.value.field == "model.alpha1"

    @pytest.mark.parametrize(
        "text, field",
        [
            ("model.alpha2=-1", "model"),
            ("initial.rho=1.5", "initial"),
            ("integrator.rel_tol=0", "integrator"),
            ("sampling.dtau=0", "sampling.dtau"),
            ("integrator.method=LSODA", "integrator.method"),
        ],
    )
    def test_invalid_values(self, text, field):
        with pytest.raises(ConfigError) as exc:
            load_config(assignments=[text])
        assert exc.value.field == field

    def test_eta_prime_replaces_c0(self):
        cfg = load_config(preset="fig-c0-positive", assignments=["initial.eta_prime0=-0.3"])
        assert cfg.initial.c0 is None
        assert cfg.initial.eta_prime0 == -0.3

    def test_flags_win_over_assignments(self):
        cfg = load_config(
            assignments=["integrator.t_end=20"], flags=[("integrator.t_end", 30.0)]
        )
        assert cfg.integrator.t_end == 30.0

    def test_with_setting(self):
        cfg = load_config(preset="fig-correct")
        changed = cfg.with_setting("model.alpha1", 0.25)
        assert changed.params.alpha1 == 0.25
        assert cfg.params.alpha1 == 1.5
        assert changed.overrides == {"model.alpha1": 0.25}

    def test_numeric_key(self):
        assert numeric_key("model.alpha1")
        assert numeric_key("raw.M")
        assert not numeric_key("model.variant")
        assert not numeric_key("output.svg")


# ============================================================================
# YAML files
# ============================================================================


class TestConfigFile:
    def test_file_layers_over_preset(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text(
            "preset: fig-erratum\n"
            "model:\n"
            "  alpha1: 0.5\n"
            "initial:\n"
            "  c0: 0.1\n"
            "output:\n"
            "  svg: false\n"
        )
        cfg = load_config(path)
        assert cfg.preset == "fig-erratum"
        assert cfg.params.variant is Variant.ILINSKI_ERRATUM
        assert cfg.params.alpha1 == 0.5
        assert cfg.initial.c0 == 0.1
        assert cfg.output.svg is False
        assert cfg.overrides == {"model.alpha1": 0.5, "initial.c0": 0.1, "output.svg": False}

    def test_explicit_preset_wins(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text("preset: fig-erratum\n")
        assert load_config(path, preset="fig-correct").params.variant is Variant.CORRECT

    def test_assignment_wins_over_file(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text("model:\n  alpha2: 12\n")
        assert load_config(path, assignments=["model.alpha2=8"]).params.alpha2 == 8.0

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config(path).overrides == {}

    def test_both_closure_values(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text("initial:\n  c0: 0.1\n  eta_prime0: -0.2\n")
        with pytest.raises(ConfigError) as exc:
            load_config(path)
        assert exc.value.field == "initial"

    def test_unknown_section(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text("plotting:\n  dpi: 300\n")
        with pytest.raises(ConfigError) as exc:
            load_config(path)
        assert exc.value.field == "plotting"

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text("model: [unclosed\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.yaml")

    def test_raw_parameters(self, tmp_path):
        path = tmp_path / "raw.yaml"
        path.write_text("raw:\n  sigma2: 2.0\n  h: 4.0\n  M: 10\n  f: 0.75\n  T: 12.5\n")
        cfg = load_config(path)
        assert cfg.params.alpha1 == pytest.approx(1.5)
        assert cfg.params.alpha2 == pytest.approx(5.0)
        assert cfg.integrator.t_end == pytest.approx(50.0)
        assert cfg.raw is not None and cfg.raw.M == 10

    def test_raw_parameters_are_recorded(self, tmp_path):
        path = tmp_path / "raw.yaml"
        path.write_text("raw: {sigma2: 2.0, h: 4.0, M: 10, f: 0.75, T: 5.0}\n")
        cfg = load_config(path)
        assert cfg.integrator.t_end == pytest.approx(20.0)
        assert cfg.settings["integrator"]["t_end"] == pytest.approx(20.0)
        assert cfg.settings["model"]["alpha2"] == pytest.approx(5.0)
        assert cfg.overrides["integrator.t_end"] == pytest.approx(20.0)
        assert cfg.overrides["model.alpha2"] == pytest.approx(5.0)

    def test_raw_span_follows_changed_rate(self, tmp_path):
        path = tmp_path / "raw.yaml"
        path.write_text("raw: {sigma2: 2.0, h: 4.0, M: 10, f: 0.75, T: 5.0}\n")
        cfg = load_config(path).with_setting("raw.h", 2.0)
        assert cfg.integrator.t_end == pytest.approx(10.0)
        assert cfg.params.alpha2 == pytest.approx(10.0)
        assert cfg.settings["integrator"]["t_end"] == pytest.approx(10.0)

    def test_raw_parameters_keep_explicit_span(self, tmp_path):
        path = tmp_path / "raw.yaml"
        path.write_text("raw: {sigma2: 2.0, h: 4.0, M: 10, f: 0.75}\nintegrator: {t_end: 7}\n")
        assert load_config(path).integrator.t_end == 7.0

    def test_raw_parameters_incomplete(self, tmp_path):
        path = tmp_path / "raw.yaml"
        path.write_text("raw:\n  sigma2: 2.0\n")
        with pytest.raises(ConfigError) as exc:
            load_config(path)
        assert exc.value.field == "raw"
