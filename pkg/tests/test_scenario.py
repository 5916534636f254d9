import copy
import json
import math

import pytest

from fopen_sar.scenario import (SMALL_PRESET, SchemaError,
                                Scenario, load_scenario, preset_scenario,
                                tank_scenario, tank_targets, validate_scenario)


class TestValidation:
    def test_presets_validate(self):
        for name in ("full", "small"):
            scen = preset_scenario(name)
            assert scen.doc["seeds"]["master"] == 0

    def test_unknown_key_rejected_with_path(self):
        doc = copy.deepcopy(SMALL_PRESET)
        doc["platform"]["color"] = "red"
        with pytest.raises(SchemaError, match=r"platform\.color"):
            validate_scenario(doc)

    def test_missing_section_names_it(self):
        doc = copy.deepcopy(SMALL_PRESET)
        del doc["platform"]
        with pytest.raises(SchemaError, match="platform"):
            validate_scenario(doc)

    def test_bad_rcmc_choice(self):
        doc = copy.deepcopy(SMALL_PRESET)
        doc["processing"]["rcmc"] = "bilinear"
        with pytest.raises(SchemaError, match=r"processing\.rcmc"):
            validate_scenario(doc)

    def test_target_cell_out_of_range(self):
        doc = copy.deepcopy(SMALL_PRESET)
        doc["scene"]["targets"][0]["cell"] = 48
        with pytest.raises(SchemaError, match=r"scene\.targets\[0\]\.cell"):
            validate_scenario(doc)

    def test_non_integer_count_rejected(self):
        doc = copy.deepcopy(SMALL_PRESET)
        doc["waveform"]["n_subcarriers"] = 256.5
        with pytest.raises(SchemaError, match=r"waveform\.n_subcarriers"):
            validate_scenario(doc)

    def test_bad_rcs_rejected(self):
        doc = copy.deepcopy(SMALL_PRESET)
        doc["scene"]["targets"][0]["rcs"] = [1.0]
        with pytest.raises(SchemaError, match=r"rcs"):
            validate_scenario(doc)

    def test_foliage_defaults_fill_in(self):
        doc = copy.deepcopy(SMALL_PRESET)
        doc["foliage"] = {"polarization": "VV"}
        out = validate_scenario(doc)
        assert out["foliage"]["gamma_shape"] == 4.0
        assert out["foliage"]["gamma_scale"] == 0.25
        assert out["foliage"]["hurst"] == 0.4
        assert out["foliage"]["redraw_per_pulse"] is False

    def test_reference_range_below_altitude(self):
        doc = copy.deepcopy(SMALL_PRESET)
        doc["platform"]["reference_range_m"] = 10.0
        with pytest.raises(SchemaError, match="reference_range_m"):
            validate_scenario(doc)


class TestResolution:
    def test_full_preset_sizes(self):
        scen = preset_scenario("full")
        cfg = scen.simulation_config()
        assert cfg.line_length == 1024 + 2 * 192 - 2 == 1406
        assert cfg.platform.n_pulses() == 256

    def test_grazing_angle_derived_from_geometry(self):
        scen = preset_scenario("full").with_overrides(foliage_pol="HH")
        fol = scen.foliage_params()
        assert fol.grazing_angle_rad == pytest.approx(math.pi / 4, abs=1e-12)

    def test_explicit_grazing_angle(self):
        doc = copy.deepcopy(SMALL_PRESET)
        doc["foliage"] = {"polarization": "HH", "grazing_angle_deg": 30.0}
        fol = Scenario(doc).foliage_params()
        assert fol.grazing_angle_rad == pytest.approx(math.radians(30.0))

    def test_with_overrides(self):
        scen = preset_scenario("small")
        noisy = scen.with_overrides(waveform_kind="noise", foliage_pol="VV",
                                    master_seed=9)
        assert noisy.doc["waveform"]["kind"] == "noise"
        assert noisy.doc["foliage"]["polarization"] == "VV"
        assert noisy.master_seed == 9
        off = noisy.with_overrides(foliage_pol="off")
        assert "foliage" not in off.doc
        assert scen.doc["waveform"]["kind"] == "ofdm"  # original untouched

    def test_label(self):
        scen = preset_scenario("small").with_overrides(waveform_kind="noise",
                                                       foliage_pol="HH")
        assert scen.label() == "noise-foliage_HH"

    def test_seed_flows_into_all_streams(self):
        scen = preset_scenario("small").with_overrides(foliage_pol="HH")
        cfg = scen.simulation_config(master_seed=7)
        assert cfg.master_seed == 7
        assert cfg.ofdm.symbol_seed == 7
        assert cfg.foliage.seed == 7

    def test_load_scenario_file(self, tmp_path):
        path = tmp_path / "scen.json"
        path.write_text(json.dumps(SMALL_PRESET))
        scen = load_scenario(path)
        assert scen.doc["waveform"]["n_subcarriers"] == 256

    def test_load_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(SchemaError, match="invalid JSON"):
            load_scenario(path)


class TestTankFixture:
    def test_target_count_and_bounds(self):
        pts = tank_targets(96, 0.0375)
        assert 25 <= len(pts) <= 35
        cells = [p["cell"] for p in pts]
        assert min(cells) >= 0 and max(cells) <= 191
        # no duplicate (cell, azimuth) pairs
        keys = {(p["cell"], p["azimuth_m"]) for p in pts}
        assert len(keys) == len(pts)

    def test_tank_scenario_validates(self):
        scen = tank_scenario("full")
        assert len(scen.doc["scene"]["targets"]) >= 25
        scen.simulation_config()
