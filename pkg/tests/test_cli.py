"""Driver tests: parsing, validation, presets, artifacts, exit codes."""

import json
import math

import numpy as np
import pytest

from wextrap.cli import (EXIT_COMPUTE, EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_OK,
                         main, parse_case, parse_family, parse_operator,
                         parse_pointwise, parse_weight, run_experiment,
                         validate_config)
from wextrap.presets import PRESETS, list_presets, preset_config
from wextrap.serialization import canonical_json
from wextrap.weights import as_fraction


class TestParsing:
    def test_weight_round_trip(self):
        for desc in (
            {"type": "constant", "value": 2.0},
            {"type": "power", "center": [0.5], "exponent": "2/7"},
            {"type": "log_blowup", "center": [0.0]},
            {"type": "product", "factors": [
                {"type": "power", "center": [0.0], "exponent": "1/2"},
                {"type": "constant", "value": 3.0}]},
            {"type": "power_of",
             "base": {"type": "power", "center": [0.0], "exponent": "1/3"},
             "exponent": "-3/2"},
        ):
            w = parse_weight(desc)
            again = parse_weight(w.descriptor())
            x = np.linspace(0.2, 3.0, 17)
            np.testing.assert_allclose(w(x), again(x), rtol=1e-14)

    def test_bad_weight_rejected(self):
        with pytest.raises(Exception):
            parse_weight({"type": "mystery"})

    def test_pointwise_symbols(self):
        b = parse_pointwise({"type": "log_abs", "center": 0.0})
        assert b(np.array([1.0]))[0] == 0.0
        bump = parse_pointwise({"type": "bump", "halfwidth": 1.0,
                                "amplitude": 2.0})
        assert bump(np.array([0.0]))[0] == pytest.approx(2.0 * math.exp(-1))

    def test_case_tags(self):
        c = parse_case({"tag": "offdiagonal_vector", "alpha": "1/4"})
        assert c.alpha == as_fraction("1/4")
        with pytest.raises(Exception):
            parse_case({"tag": "nonsense"})

    def test_family(self):
        fam = parse_family({"dim": 1, "half_width": 2.0, "min_level": 0,
                            "max_level": 3})
        assert len(fam) == 15

    def test_operators(self):
        assert parse_operator({"type": "zero"}).descriptor()["type"] == "zero"
        op = parse_operator({"type": "fractional_integral", "beta": 1.5})
        assert op.beta == 1.5


class TestValidation:
    def test_unknown_experiment(self):
        errs = validate_config({"experiment": "nope"})
        assert errs

    def test_missing_keys_reported(self):
        errs = validate_config({"experiment": "weight-constant", "seed": 0})
        assert any("class" in e for e in errs)
        assert any("family" in e for e in errs)

    def test_all_presets_validate(self):
        for name in PRESETS:
            assert validate_config(preset_config(name)) == []

    def test_catalog_covers_experiments(self):
        listing = list_presets()
        assert len(listing) >= 6
        tags = {preset_config(row["name"])["experiment"] for row in listing}
        assert {"weight-constant", "characterize", "solve-theta",
                "boundedness-sweep", "compactness-contrast",
                "symbol-norm"} <= tags

    def test_preset_case_mapping(self):
        cfg = preset_config("offdiagonal-certificate")
        assert cfg["case"]["tag"] == "offdiagonal_vector"
        cfg = preset_config("diagonal-componentwise-certificate")
        assert cfg["case"]["tag"] == "diagonal_componentwise"


class TestRunExperiment:
    def test_unit_weight_value_one(self):
        code, out, csv_rows = run_experiment(preset_config("unit-weight-ap"))
        assert code == EXIT_OK
        assert out["value"] == pytest.approx(1.0, abs=1e-12)
        assert csv_rows is None

    def test_malformed_config_is_config_error(self):
        code, out, _ = run_experiment({"experiment": "solve-theta", "seed": 0})
        assert code == EXIT_CONFIG
        assert out["errors"]

    def test_compute_error_exit(self):
        cfg = preset_config("unit-weight-ap")
        cfg["class"] = {"kind": "multilinear", "p": ["2", "2"]}
        cfg["weights"] = [cfg["weight"]]  # length mismatch surfaces at run time
        code, out, _ = run_experiment(cfg)
        assert code == EXIT_COMPUTE
        assert "error" in out

    def test_inconclusive_exit_for_failed_solve(self):
        cfg = preset_config("diagonal-certificate")
        cfg["w"] = [{"type": "power", "center": [0.0], "exponent": "2"}] * 2
        cfg["v"] = [{"type": "power", "center": [0.0], "exponent": "2"}] * 2
        code, out, _ = run_experiment(cfg)
        assert code == EXIT_INCONCLUSIVE
        assert out["success"] is False

    def test_solve_theta_artifact_shape(self):
        from fractions import Fraction
        code, out, _ = run_experiment(preset_config("diagonal-certificate"))
        assert code == EXIT_OK
        assert out["success"] is True
        assert 0 < Fraction(out["theta"]) < 1
        assert out["provenance_run"]["config"]["experiment"] == "solve-theta"
        assert "checks" in out and len(out["checks"]) == 3

    def test_product_bound_reevaluates_on_second_family(self):
        cfg = preset_config("diagonal-certificate")
        cfg["experiment"] = "product-bound"
        cfg["bound_family"] = {"dim": 1, "half_width": 4.0, "min_level": 0,
                               "max_level": 5}
        code, out, _ = run_experiment(cfg)
        assert code == EXIT_OK
        block = out["product_bounds_on_family"]
        assert block["family"]["max_level"] == 5
        assert len(block["bounds"]) == 3
        for bound in block["bounds"]:
            assert bound["ratio"] > 0

    def test_provenance_echoes_thresholds(self):
        code, out, _ = run_experiment(preset_config("power-weight-ap"))
        assert code == EXIT_OK
        prov = out["provenance"]
        assert "divergence_ratio" in prov
        assert prov["config"]["resolution"] == 64
        assert "membership" in out


class TestMainEntry:
    def test_run_preset_writes_artifacts(self, tmp_path):
        code = main(["run", "--preset", "unit-weight-ap",
                     "--output-dir", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "unit-weight-ap.json").read_text())
        assert doc["value"] == 1.0

    def test_config_file_run(self, tmp_path):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(preset_config("unit-weight-ap")))
        code = main(["run", str(cfg_path), "--output-dir", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "exp.json").exists()

    def test_malformed_config_writes_nothing(self, tmp_path):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text(json.dumps({"experiment": "weight-constant"}))
        out_dir = tmp_path / "out"
        code = main(["run", str(cfg_path), "--output-dir", str(out_dir)])
        assert code == EXIT_CONFIG
        assert not out_dir.exists()

    def test_override_applies(self, tmp_path):
        code = main(["run", "--preset", "unit-weight-ap",
                     "--override", "class.p=\"3\"",
                     "--output-dir", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "unit-weight-ap.json").read_text())
        assert "3" in doc["tag"]

    def test_validate_subcommand(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(preset_config("log-symbol-bmo")))
        assert main(["validate", str(cfg_path)]) == 0
        cfg_path.write_text("{}")
        assert main(["validate", str(cfg_path)]) == EXIT_CONFIG

    def test_presets_subcommand(self, capsys):
        assert main(["presets"]) == 0
        text = capsys.readouterr().out
        assert "fractional-contrast" in text

    def test_requires_exactly_one_source(self):
        assert main(["run"]) == EXIT_CONFIG


class TestCanonicalJson:
    def test_fixed_float_format(self):
        s = canonical_json({"x": 1.0 / 3.0, "y": 2.0, "inf": math.inf})
        assert "0.33333333333333331" in s
        assert '"inf"' in s
        assert '"y": 2.0' in s

    def test_fraction_rendering(self):
        from fractions import Fraction
        assert '"1/5"' in canonical_json({"e": Fraction(1, 5)})

    def test_sorted_keys_and_stability(self):
        doc = {"b": [1, 2, {"z": 0.1, "a": 0.2}], "a": None, "c": True}
        assert canonical_json(doc) == canonical_json(json.loads(
            canonical_json(doc)))

    def test_csv_contract_columns(self, tmp_path):
        code, out, rows = run_experiment(preset_config("cz-contrast"))
        assert code == EXIT_OK
        from wextrap.serialization import write_csv
        from wextrap.cli import CSV_COLUMNS
        path = tmp_path / "contrast.csv"
        write_csv(path, rows, CSV_COLUMNS)
        header = path.read_text().splitlines()[0]
        assert header == "N,symbol_class,k,a_k,a_k_over_a1"
