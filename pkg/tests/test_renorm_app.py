import glob
import json
import os

import numpy as np
import pytest

import renorm_app
from experiments.runners import CoveringRunner
from utils.file_utils import read_json


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc, encoding="utf-8")
    return str(path)


def reports(out):
    return sorted(p for p in glob.glob(os.path.join(out, "report-*.json")) if not p.endswith(".timing.json"))


def test_passing_run_writes_a_report(tmp_path):
    out = str(tmp_path / "out")
    assert renorm_app.run("validate_covering", None, 7, out) == renorm_app.EXIT_PASS
    (path,) = reports(out)
    doc = read_json(path)
    assert doc["pass"] is True
    assert doc["config"] == {"kind": "validate_covering", "seed": 7, "output_dir": out}
    assert os.path.exists(path.replace(".json", ".timing.json"))


def test_rerun_overwrites_the_same_report(tmp_path):
    out = str(tmp_path / "out")
    renorm_app.run("validate_covering", None, 1, out)
    renorm_app.run("validate_covering", None, 1, out)
    renorm_app.run("validate_covering", None, 2, out)
    assert len(reports(out)) == 2


def test_failed_checks_exit_with_one(tmp_path):
    config = write_config(tmp_path, {"kind": "validate_covering", "parameters": {"expected_genus": 2}})
    out = str(tmp_path / "out")
    assert renorm_app.run("validate_covering", config, None, out) == renorm_app.EXIT_FAILED_CHECKS
    (path,) = reports(out)
    assert read_json(path)["pass"] is False


@pytest.mark.parametrize(
    "doc",
    [
        {"kind": "validate_covering", "parameters": {"genus": 0}},
        {"kind": "cmv"},
        [1, 2],
        "{not json",
    ],
)
def test_invalid_configs_exit_with_two(tmp_path, doc):
    config = write_config(tmp_path, doc)
    out = str(tmp_path / "out")
    assert renorm_app.run("validate_covering", config, None, out) == renorm_app.EXIT_INVALID_CONFIG
    assert not os.path.exists(out)


def test_missing_config_file(tmp_path):
    assert renorm_app.run("cmv", str(tmp_path / "missing.json")) == renorm_app.EXIT_INVALID_CONFIG


def test_rejected_parameter_values_exit_with_two(tmp_path):
    config = write_config(tmp_path, {"kind": "renorm_poly", "parameters": {"T_coeffs": [2, 0, -10]}})
    out = str(tmp_path / "out")
    assert renorm_app.run("renorm_poly", config, None, out) == renorm_app.EXIT_INVALID_CONFIG
    assert not os.path.exists(out)


def test_numerical_failures_exit_with_one(tmp_path, monkeypatch):
    def singular(self):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setattr(CoveringRunner, "run", singular)
    out = str(tmp_path / "out")
    assert renorm_app.run("validate_covering", None, 0, out) == renorm_app.EXIT_FAILED_CHECKS
    (path,) = reports(out)
    doc = read_json(path)
    assert [check["name"] for check in doc["checks"] if not check["pass"]] == ["validate_covering.error"]


def test_config_output_dir_and_cli_override(tmp_path):
    config = write_config(tmp_path, {"kind": "validate_covering", "output_dir": str(tmp_path / "from_config")})
    assert renorm_app.run("validate_covering", config) == renorm_app.EXIT_PASS
    assert len(reports(str(tmp_path / "from_config"))) == 1
    assert renorm_app.run("validate_covering", config, None, str(tmp_path / "from_cli")) == renorm_app.EXIT_PASS
    assert len(reports(str(tmp_path / "from_cli"))) == 1


def test_main(tmp_path, monkeypatch):
    monkeypatch.setenv("SPECTRAL_RENORM_LOG_LEVEL", "warning")
    out = str(tmp_path / "out")
    assert renorm_app.main(["validate_covering", "-s", "3", "-o", out]) == renorm_app.EXIT_PASS
    assert len(reports(out)) == 1


def test_main_rejects_unknown_kinds(capsys):
    with pytest.raises(SystemExit) as exit_info:
        renorm_app.main(["not_a_kind"])
    assert exit_info.value.code == 2
    with pytest.raises(SystemExit) as exit_info:
        renorm_app.main(["--version"])
    assert exit_info.value.code == 0
    assert renorm_app.__version__ in capsys.readouterr().out
