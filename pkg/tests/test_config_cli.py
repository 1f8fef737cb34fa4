import json
import subprocess
import sys
from pathlib import Path

import pytest

from chernoffkit.cli import EXIT_CONFIG, EXIT_OK, main
from chernoffkit.config import EXPERIMENTS, ConfigError, load_config, resolve
from chernoffkit.io import dumps_json, fmt_float

ROOT = Path(__file__).resolve().parents[1]
EXAMPLES = ROOT / "configs" / "examples"
ACCEPTANCE = ROOT / "configs" / "acceptance"


# ------------------------------------------------------------------- io


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, 2.0**-40, 12345.678901234567):
        assert float(fmt_float(x)) == x


def test_json_is_ordered_and_deterministic():
    obj = {"b": 1.0, "a": [0.1, None, True], "nan": float("nan")}
    text = dumps_json(obj)
    assert text.index('"b"') < text.index('"a"')
    assert text == dumps_json(obj)
    assert json.loads(text)["nan"] == "nan"


# --------------------------------------------------------------- config


@pytest.mark.parametrize("path", sorted(ACCEPTANCE.glob("*.toml")), ids=lambda p: p.stem)
def test_acceptance_configs_validate(path):
    cfg = load_config(path)
    assert cfg.experiment in EXPERIMENTS


def test_cfl_violation_names_field():
    with pytest.raises(ConfigError) as ei:
        load_config(EXAMPLES / "cfl_violation.toml")
    assert ei.value.path == "scheme.sigma_max"


def _minimal():
    return {
        "schema_version": 1,
        "experiment": "fd-hjb",
        "grid": {"lo": -2.0, "hi": 2.0},
        "ladder": {"delta": [0.2, 0.1, 0.05], "h_rule": {"c": 0.5, "q": 2}},
        "time": {"t": 0.1},
        "scheme": {"kind": "fd-hjb", "sigma_max": 1.0, "penalty": {"kind": "indicator", "lo": 1.0, "hi": 1.0}},
        "initial": {"name": "gaussian-bump"},
        "window": {"lo": -1.0, "hi": 1.0},
        "reference": {"kind": "finest"},
    }


def test_minimal_config_resolves():
    cfg = resolve(_minimal())
    assert len(cfg.levels) == 3
    assert [lv.h for lv in cfg.levels] == pytest.approx([0.02, 0.005, 0.00125], rel=1e-14)


@pytest.mark.parametrize(
    "mutate,path",
    [
        (lambda d: d.update(schema_version=2), "schema_version"),
        (lambda d: d.update(experiment="nope"), "experiment"),
        (lambda d: d["scheme"].update(color="red"), "scheme.color"),
        (lambda d: d["scheme"]["penalty"].update(kind="cubic"), "scheme.penalty.kind"),
        (lambda d: d["window"].update(lo=5.0, hi=6.0), "window"),
        (lambda d: d["initial"].update(name="nope"), "initial.name"),
    ],
)
def test_invalid_fields_are_named(mutate, path):
    raw = _minimal()
    mutate(raw)
    with pytest.raises(ConfigError) as ei:
        resolve(raw)
    assert ei.value.path == path


# ------------------------------------------------------------------ CLI


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in EXPERIMENTS:
        assert name in out


def test_validate_ok_and_failure(capsys):
    assert main(["validate", str(EXAMPLES / "heat_quick.toml")]) == EXIT_OK
    assert main(["validate", str(EXAMPLES / "cfl_violation.toml")]) == EXIT_CONFIG
    assert "scheme.sigma_max" in capsys.readouterr().err


def test_run_rejects_bad_config(tmp_path, capsys):
    assert main(["run", str(EXAMPLES / "cfl_violation.toml"), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "scheme.sigma_max" in capsys.readouterr().err
    assert not (tmp_path / "summary.json").exists()


def test_missing_config_file(tmp_path):
    assert main(["validate", str(tmp_path / "absent.toml")]) == EXIT_CONFIG


def test_three_level_file_contract(tmp_path):
    assert main(["run", str(EXAMPLES / "heat_quick.toml"), "--out", str(tmp_path)]) == EXIT_OK
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["errors.csv", "function_0.csv", "function_1.csv", "function_2.csv", "summary.json"]
    rows = (tmp_path / "errors.csv").read_text().splitlines()
    assert rows[0] == "level,delta,h,k,error,order" and len(rows) == 4
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] is True


def test_properties_report_is_summary_only(tmp_path):
    assert main(["run", str(EXAMPLES / "properties_quick.toml"), "--out", str(tmp_path)]) == EXIT_OK
    assert [p.name for p in tmp_path.iterdir()] == ["summary.json"]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["details"]["violations"] == []


def test_level_filter_and_timings(tmp_path):
    args = ["run", str(EXAMPLES / "heat_quick.toml"), "--out", str(tmp_path), "--level-filter", "1", "--timings"]
    assert main(args) == EXIT_OK
    assert (tmp_path / "timings.json").exists()
    assert (tmp_path / "function_1.csv").exists() and not (tmp_path / "function_0.csv").exists()
    assert main(["run", str(EXAMPLES / "heat_quick.toml"), "--out", str(tmp_path), "--level-filter", "9"]) == EXIT_CONFIG


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = str(EXAMPLES / "heat_quick.toml")
    assert main(["run", cfg, "--out", str(a)]) == EXIT_OK
    assert main(["run", cfg, "--out", str(b), "--threads", "3"]) == EXIT_OK
    for p in sorted(a.iterdir()):
        assert p.read_bytes() == (b / p.name).read_bytes(), p.name


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "chernoffkit.cli", "validate", str(EXAMPLES / "cfl_violation.toml")],
        capture_output=True, text=True,
    )
    assert proc.returncode == EXIT_CONFIG
    assert "scheme.sigma_max" in proc.stderr


def test_runtime_failure_reports_step_and_level(tmp_path, capsys, monkeypatch):
    from chernoffkit import experiments
    from chernoffkit.cli import EXIT_RUNTIME
    from chernoffkit.semigroup import StepFailure

    def boom(cfg, threads=1, level_filter=None):
        raise StepFailure(5, ArithmeticError("resolvent residual too large"), level=2)

    monkeypatch.setattr(experiments, "run_experiment", boom)
    assert main(["run", str(EXAMPLES / "heat_quick.toml"), "--out", str(tmp_path)]) == EXIT_RUNTIME
    err = capsys.readouterr().err
    assert "step 5 of level 2" in err
