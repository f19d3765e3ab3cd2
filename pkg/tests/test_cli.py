import json
import subprocess
import sys

import pytest

from duo_standby import cli
from duo_standby.cli import ConfigError, Report, load_config_file, main, parse_config, run
from duo_standby.distributions import Deterministic, Exponential

GOLDEN_TOML = """\
[model]
work1 = "exp(1.0)"
work2 = "exp(1.0)"
repair1 = "exp(1.0)"
repair2 = "exp(1.0)"
"""

MODEL = {"work1": "exp(1.0)", "work2": "exp(1.0)", "repair1": "exp(1.0)", "repair2": "exp(1.0)"}


@pytest.fixture
def golden_cfg(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(GOLDEN_TOML)
    return str(path)


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- parse_config -------------------------------------------------------------------


def test_flat_config_with_command_string():
    cfg = parse_config({**MODEL, "command": "lst"})
    assert cfg.command == "lst"
    assert cfg.model.work1 == Exponential(1.0)
    assert cfg.model.first_server == 1
    assert cfg.s == cli.DEFAULT_S_GRID


def test_command_table(tmp_path):
    path = write(tmp_path, GOLDEN_TOML + '\n[command]\nname = "simulate"\nn = 500\nseed = 9\n')
    cfg = parse_config(load_config_file(path))
    assert (cfg.command, cfg.n, cfg.seed) == ("simulate", 500, 9)


def test_negative_rate_names_the_key():
    with pytest.raises(ConfigError, match="work1"):
        parse_config({**MODEL, "work1": "exp(-1)", "command": "lst"})


def test_missing_repair2():
    model = dict(MODEL)
    del model["repair2"]
    with pytest.raises(ConfigError, match="repair2"):
        parse_config({**model, "command": "lst"})


@pytest.mark.parametrize(
    "extra, key",
    [
        ({"wrok1": "exp(1)"}, "wrok1"),
        ({"command": {"name": "lst", "tolerance": 3}}, "tolerance"),
        ({"model": {"repair3": "exp(1)"}}, "repair3"),
    ],
)
def test_unknown_keys_are_errors(extra, key):
    source = {**MODEL, "command": "lst", **extra}
    with pytest.raises(ConfigError, match=key):
        parse_config(source)


@pytest.mark.parametrize(
    "param, value",
    [("n", 0), ("n", 1.5), ("s", [-1.0]), ("p", [1.0]), ("orders", [5]), ("K", 0),
     ("sigma", -1.0), ("moment_method", "central"), ("points", True), ("workers", 0)],
)
def test_bad_parameters_name_the_key(param, value):
    with pytest.raises(ConfigError, match=param):
        parse_config(MODEL, command="lst", overrides={param: value})


def test_flags_override_file():
    cfg = parse_config({**MODEL, "command": {"name": "lst", "K": 3}},
                       overrides={"K": 7, "work2": "det(2)"})
    assert cfg.K == 7
    assert cfg.model.work2 == Deterministic(2.0)


def test_conflicting_commands():
    with pytest.raises(ConfigError, match="conflicts"):
        parse_config({**MODEL, "command": "lst"}, command="moments")


def test_no_command():
    with pytest.raises(ConfigError, match="no command"):
        parse_config(MODEL)


def test_toml_syntax_error_reports_position(tmp_path):
    path = write(tmp_path, '[model]\nwork1 = "exp(1.0)\n')
    with pytest.raises(ConfigError, match="line 2"):
        load_config_file(path)


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config_file("/nonexistent/run.toml")


# -- reports ----------------------------------------------------------------------------


def test_csv_is_stable():
    rep = Report("demo", ("a", "b", "c"), [(0.1, 2, None), (1 / 3, True, "x")])
    text = rep.to_csv()
    assert text == "a,b,c\n0.10000000000000001,2,\n0.33333333333333331,true,x\n"
    empty = Report("demo", ("a",), [])
    assert empty.to_csv() == "a\n"


@pytest.mark.parametrize("command", cli.COMMANDS)
def test_json_round_trip_for_every_command(command):
    cfg = parse_config(MODEL, command=command,
                       overrides={"n": 2000, "points": 6, "s": [0.5, 1.0], "p": [0.5]})
    _, report = run(cfg)
    again = Report.from_json(report.to_json())
    assert again == report
    assert again.to_csv() == report.to_csv()


def test_lst_row_contains_golden_value():
    _, report = run(parse_config(MODEL, command="lst", overrides={"s": [1.0]}))
    (row,) = report.rows
    assert row[:3] == (1.0, pytest.approx(0.2, abs=1e-12), pytest.approx(0.2, abs=1e-12))
    assert row[4] == 10
    assert row[5] < 1e-15  # (phi1 phi2)^10 = 36^-10: the K=10 tail is negligible here


def test_survival_report_uses_five_mttf_default():
    _, report = run(parse_config(MODEL, command="survival", overrides={"points": 4}))
    assert [r[0] for r in report.rows] == pytest.approx([0.0, 3.75, 7.5, 11.25, 15.0])
    assert report.columns == ("t", "survival", "abs_error")


def test_compare_rows_and_verdict():
    status, report = run(parse_config(MODEL, command="compare", overrides={"n": 20000, "points": 8}))
    assert status == cli.EXIT_OK
    assert report.columns == ("quantity", "point", "analytic", "mc_estimate", "mc_stderr", "z",
                              "verdict")
    kinds = [r[0] for r in report.rows]
    assert kinds.count("lst") == len(cli.DEFAULT_S_GRID)
    assert kinds.count("survival") == 8
    assert report.rows[-1] == ("overall", None, None, None, None, None, "PASS")


def test_compare_detects_a_wrong_model(monkeypatch):
    # sabotage the analytic side: it must then disagree with the simulator
    real = cli.transform.moment
    monkeypatch.setattr(cli.transform, "moment", lambda m, n, **kw: real(m, n, **kw) * 1.1)
    status, report = run(parse_config(MODEL, command="compare", overrides={"n": 20000, "points": 4}))
    assert status == cli.EXIT_FAIL
    assert report.rows[0][-1] == "FAIL"


# -- main ----------------------------------------------------------------------------------


def test_main_compare_passes(capsys, golden_cfg):
    code, out, _ = invoke(capsys, "compare", "--config", golden_cfg, "--n", "20000")
    assert code == 0
    assert out.splitlines()[-1].endswith("PASS")


def test_main_writes_out_file(capsys, golden_cfg, tmp_path):
    target = tmp_path / "lst.csv"
    code, out, _ = invoke(capsys, "lst", "--config", golden_cfg, "--s", "1", "--out", str(target))
    assert code == 0 and out == ""
    lines = target.read_text().splitlines()
    assert lines[0] == "s,lst_closed,lst_fixed_point,lst_scenario_sum,scenario_K,max_abs_dev"
    cells = lines[1].split(",")
    assert cells[0] == "1"
    assert float(cells[1]) == pytest.approx(0.2, abs=1e-15)
    assert float(cells[2]) == pytest.approx(0.2, abs=1e-15)


def test_main_json(capsys, golden_cfg):
    code, out, _ = invoke(capsys, "moments", "--config", golden_cfg, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["rows"][0] == [1, pytest.approx(3.0, abs=1e-6)]
    assert doc["meta"]["model"]["work1"] == "exp(1.0)"


def test_main_model_error_exit_3(capsys, tmp_path):
    path = write(tmp_path, GOLDEN_TOML.replace('repair1 = "exp(1.0)"', 'repair1 = "det(0)"')
                 .replace('repair2 = "exp(1.0)"', 'repair2 = "det(0)"'))
    code, out, err = invoke(capsys, "moments", "--config", path)
    assert code == 3
    assert out == ""
    record = json.loads(err.strip().splitlines()[-1])
    assert record["error"] == "non-terminating system"
    assert record["command"] == "moments"


def test_main_config_error_exit_2(capsys, tmp_path):
    path = write(tmp_path, GOLDEN_TOML.replace("exp(1.0)", "exp(-1)", 1))
    code, _, err = invoke(capsys, "lst", "--config", path)
    assert code == 2
    assert "work1" in err


def test_main_bad_flag_exit_2(capsys, golden_cfg):
    with pytest.raises(SystemExit) as exc:
        main(["lst", "--config", golden_cfg, "--s", "one"])
    assert exc.value.code == 2


def test_main_flags_only(capsys):
    code, out, _ = invoke(capsys, "lst", "--work1", "exp(1)", "--work2", "exp(1)", "--repair1",
                          "exp(1)", "--repair2", "exp(1)", "--s", "0")
    assert code == 0
    assert out.splitlines()[1].startswith("0,1,1,")


@pytest.mark.parametrize("command", ["simulate", "compare"])
def test_byte_identical_output(capsys, golden_cfg, command):
    args = [command, "--config", golden_cfg, "--n", "5000", "--seed", "3", "--points", "8"]
    first = invoke(capsys, *args)
    second = invoke(capsys, *args)
    threaded = invoke(capsys, *args, "--workers", "4")
    assert first == second == threaded


def test_console_script_module_entry(golden_cfg):
    proc = subprocess.run([sys.executable, "-m", "duo_standby.cli", "moments", "--config", golden_cfg],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("n,moment\n1,")
