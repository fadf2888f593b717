import json
import subprocess
import sys

import pytest

from cscaling.cli import run


def _json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_levi_report_schema(capsys):
    code, rep = _json(capsys, ["levi", "--domain", "ball", "--point", "1,0", "--no-timestamp"])
    assert code == 0
    assert rep["schema"] == 1 and rep["command"] == "levi"
    assert rep["result"]["classification"] == "strongly_pseudoconvex"
    assert "created" not in rep


def test_type_egg(capsys):
    code, rep = _json(capsys, ["type", "--domain", "egg", "--k", "3", "--point", "1,0", "--no-timestamp"])
    assert code == 0 and rep["result"]["finite_type"] == 6


def test_metric_closed_form(capsys):
    code, rep = _json(capsys, ["metric", "--domain", "ball", "--point", "0,0", "--xi", "1,0"])
    assert code == 0 and abs(rep["result"]["value"] - 1) < 1e-12
    assert "created" in rep


def test_usage_errors_exit_1(capsys):
    assert run(["bogus"]) == 1
    assert run([]) == 1
    assert run(["levi", "--domain", "nowhere"]) == 1
    assert run(["levi", "--domain", "egg"]) == 1          # missing --k
    assert run(["metric", "--point", "1,0"]) == 1         # boundary point
    capsys.readouterr()


def test_csv_unsupported_is_config_error(capsys):
    assert run(["levi", "--format", "csv"]) == 1
    assert "format" in capsys.readouterr().err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("command = type\ndomain = egg\nk = 2\npoint = 1,0\nno_timestamp = true\n")
    code, rep = _json(capsys, ["--config", str(cfg)])
    assert code == 0 and rep["result"]["finite_type"] == 4
    code, rep = _json(capsys, ["--config", str(cfg), "--k", "4"])
    assert rep["result"]["finite_type"] == 8


def test_config_unknown_key_named(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("command = levi\ncolour = blue\n")
    assert run(["--config", str(cfg)]) == 1
    assert "colour" in capsys.readouterr().err


def test_config_bad_value_named(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("command = levi\ntrunc = many\n")
    assert run(["--config", str(cfg)]) == 1
    assert "trunc" in capsys.readouterr().err


def test_deterministic_output(tmp_path):
    out = tmp_path / "a.json"
    runs = []
    for _ in range(2):
        assert run(["bergman", "--domain", "disc", "--trunc", "16", "--point", "0.3",
                    "--no-timestamp", "--out", str(out)]) == 0
        runs.append(out.read_bytes())
    assert runs[0] == runs[1]


def test_csv_output(tmp_path):
    out = tmp_path / "lee.csv"
    assert run(["lee", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) > 2 and "," in lines[0]


def test_plot_writes_png(tmp_path):
    out = tmp_path / "poisson.json"
    assert run(["poisson", "--out", str(out), "--no-timestamp", "--plot"]) == 0
    pngs = list(tmp_path.glob("poisson_*.png"))
    assert pngs and all(p.read_bytes()[:4] == b"\x89PNG" for p in pngs)


def test_wu_and_klembeck_verdicts(tmp_path):
    assert run(["wu", "--domain", "ball", "--point", "0,0", "--out", str(tmp_path / "w.json")]) == 0
    assert run(["klembeck", "--domain", "disc", "--out", str(tmp_path / "k.json")]) == 0
    rep = json.loads((tmp_path / "k.json").read_text())
    assert rep["verdict"] == "pass"


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cscaling.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
