import subprocess
import sys

from cbwcs import harness
from cbwcs.cli import main


def test_flops_csv(capsys):
    assert main(["flops", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "method2,48330624,47628425,41953.667,41344.119" in out
    assert "differences" not in out


def test_flops_text_reports_mismatch(capsys):
    assert main(["flops", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "method2 training summations: table 31093769, general 31060745" in out


def test_calibrate(capsys):
    assert main(["calibrate"]) == 0
    out = capsys.readouterr().out
    assert "decision index: 8 (of 16)" in out
    worst = float(out.strip().splitlines()[-1].split()[-1])
    assert worst < 1e-3


def test_simulate_writes_csv_and_plot_data(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('scenario = "single-path"\nebn0_grid = [8]\nframes = 5\n')
    out, plots = tmp_path / "ber.csv", tmp_path / "plots"
    rc = main(["simulate", "--config", str(cfg), "--out", str(out), "--frames", "1",
               "--methods", "zero,method2", "--seed", "3", "--plot-data", str(plots)])
    assert rc == 0
    records = harness.read_csv(out)
    assert [(r.method, r.ebn0_db, r.bits_total) for r in records] == [("method2", 8.0, 1052),
                                                                      ("zero", 8.0, 1052)]
    assert sorted(p.name for p in plots.iterdir()) == ["method2.dat", "zero.dat"]


def test_simulate_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("bogus = 1\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == 2
    assert "unknown config keys: bogus" in capsys.readouterr().err


def test_simulate_missing_config(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "nope.toml"), "--out", "x.csv"]) == 2


def test_console_module_entry():
    out = subprocess.run([sys.executable, "-m", "cbwcs.cli", "flops", "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith("method,products_per_frame")
