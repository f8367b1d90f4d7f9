import csv
import io
import json
import subprocess
import sys

import pytest

from rabi_spectra import report
from rabi_spectra.cli import EXIT_USAGE, main, read_config
from rabi_spectra.solver import scan_spectrum


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_csv_columns_and_oracle(capsys):
    code, out, _ = run(["spectrum", "--lambda", "0.7", "--mu", "1", "--x", "0:6"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == report.SPECTRUM_COLUMNS
    assert len(rows) == 11
    assert all(float(r["oracle_delta"]) < 1e-7 for r in rows)


def test_spectrum_analytic_rows(capsys):
    code, out, _ = run(["spectrum", "--lambda", "0", "--mu", "0.6", "--x", "0:4", "--format", "json"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert [r["E"] for r in rows] == [0.4, 0.6, 1.4, 1.6, 2.4, 2.6, 3.4, 3.6]
    assert {r["kind"] for r in rows} == {"analytic"}


def test_spectrum_empty_range_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--lambda", "0.7", "--mu", "1", "--x", "6:0"])
    assert exc.value.code == EXIT_USAGE


def test_unknown_suite_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "bogus"])
    assert exc.value.code == EXIT_USAGE


def test_missing_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE


def test_trace_judd_writes_curves_and_script(tmp_path, capsys):
    code, out, _ = run(["trace", "--judd", "5", "--window", "0:1.2x0:6", "--outdir", str(tmp_path)], capsys)
    assert code == 0
    assert "J_5,5," in out
    assert len(list(tmp_path.glob("J5_*.dat"))) == 5
    script = (tmp_path / "J5.gp").read_text()
    assert script.count("dt 2") == 5  # dashed, as in the figure
    assert not list(tmp_path.glob("*.png"))


def test_trace_f_reports_count(tmp_path, capsys):
    code, out, _ = run(["trace", "--f", "5", "--window", "0.001:1.2x0:8", "--outdir", str(tmp_path)], capsys)
    assert code == 0
    count = int(out.splitlines()[1].split(",")[1])
    assert count == len(list(tmp_path.glob("F5_*.dat"))) > 0


def test_trace_wronskian(tmp_path, capsys):
    code, out, _ = run(
        ["trace", "--wronskian", "5.14159265", "--window", "0:1x0:4", "--outdir", str(tmp_path), "--plot"], capsys
    )
    assert code == 0
    assert len(list(tmp_path.glob("S_*.dat"))) > 0
    assert (tmp_path / "S.png").stat().st_size > 0


def test_trace_integer_wronskian_rejected(tmp_path, capsys):
    code, _, err = run(["trace", "--wronskian", "3", "--window", "0:1x0:4", "--outdir", str(tmp_path)], capsys)
    assert code == EXIT_USAGE and "non-integer" in err


def test_config_file_overrides(tmp_path, capsys):
    cfg = tmp_path / "scan.cfg"
    cfg.write_text("# finer grid\ngrid_step = 0.01\nbracket_refiner = bisection\n")
    assert read_config(cfg) == {"grid_step": 0.01, "bracket_refiner": "bisection"}
    code, out, _ = run(["spectrum", "--lambda", "0.7", "--mu", "1", "--x", "0:2", "--config", str(cfg)], capsys)
    assert code == 0 and len(out.splitlines()) == 4


@pytest.mark.parametrize("text", ["grid_step = 0\n", "nonsense = 1\n", "grid_step = fast\n"])
def test_bad_config_is_usage_error(tmp_path, capsys, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    code, _, _ = run(["spectrum", "--lambda", "0.7", "--mu", "1", "--x", "0:2", "--config", str(cfg)], capsys)
    assert code == EXIT_USAGE


def test_output_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["spectrum", "--lambda", "0.5", "--mu", "3.75", "--x", "0:5", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    da, db = tmp_path / "da", tmp_path / "db"
    for d in (da, db):
        main(["trace", "--judd", "3", "--window", "0:1.2x0:4", "--outdir", str(d)])
    for f in sorted(da.iterdir()):
        assert f.read_bytes() == (db / f.name).read_bytes()


def test_seventeen_digits():
    assert report.fmt(0.1) == "0.10000000000000001"
    assert report.fmt(3) == "3"
    assert report.fmt(None) == ""
    rows = report.spectrum_rows(scan_spectrum(0.0, 0.6, 0.0, 1.0))
    text = report.write_rows(rows, report.SPECTRUM_COLUMNS)
    assert text.splitlines()[1].startswith("0,0.59999999999999998,0.40000000000000002,")


def test_figure_fig1a(tmp_path, capsys):
    code, out, _ = run(["figure", "fig1a", "--outdir", str(tmp_path)], capsys)
    assert code == 0
    assert int(dict(r.split(",") for r in out.splitlines()[1:])["curves"]) > 0
    assert (tmp_path / "fig1a.gp").exists()


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "rabi_spectra", "spectrum", "--lambda", "0", "--mu", "0.6", "--x", "0:1"],
        capture_output=True,
        text=True,
        cwd=tmp_path,
    )
    assert r.returncode == 0 and r.stdout.startswith("lambda,mu,x,E")
    r = subprocess.run([sys.executable, "-m", "rabi_spectra", "verify", "nope"], capture_output=True, cwd=tmp_path)
    assert r.returncode == 64
