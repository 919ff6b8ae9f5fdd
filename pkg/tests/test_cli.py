import io
import json

import numpy as np
import pytest

from polarimeter.cli import main
from polarimeter.experiment import Configuration, ScanSpec, run_scan
from polarimeter.figures import fit_scan
from polarimeter.scanio import CSV_HEADER, read_scan_csv, write_scan_csv


@pytest.fixture
def larmor_toml(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text('[scan]\nconfiguration = "larmor"\n')
    return p


def test_simulate(larmor_toml, capsys):
    assert main(["simulate", "--config", str(larmor_toml)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("intensity = ") and "polarization = " in out


def test_scan_deterministic_bytes(larmor_toml, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["scan", "--config", str(larmor_toml), "--seed", "42", "--counts", "1000",
                     "--out", str(path), "--quiet"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_csv_layout(larmor_toml, tmp_path):
    out = tmp_path / "s.csv"
    main(["scan", "--config", str(larmor_toml), "--out", str(out), "--quiet"])
    lines = out.read_text().splitlines()
    header_at = lines.index(CSV_HEADER)
    assert all(line.startswith("#") for line in lines[:header_at])
    echo = json.loads("\n".join(line[2:] for line in lines[1:header_at]))
    assert echo["config"]["guide_field"] == pytest.approx(1.079e-3)
    row = lines[header_at + 1].split(",")
    assert row[0] == "translator_offset" and row[3] == ""
    assert len(lines) == header_at + 1 + 81


def test_round_trip_preserves_fit():
    res = run_scan(ScanSpec(Configuration.ZERO_FIELD, counts_per_point=1000, rng_seed=9))
    buf = io.StringIO()
    write_scan_csv(res, buf, {"note": "x"})
    back = read_scan_csv(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.values, res.values) and np.array_equal(back.intensities, res.intensities)
    assert np.array_equal(back.counts, res.counts)
    f1, f2 = fit_scan(res), fit_scan(back)
    for key in ("offset", "amplitude", "k", "phase"):
        assert abs(getattr(f1, key) - getattr(f2, key)) <= 1e-12 * max(1.0, abs(getattr(f1, key)))
    assert back.metadata["rng_seed"] == 9


def test_fit_command(larmor_toml, tmp_path, capsys):
    csv = tmp_path / "s.csv"
    main(["scan", "--config", str(larmor_toml), "--out", str(csv), "--quiet"])
    rec = tmp_path / "fit.json"
    assert main(["fit", str(csv), "--out", str(rec)]) == 0
    report = dict(line.split(" = ") for line in capsys.readouterr().out.strip().splitlines())
    assert float(report["period"]) == pytest.approx(0.03162, abs=5e-6)
    assert json.loads(rec.read_text())["k"] == pytest.approx(float(report["k"]), rel=1e-15)


def test_bad_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert main(["fit", str(bad)]) == 1


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text("beamm = 1\n")
    assert main(["scan", "--config", str(p)]) == 1
    assert "beamm" in capsys.readouterr().err


def test_geometry_error_exit_code(tmp_path):
    p = tmp_path / "geo.toml"
    p.write_text('[[elements]]\ntype = "polarizer"\nposition = 0.5\n'
                 '[[elements]]\ntype = "analyzer"\nposition = 0.2\n')
    assert main(["simulate", "--config", str(p)]) == 2


def test_reproduce_fig2(tmp_path, capsys):
    out = tmp_path / "fig2"
    assert main(["reproduce-fig2", "--out", str(out), "--quiet"]) == 0
    assert (out / "regression.csv").exists() and len(list(out.glob("*.csv"))) == 12
    table = (out / "regression.csv").read_text()
    assert "theory slope = 184168" in table


def test_reproduce_fig4_noisy(tmp_path):
    assert main(["reproduce-fig4", "--counts", "1000", "--seed", "0", "--out", str(tmp_path), "--quiet"]) == 0


def test_reproduce_fig3_reports_failure(tmp_path):
    # the target zero-field law ties k to omega_R / v; the simulated flips give twice that
    assert main(["reproduce-fig3", "--out", str(tmp_path), "--quiet"]) == 3
    assert "FAIL fig3 slope" in (tmp_path / "checks.txt").read_text()


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out
