from __future__ import annotations

import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from geostretch.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main, parse_rpv
from test_simfinder import DELTA_MAX, ORACLE_MAXIMIZERS


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestField:
    def test_band_grid_rows(self, tmp_path):
        out = tmp_path / "field.csv"
        assert main(["field", "--grid", "0.25:2:41,0:1:41", "--band", "0.3", "--out", str(out)]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert len(lines) == 1682
        assert lines[0] == ("x,y,classical_tangent,classical_normal,classical_ratio,"
                            "geodesic_tangent,geodesic_normal,geodesic_ratio")
        meta = json.loads((tmp_path / "field.csv.meta.json").read_text())
        assert meta["config"]["band"] == 0.3 and meta["version"] and "elapsed_seconds" in meta

    def test_constant_grid(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["field", "--model", "constant", "--constant", "1,0", "--grid", "0:1:2,0:1:2",
                     "--out", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert len(rows) == 4
        for r in rows:
            for k in ("classical_tangent", "classical_normal", "geodesic_tangent", "geodesic_normal"):
                assert float(r[k]) == 0.0
            assert r["classical_ratio"] == "nan" and r["geodesic_ratio"] == "nan"

    def test_json_marks_singular(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["field", "--model", "constant", "--grid", "0:1:2,0:1:2", "--format", "json",
                     "--out", str(out)]) == EXIT_OK
        recs = json.loads(out.read_text())["records"]
        assert all(r["geodesic_ratio"] == "singular" for r in recs)

    def test_missing_out(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as info:
            main(["field", "--grid", "0:1:2,0:1:2"])
        assert info.value.code == EXIT_USAGE
        assert list(tmp_path.iterdir()) == []

    @pytest.mark.parametrize("argv", [
        ["field", "--gamma", "1.0"],
        ["field", "--grid", "1:0:4,0:1:4"],
        ["field", "--grid", "0:1:4"],
        ["field", "--model", "constant", "--band", "0.2"],
    ])
    def test_bad_config(self, tmp_path, argv):
        out = tmp_path / "x.csv"
        assert main(argv + ["--out", str(out)]) == EXIT_USAGE
        assert not out.exists()

    def test_failed_cells_not_fatal(self, tmp_path):
        out = tmp_path / "f.csv"
        # the x = 0 column lies outside the Davis-Skodje domain
        assert main(["field", "--grid", "0:1:3,0:1:3", "--out", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert all(r["classical_tangent"] == "nan" for r in rows if float(r["x"]) == 0.0)
        assert json.loads((tmp_path / "f.csv.meta.json").read_text())["failed_cells"] == 3


class TestSim:
    def test_geodesic(self, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        assert main(["sim", "--rpv", "0.25:2:0.25", "--objective", "geodesic", "--out", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert list(rows[0]) == ["rpv_value", "maximizer", "objective_value", "status",
                                 "reference_value", "abs_error"]
        assert len(rows) == 8
        for r in rows:
            assert r["status"] == "converged"
            assert float(r["abs_error"]) <= DELTA_MAX + 1e-6
            assert float(r["maximizer"]) == pytest.approx(ORACLE_MAXIMIZERS[float(r["rpv_value"])], abs=1e-6)
        assert "max_abs_error=" in capsys.readouterr().out

    def test_classical(self, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        assert main(["sim", "--objective", "classical", "--out", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert len(rows) == 8 and all(math.isfinite(float(r["abs_error"])) for r in rows)
        assert "mean_abs_error=" in capsys.readouterr().out

    def test_single_rpv(self, tmp_path):
        out = tmp_path / "one.csv"
        assert main(["sim", "--rpv", "1", "--out", str(out)]) == EXIT_OK
        assert len(read_csv(out)) == 1

    def test_explicit_bounds_and_json(self, tmp_path):
        out = tmp_path / "s.json"
        assert main(["sim", "--rpv", "1", "--fiber-bounds", "0.2:0.8", "--format", "json",
                     "--out", str(out)]) == EXIT_OK
        entry = json.loads(out.read_text())["entries"][0]
        assert entry["status"] == "converged"

    def test_bounds_required_without_reference(self, tmp_path):
        assert main(["sim", "--model", "linear", "--out", str(tmp_path / "s.csv")]) == EXIT_USAGE

    def test_parse_rpv(self):
        np.testing.assert_allclose(parse_rpv("0.25:2:0.25"), np.arange(1, 9) * 0.25)
        np.testing.assert_allclose(parse_rpv("1.5"), [1.5])
        np.testing.assert_allclose(parse_rpv("1:1:0.25"), [1.0])


class TestCheck:
    def test_davis_skodje(self, capsys):
        assert main(["check"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "FAIL" not in out and "PASS geodesic_residual" in out

    def test_constant_flat(self, capsys):
        assert main(["check", "--model", "constant"]) == EXIT_OK
        line = [ln for ln in capsys.readouterr().out.splitlines() if "flat_curvature" in ln][0]
        assert line.startswith("PASS") and "max=0.000e+00" in line

    def test_fd_path(self):
        assert main(["check", "--method", "fd"]) == EXIT_OK

    def test_negative_control(self, capsys):
        assert main(["check", "--corrupt-metric-sign"]) == EXIT_VERIFY
        out = capsys.readouterr().out
        assert [ln for ln in out.splitlines() if "metric_compatibility" in ln][0].startswith("FAIL")

    def test_json_report(self, tmp_path):
        out = tmp_path / "check.json"
        assert main(["check", "--model", "linear", "--out", str(out)]) == EXIT_OK
        assert all(c["passed"] for c in json.loads(out.read_text())["checks"])


class TestTrajectory:
    def test_davis_skodje(self, tmp_path):
        out = tmp_path / "t.csv"
        assert main(["trajectory", "--x0", "1,0.5", "--t-end", "2", "--dt", "1e-3", "--out", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert len(rows) == 2001
        t = np.array([float(r["t"]) for r in rows])
        x = np.array([float(r["x1"]) for r in rows])
        assert np.max(np.abs(x - np.exp(-t))) <= 1e-8
        assert max(float(r["geodesic_residual"]) for r in rows) <= 1e-6

    def test_single_step(self, tmp_path):
        out = tmp_path / "t.csv"
        assert main(["trajectory", "--t-end", "0.01", "--dt", "0.01", "--out", str(out)]) == EXIT_OK
        assert len(read_csv(out)) == 2

    def test_domain_error(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        assert main(["trajectory", "--x0=-0.5,0.2", "--out", str(out)]) == EXIT_NUMERIC
        assert "domain" in capsys.readouterr().err
        assert not out.exists()


class TestReproducibility:
    @pytest.mark.parametrize("argv", [
        ["field", "--grid", "0.25:2:9,0:1:7"],
        ["sim", "--rpv", "0.5:1.5:0.5"],
        ["trajectory", "--t-end", "0.5", "--dt", "0.01"],
    ])
    def test_byte_identical_and_sidecar_round_trip(self, tmp_path, argv):
        a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
        assert main(argv + ["--out", str(a)]) == EXIT_OK
        assert main(argv + ["--out", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
        assert main([argv[0], "--config", f"{a}.meta.json", "--out", str(c)]) == EXIT_OK
        assert c.read_bytes() == a.read_bytes()

    def test_console_script(self, tmp_path):
        res = subprocess.run([sys.executable, "-m", "geostretch.cli", "check", "--samples", "3"],
                             capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
