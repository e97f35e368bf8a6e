"""End-to-end command-line interface and artifact contracts."""

import json
import math

import numpy as np
import pytest

from tubeflood import cli
from tubeflood.measures import Measure

ATOM_CONFIG = {
    "measure": {"atoms": [{"L": 1.0, "S": 1.0}], "pieces": []},
    "kappa": 0.5,
    "alpha_max": 2.0,
    "n_samples": 101,
}


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, data


class TestForward:
    def test_endpoint_row(self, tmp_path):
        config = write_json(tmp_path / "m.json", ATOM_CONFIG)
        out = tmp_path / "curve.csv"
        assert cli.main(["forward", config, "--out", str(out)]) == 0
        header, data = read_csv(out)
        assert header == ["alpha", "Vw", "Vo", "total", "water_cut"]
        assert data[-1, header.index("total")] == pytest.approx(5.5, abs=1e-12)
        assert data[-1, header.index("Vw")] == pytest.approx(4.5, abs=1e-12)

    def test_flag_overrides_config(self, tmp_path):
        config = write_json(tmp_path / "m.json", ATOM_CONFIG)
        out = tmp_path / "curve.csv"
        assert cli.main(["forward", config, "--n-samples", "11", "--out", str(out)]) == 0
        _, data = read_csv(out)
        assert data.shape[0] == 11

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli.main(["forward", str(bad), "--out", str(tmp_path / "x.csv")]) == 2

    def test_zero_measure(self, tmp_path):
        config = write_json(
            tmp_path / "zero.json",
            {"measure": {"atoms": [], "pieces": []}, "kappa": 0.5,
             "alpha_max": 2.0, "n_samples": 11},
        )
        assert cli.main(["forward", config]) == 2

    def test_missing_option(self, tmp_path):
        config = write_json(
            tmp_path / "m.json", {"measure": ATOM_CONFIG["measure"], "kappa": 0.5}
        )
        assert cli.main(["forward", config, "--n-samples", "11"]) == 2


class TestInvert:
    @pytest.fixture
    def curve_csv(self, tmp_path):
        config = write_json(tmp_path / "m.json", ATOM_CONFIG)
        out = tmp_path / "curve.csv"
        assert cli.main(["forward", config, "--out", str(out)]) == 0
        return out

    def test_round_trip_exit_and_diagnostics(self, tmp_path, curve_csv):
        out = tmp_path / "rec.csv"
        diag = tmp_path / "diag.json"
        code = cli.main([
            "invert", str(curve_csv), "--kappa", "0.5", "--alpha-max", "2",
            "--n-grid", "501", "--out", str(out), "--diagnostics", str(diag),
        ])
        assert code == 0
        header, data = read_csv(out)
        assert header == ["alpha", "V", "Phi", "f"]
        diagnostics = json.loads(diag.read_text())
        assert diagnostics["converged"]
        assert diagnostics["iterations"] <= 60
        assert diagnostics["residual"] <= 2 * diagnostics["tol"]
        # Phi jumps from 0 to about S/L = 1 across the atom at alpha = 1
        grid = data[:, 0]
        phi = data[:, 2]
        assert np.max(np.abs(phi[grid <= 0.9])) <= 0.05
        assert np.max(np.abs(phi[grid >= 1.1] - 1.0)) <= 0.05

    def test_convergence_failure_exit_code(self, tmp_path, curve_csv):
        code = cli.main([
            "invert", str(curve_csv), "--kappa", "0.5", "--alpha-max", "2",
            "--n-grid", "301", "--max-iter", "2", "--tol", "1e-14",
            "--out", str(tmp_path / "r.csv"),
        ])
        assert code == 3

    def test_lipschitz_violation_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("total,water\n0.0,0.0\n1.0,0.9\n2.0,2.1\n")
        assert cli.main(["invert", str(bad), "--kappa", "0.5", "--alpha-max", "2"]) == 4

    def test_malformed_csv_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("total,water\n0.0,zero\n1.0,0.5\n")
        assert cli.main(["invert", str(bad), "--kappa", "0.5", "--alpha-max", "2"]) == 2

    def test_missing_column_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n0.0,0.0\n1.0,0.5\n")
        assert cli.main(["invert", str(bad), "--kappa", "0.5", "--alpha-max", "2"]) == 2


class TestTubes:
    def test_two_tube_csv(self, tmp_path):
        config = write_json(
            tmp_path / "t.json",
            {
                "tubes": [{"L": 1.0, "S": 1.0}, {"L": 2.0, "S": 1.0}],
                "kappa": 0.5,
                "pump": {"breakpoints": [0.0], "c": [1.0]},
                "t_max": 3.0,
                "n_steps": 5,
            },
        )
        out = tmp_path / "tubes.csv"
        assert cli.main(["tubes", str(config), "--out", str(out)]) == 0
        header, data = read_csv(out)
        assert header == ["t", "F", "Vw", "Vo", "l_1", "l_2"]
        # row at t = 0.75: first tube exactly at breakthrough
        row = data[1]
        assert row[0] == pytest.approx(0.75)
        assert row[header.index("l_1")] == pytest.approx(1.0, abs=1e-12)
        expected_l2 = (2.0 - math.sqrt(4.0 - 0.75)) / 0.5
        assert row[header.index("l_2")] == pytest.approx(expected_l2, abs=1e-12)
        assert row[header.index("Vo")] == pytest.approx(1.0 + expected_l2, abs=1e-12)
        assert data[-1, header.index("Vo")] == pytest.approx(3.0, abs=1e-12)

    def test_invalid_config(self, tmp_path):
        config = write_json(tmp_path / "t.json", {"tubes": []})
        assert cli.main(["tubes", str(config)]) == 2


class TestStability:
    def test_perturbation_mode(self, tmp_path, capsys):
        config = write_json(
            tmp_path / "m.json",
            {
                "measure": {"atoms": [{"L": 4.0, "S": 1.0}, {"L": 7.0, "S": 0.5}]},
                "kappa": 0.5,
                "alpha_max": 10.0,
                "n_samples": 801,
            },
        )
        code = cli.main(["stability", config, "--n-grid", "301"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["bound_constant"] == pytest.approx(18.5)
        assert report["v_diff"] <= report["bound"]

    def test_curve_mode(self, tmp_path, capsys):
        config = write_json(tmp_path / "m.json", ATOM_CONFIG)
        curve = tmp_path / "c.csv"
        assert cli.main(["forward", config, "--out", str(curve)]) == 0
        code = cli.main([
            "stability", "--curve1", str(curve), "--curve2", str(curve),
            "--kappa", "0.5", "--alpha-max", "2", "--n-grid", "301",
        ])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["delta"] == 0.0
        assert report["v_diff"] == 0.0

    def test_requires_input(self):
        assert cli.main(["stability"]) == 2


class TestMc:
    def test_csv_and_summary(self, tmp_path, capsys):
        out = tmp_path / "mc.csv"
        code = cli.main([
            "mc", "--trials", "15", "--seed", "3", "--n-grid", "401",
            "--out", str(out),
        ])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        header, data = read_csv(out)
        assert header == ["seed", "n1", "n2", "v1max", "v2max", "accepted", "c"]
        assert data.shape[0] == 15
        assert summary["trials"] == 15
        accepted = data[:, header.index("accepted")] == 1.0
        assert summary["accepted"] == int(np.sum(accepted))
        assert np.all(data[accepted, header.index("c")] > 0)
        assert np.all(np.isnan(data[~accepted, header.index("c")]))

    def test_byte_identical_reruns(self, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        args = ["mc", "--trials", "10", "--seed", "5", "--n-grid", "401"]
        assert cli.main(args + ["--out", str(out1)]) == 0
        assert cli.main(args + ["--out", str(out2), "--jobs", "3"]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestAmbiguity:
    def test_report(self, capsys):
        code = cli.main(["ambiguity", "--alpha0", "2", "--k", "1.2", "--kappa", "0.5"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["gap"] > 0
        assert 0.5 <= report["gap_over_estimate"] <= 2.0

    def test_invalid_factor(self):
        assert cli.main(["ambiguity", "--alpha0", "2", "--k", "1.6"]) == 2


class TestRoundtripPipeline:
    def test_uniform_density(self):
        mu = Measure(pieces=((3.0, 9.0, 1.0),))
        report = cli.pipeline_roundtrip(
            mu, 0.5, 10.0, n_samples=2001,
            config=cli.inverse.RecoveryConfig(n_grid=1001),
            density_window=(3.5, 8.5),
        )
        assert report["v_sup_error"] <= 1e-5 * report["v_max"]
        assert report["phi_linf_error"] <= 5e-3 * report["phi_end"]
        assert report["f_linf_error"] <= 0.05

    def test_atomic_measure_jump(self):
        mu = Measure(atoms=((1.0, 1.0),))
        report = cli.pipeline_roundtrip(
            mu, 0.5, 2.0, n_samples=2001,
            config=cli.inverse.RecoveryConfig(n_grid=1001),
        )
        assert report["v_sup_error"] <= 1e-5 * report["v_max"]

    def test_zero_measure_rejected(self):
        with pytest.raises(cli.ArgumentError):
            cli.pipeline_roundtrip(Measure(), 0.5, 10.0)

    def test_density_needs_pieces(self):
        with pytest.raises(cli.ArgumentError):
            cli.pipeline_roundtrip(
                Measure(atoms=((1.0, 1.0),)), 0.5, 2.0, n_samples=501,
                config=cli.inverse.RecoveryConfig(n_grid=301),
                density_window=(0.5, 1.5),
            )
