import csv
import json
import re
import subprocess
import sys

import numpy as np
import pytest

from tsfn import cli


def run(argv, tmp_path):
    return cli.main(list(argv) + ["--out-dir", str(tmp_path)])


def read_csv(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("# tsfn ")
    return list(csv.DictReader(lines[1:]))


class TestOptimize:
    def test_rosenbrock_tsfn(self, tmp_path, capsys):
        code = run(["optimize", "--objective", "rosenbrock", "--n", "2", "--method", "tsfn",
                    "--threshold", "1e-6", "--x0", "0,0", "--seed", "1"], tmp_path)
        assert code == 0
        rows = read_csv(tmp_path / "trajectory.csv")
        assert list(rows[0]) == ["iter", "f", "grad_norm", "k_used", "kappa_eff", "step_norm"]
        assert float(rows[-1]["grad_norm"]) <= 1e-8
        assert "status=converged" in capsys.readouterr().out

    def test_newton_stops_on_saddle(self, tmp_path, capsys):
        code = run(["optimize", "--objective", "morse", "--lambdas", "1,-1", "--method",
                    "newton", "--x0", "1,1"], tmp_path)
        assert code == 0
        assert "x=0,0" in capsys.readouterr().out

    def test_max_iter_exit_code(self, tmp_path):
        code = run(["optimize", "--objective", "rosenbrock", "--method", "gd", "--max-iter",
                    "3"], tmp_path)
        assert code == 2

    def test_divergence_exit_code(self, tmp_path):
        code = run(["optimize", "--objective", "rosenbrock", "--method", "gd", "--eta", "1.0",
                    "--x0", "3,3"], tmp_path)
        assert code == 3
        assert read_csv(tmp_path / "trajectory.csv")

    def test_missing_required_flag(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["optimize", "--objective", "rosenbrock"], tmp_path)
        assert exc.value.code == 64
        err = capsys.readouterr().err
        assert "usage:" in err and "--method" in err

    def test_bad_value_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["optimize", "--objective", "rosenbrock", "--method", "tsfn"], tmp_path)
        assert exc.value.code == 64
        with pytest.raises(SystemExit) as exc:
            run(["optimize", "--objective", "rosenbrock", "--method", "gd", "--x0", "1,2,3"],
                tmp_path)
        assert exc.value.code == 64

    def test_config_file_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"objective": "rosenbrock", "method": "gd", "max_iter": 2}))
        assert run(["optimize", "--config", str(cfg)], tmp_path) == 2
        assert len(read_csv(tmp_path / "trajectory.csv")) == 3
        assert run(["optimize", "--config", str(cfg), "--max-iter", "4"], tmp_path) == 2
        assert len(read_csv(tmp_path / "trajectory.csv")) == 5

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"objective": "rosenbrock", "method": "gd", "bogus": 1}))
        with pytest.raises(SystemExit) as exc:
            run(["optimize", "--config", str(cfg)], tmp_path)
        assert exc.value.code == 64


class TestMp:
    def test_square(self, tmp_path, capsys):
        assert run(["mp", "--m", "100", "--n", "100", "--samples", "1000", "--seed", "1"],
                   tmp_path) == 0
        ks = float(re.search(r"ks=([0-9.]+)", capsys.readouterr().out).group(1))
        assert ks <= 0.05
        hist = read_csv(tmp_path / "mp_histogram.csv")
        assert sum(int(r["count"]) for r in hist) == 100 * 1000
        assert len(read_csv(tmp_path / "mp_density.csv")) == 400

    def test_half_edges(self, tmp_path, capsys):
        assert run(["mp", "--m", "50", "--n", "100", "--samples", "50"], tmp_path) == 0
        out = capsys.readouterr().out
        lo, hi = map(float, re.search(r"edges=\(([0-9.]+), ([0-9.]+)\)", out).groups())
        assert lo == pytest.approx(0.0858, abs=1e-3) and hi == pytest.approx(2.9142, abs=1e-3)
        dens = read_csv(tmp_path / "mp_density.csv")
        assert float(dens[0]["lambda"]) > lo and float(dens[-1]["lambda"]) < hi

    def test_zero_samples(self, tmp_path, capsys):
        assert run(["mp", "--m", "10", "--n", "20", "--samples", "0"], tmp_path) == 0
        assert all(r["count"] == "0" for r in read_csv(tmp_path / "mp_histogram.csv"))
        assert "empty histogram" in capsys.readouterr().out


class TestQverify:
    def test_default_suite(self, tmp_path, capsys):
        assert run(["qverify"], tmp_path) == 0
        rows = read_csv(tmp_path / "qverify.csv")
        assert len(rows) == 20
        assert min(float(r["cosine"]) for r in rows) >= 0.99
        diag = read_csv(tmp_path / "qverify_diagnostics.csv")
        assert list(diag[0]) == ["instance", "stage", "k", "p_success", "pe_bits",
                                 "fidelity_to_classical"]

    def test_shots(self, tmp_path, capsys):
        assert run(["qverify", "--instances", "3", "--shots", "100000"], tmp_path) == 0
        assert "sign_agreement_rate=" in capsys.readouterr().out
        assert all(r["sign_agreement"] != "nan" for r in read_csv(tmp_path / "qverify.csv"))

    def test_circuit_mode(self, tmp_path, capsys):
        assert run(["qverify", "--mode", "circuit", "--n", "4", "--instances", "3"],
                   tmp_path) == 0
        gaps = [float(r["circuit_oracle_gap"]) for r in read_csv(tmp_path / "qverify.csv")]
        assert max(gaps) <= 1e-8

    def test_sweep(self, tmp_path):
        assert run(["qverify", "--instances", "2", "--n", "8", "--sweep", "4,8"], tmp_path) == 0
        rows = read_csv(tmp_path / "qverify_sweep.csv")
        assert sorted({r["pe_bits"] for r in rows}) == ["4", "8"]

    def test_circuit_size_limit(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["qverify", "--mode", "circuit", "--n", "32"], tmp_path)
        assert exc.value.code == 64


class TestRsvd:
    def test_table(self, tmp_path, capsys):
        assert run(["rsvd", "--m", "100", "--n", "200", "--k", "5", "--eps", "0.5", "--trials",
                    "50", "--seed", "2"], tmp_path) == 0
        summary = read_csv(tmp_path / "rsvd_summary.csv")
        assert [r["variant"] for r in summary] == ["fro_expectation", "fro_high_prob",
                                                   "spec_expectation", "spec_high_prob"]
        assert all(r["holds"] == "1" for r in summary)
        trials = read_csv(tmp_path / "rsvd.csv")
        assert len(trials) == 50
        assert list(trials[0]) == ["trial", "fro_err_sq", "opt_err_sq", "bound_rhs", "pass"]


class TestPca:
    def test_input_file(self, tmp_path, capsys):
        data = tmp_path / "data.csv"
        t = np.linspace(0, 1, 20)
        np.savetxt(data, np.column_stack([t, 2 * t, t + 1]), delimiter=",")
        assert run(["pca", "--input", str(data)], tmp_path) == 0
        assert "n90=1" in capsys.readouterr().out
        assert len(read_csv(tmp_path / "pca.csv")) == 3

    def test_bad_input_file(self, tmp_path, capsys):
        data = tmp_path / "bad.csv"
        data.write_text("1,2\n3\n")
        assert run(["pca", "--input", str(data)], tmp_path) == 3
        assert "line 2" in capsys.readouterr().err

    def test_missing_input_file(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["pca", "--input", str(tmp_path / "nope.csv")], tmp_path)
        assert exc.value.code == 64

    def test_outlier_report(self, tmp_path, capsys):
        assert run(["pca", "--synthetic", "rank=3,spike=25,dim=20,n=200", "--widths", "8,8,1"],
                   tmp_path) == 0
        rows = read_csv(tmp_path / "outliers.csv")
        assert list(rows[0]) == ["n90", "n_outliers", "widths", "seed"]
        assert rows[0]["widths"] == "8-8-1"

    def test_bad_synthetic_spec(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["pca", "--synthetic", "rank=3,colour=blue"], tmp_path)
        assert exc.value.code == 64

    @pytest.mark.xfail(strict=True, reason="the planted spikes carry 62% of the variance; "
                       "n90 is about 33 at this sample size")
    def test_synthetic_small_count(self, tmp_path, capsys):
        assert run(["pca", "--synthetic", "rank=3,spike=25,dim=50,n=500"], tmp_path) == 0
        n90 = int(re.search(r"n90=(\d+)", capsys.readouterr().out).group(1))
        assert 3 <= n90 <= 5


class TestOutputs:
    def test_deterministic_bytes(self, tmp_path):
        argv = ["rsvd", "--m", "20", "--n", "30", "--k", "2", "--eps", "0.5", "--c", "40",
                "--trials", "30", "--seed", "7"]
        run(argv, tmp_path)
        first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        run(argv, tmp_path)
        second = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert first == second

    def test_header_records_invocation_and_seed(self, tmp_path):
        run(["mp", "--m", "5", "--n", "10", "--samples", "2", "--seed", "9"], tmp_path)
        for name in ("mp_density.csv", "mp_histogram.csv"):
            head = (tmp_path / name).read_text().splitlines()[0]
            assert head.startswith("# tsfn mp --m 5 --n 10 --samples 2 --seed 9")
            assert head.endswith("seed=9")

    def test_env_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TSFN_OUT_DIR", str(tmp_path / "env"))
        assert cli.main(["mp", "--m", "5", "--n", "10", "--samples", "1"]) == 0
        assert (tmp_path / "env" / "mp_density.csv").exists()

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "tsfn.cli", "mp", "--m", "4", "--n", "8",
                               "--samples", "1", "--out-dir", str(tmp_path)],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and "edges=" in proc.stdout
        proc = subprocess.run([sys.executable, "-m", "tsfn.cli", "frobnicate"],
                              capture_output=True, text=True)
        assert proc.returncode == 64
