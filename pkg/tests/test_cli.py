"""CLI commands, scenario parsing, artifact schemas, replay."""

import filecmp
import json
import subprocess
import sys

import numpy as np
import pytest

from nmqsd.cli import main
from nmqsd.csvio import read_csv, write_csv
from nmqsd.scenarios import ScenarioError, load_scenario

JC_SCENARIO = """
[scenario]
name = jc-one-mode

[bath]
type = discrete
frequencies = 1.0
couplings = 1.0
detuning = 1.0

[system]
type = jc
initial = excited

[grid]
horizon = 2.0
points = 401

[run]
seed = 7
n_traj = 500
n_max = 2
k_max = 6
"""

MARKOV_SCENARIO = """
[scenario]
name = markov-decay

[bath]
type = markov
rate = 2.0

[system]
type = jc

[grid]
horizon = 3.0
points = 601

[run]
seed = 3
n_traj = 400
"""


@pytest.fixture
def jc_file(tmp_path):
    path = tmp_path / "jc.ini"
    path.write_text(JC_SCENARIO)
    return path


@pytest.fixture
def markov_file(tmp_path):
    path = tmp_path / "markov.ini"
    path.write_text(MARKOV_SCENARIO)
    return path


class TestScenarioParsing:
    def test_roundtrip(self, jc_file):
        scenario = load_scenario(jc_file)
        assert scenario.name == "jc-one-mode"
        spec = scenario.discrete_spec()
        assert spec.n_modes == 1 and spec.detuning == 1.0
        assert scenario.grid.n_points == 401
        assert scenario.run_int("seed") == 7

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="not found"):
            load_scenario(tmp_path / "nope.ini")

    def test_missing_section(self, tmp_path):
        path = tmp_path / "broken.ini"
        path.write_text("[scenario]\nname = x\n")
        with pytest.raises(ScenarioError, match="bath"):
            load_scenario(path)

    def test_bad_numbers(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[bath]\ntype = markov\nrate = 1\n[grid]\nhorizon = abc\npoints = 10\n")
        with pytest.raises(ScenarioError, match="grid"):
            load_scenario(path)

    def test_matrix_system(self, tmp_path):
        path = tmp_path / "mat.ini"
        path.write_text(
            "[bath]\ntype = markov\nrate = 1.0\n"
            "[system]\ntype = matrices\nhamiltonian = 0,1; 1,0\ncoupling = 0,0; 1,0\n"
            "initial = 1,0\n"
            "[grid]\nhorizon = 1.0\npoints = 11\n"
        )
        model = load_scenario(path).system_model()
        assert model.dim == 2
        assert model.hamiltonian[0, 1] == 1.0


class TestCommands:
    def test_kernel_command(self, jc_file, tmp_path):
        out = tmp_path / "out"
        assert main(["kernel", "--scenario", str(jc_file), "--out", str(out), "--quiet"]) == 0
        kernel = read_csv(out / "kernel.csv")
        # single resonant mode: K identically 1
        np.testing.assert_allclose(kernel["re_K"], 1.0, atol=1e-12)
        np.testing.assert_allclose(kernel["im_K"], 0.0, atol=1e-12)
        commutators = read_csv(out / "commutators.csv")
        assert np.all(commutators["commuting"] == 1)
        inverse = read_csv(out / "inverse_kernel.csv")
        np.testing.assert_allclose(inverse["re_G"], 1.0 / (2 * np.pi), atol=1e-12)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "kernel"
        assert set(manifest["files"]) >= {"kernel.csv", "commutators.csv"}

    def test_lambda_command_markov(self, markov_file, tmp_path):
        out = tmp_path / "lam"
        assert main(["lambda", "--scenario", str(markov_file), "--out", str(out), "--quiet"]) == 0
        lam = read_csv(out / "lambda.csv")
        np.testing.assert_allclose(lam["abs_lambda"], np.exp(-lam["t"]), atol=1e-12)
        np.testing.assert_allclose(lam["abs_ref"], lam["abs_lambda"], atol=1e-15)

    def test_mercer_command(self, jc_file, tmp_path):
        out = tmp_path / "mercer"
        assert main(["mercer", "--scenario", str(jc_file), "--out", str(out), "--quiet"]) == 0
        spectrum = read_csv(out / "spectrum.csv")
        # rank-1 constant kernel: lambda_1 = T
        assert spectrum["lambda"].size == 1
        assert abs(spectrum["lambda"][0] - 2.0) < 1e-10

    def test_sample_command_replay(self, jc_file, tmp_path):
        outs = []
        for tag in ("s1", "s2"):
            out = tmp_path / tag
            code = main(["sample", "--scenario", str(jc_file), "--out", str(out), "--quiet"])
            assert code == 0
            outs.append(out)
        for name in ("covariance.csv", "trajectories.csv", "kernel.csv"):
            assert filecmp.cmp(outs[0] / name, outs[1] / name, shallow=False)
        different = tmp_path / "s3"
        assert main(
            ["sample", "--scenario", str(jc_file), "--out", str(different), "--seed", "99", "--quiet"]
        ) == 0
        assert not filecmp.cmp(outs[0] / "trajectories.csv", different / "trajectories.csv", shallow=False)

    def test_unravel_and_oracle_agree(self, jc_file, tmp_path):
        out_mc = tmp_path / "mc"
        out_or = tmp_path / "oracle"
        assert main(["unravel", "--scenario", str(jc_file), "--out", str(out_mc), "--quiet"]) == 0
        assert main(["oracle", "--scenario", str(jc_file), "--out", str(out_or), "--quiet"]) == 0
        mc = read_csv(out_mc / "rho.csv")
        oracle = read_csv(out_or / "rho_oracle.csv")
        band = 5.0 * np.sqrt(mc["stderr"] ** 2 + 1e-6**2)
        assert np.all(np.abs(mc["re_rho"] - oracle["re_rho"]) < band)
        assert np.all(np.abs(mc["im_rho"] - oracle["im_rho"]) < band)
        leakage = read_csv(out_or / "leakage.csv")
        assert np.max(leakage["leakage"]) < 1e-6

    def test_markov_unravel(self, markov_file, tmp_path):
        out = tmp_path / "markov-mc"
        assert main(["unravel", "--scenario", str(markov_file), "--out", str(out), "--quiet"]) == 0
        rho = read_csv(out / "rho.csv")
        ee = rho["re_rho"][(rho["i"] == 0) & (rho["j"] == 0)]
        ts = rho["t"][(rho["i"] == 0) & (rho["j"] == 0)]
        np.testing.assert_allclose(ee, np.exp(-2.0 * ts), atol=1e-9)

    def test_exit_codes(self, tmp_path, jc_file, markov_file):
        # unknown command: argparse exits 2
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
        # no command
        assert main([]) == 2
        # missing scenario
        assert main(["kernel"]) == 2
        # config error
        bad = tmp_path / "bad.ini"
        bad.write_text("[bath]\ntype = nosuch\n[grid]\nhorizon = 1\npoints = 5\n")
        assert main(["kernel", "--scenario", str(bad), "--out", str(tmp_path / "x"), "--quiet"]) in (1, 2)
        # numerical failure: pointwise tabulation of a delta kernel
        assert main(
            ["kernel", "--scenario", str(markov_file), "--out", str(tmp_path / "y"), "--quiet"]
        ) == 1

    def test_console_entry_point(self, jc_file, tmp_path):
        out = tmp_path / "sub"
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "nmqsd.cli",
                "lambda",
                "--scenario",
                str(jc_file),
                "--out",
                str(out),
                "--quiet",
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert (out / "lambda.csv").exists()

    def test_output_root_env(self, jc_file, tmp_path, monkeypatch):
        monkeypatch.setenv("NMQSD_OUTPUT_ROOT", str(tmp_path / "root"))
        assert main(["lambda", "--scenario", str(jc_file), "--quiet"]) == 0
        assert (tmp_path / "root" / "jc-one-mode" / "lambda" / "lambda.csv").exists()


class TestCsvIo:
    def test_roundtrip_precision(self, tmp_path):
        values = np.array([1.0 / 3.0, np.pi, 1e-17, 123456789.123456789])
        path = write_csv(tmp_path / "x.csv", ["v"], [values])
        back = read_csv(path)["v"]
        np.testing.assert_array_equal(back, values)

    def test_lf_endings(self, tmp_path):
        path = write_csv(tmp_path / "x.csv", ["a"], [np.array([1.0])])
        raw = path.read_bytes()
        assert b"\r" not in raw

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0\n")
        with pytest.raises(ValueError, match="ragged"):
            read_csv(path)
