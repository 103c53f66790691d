"""Rendering of each figure kind, determinism, and schema diagnostics."""

import filecmp
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from plotkit.cli import main
from plotkit.figures import KINDS, FigureSpec, render
from plotkit.schemas import SchemaError, read_table


def write_lines(path: Path, header: str, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


@pytest.fixture
def artifacts(tmp_path):
    """Small schema-conformant artifact directory."""
    t = np.linspace(0.0, 2.0, 21)
    lam = np.exp(-0.5 * t)
    write_lines(
        tmp_path / "lambda_markov.csv",
        "t,re_lambda,im_lambda,abs_lambda,re_ref,im_ref,abs_ref",
        zip(t, lam, 0 * t, lam, lam, 0 * t, lam),
    )
    n = np.arange(1, 9)
    write_lines(
        tmp_path / "spectrum.csv",
        "n,lambda,lambda_ref",
        zip(n, 1.0 / ((n - 0.5) * np.pi) ** 2, 1.0 / ((n - 0.5) * np.pi) ** 2),
    )
    ts = np.linspace(0, 1, 5)
    tt = np.repeat(ts, 5)
    ss = np.tile(ts, 5)
    kernel = np.cos(tt - ss)
    write_lines(
        tmp_path / "kernel.csv", "t,s,re_K,im_K", zip(tt, ss, kernel, 0 * kernel)
    )
    write_lines(
        tmp_path / "covariance.csv",
        "t,s,re_C,im_C,stderr",
        zip(tt, ss, kernel + 0.01, 0 * kernel, np.full(tt.size, 0.02)),
    )
    rows = []
    for i in range(2):
        for j in range(2):
            for k, tv in enumerate(t):
                value = np.exp(-tv) if i == j == 0 else 0.1
                rows.append((tv, i, j, value, 0.0, 0.01))
    write_lines(tmp_path / "rho_mc.csv", "t,i,j,re_rho,im_rho,stderr", rows)
    write_lines(tmp_path / "rho_oracle.csv", "t,i,j,re_rho,im_rho,stderr", rows)
    write_lines(
        tmp_path / "residuals.csv",
        "kind,t,value,threshold",
        [("io_relation", 0.5, 1e-7, 1e-5), ("ehrenfest", 0.5, 5e-7, 1e-5)],
    )
    return tmp_path


class TestRenderers:
    @pytest.mark.parametrize("kind", KINDS)
    def test_each_kind_renders(self, artifacts, tmp_path, kind):
        out = tmp_path / f"{kind}.png"
        render(FigureSpec(input_dir=artifacts, kind=kind, output=out))
        assert out.exists() and out.stat().st_size > 1000

    @pytest.mark.parametrize("kind", KINDS)
    def test_pixel_identical_repeat(self, artifacts, tmp_path, kind):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        render(FigureSpec(input_dir=artifacts, kind=kind, output=a))
        render(FigureSpec(input_dir=artifacts, kind=kind, output=b))
        assert filecmp.cmp(a, b, shallow=False)

    def test_unknown_kind_rejected(self, artifacts, tmp_path):
        with pytest.raises(SchemaError, match="unknown figure kind"):
            FigureSpec(input_dir=artifacts, kind="pie_chart", output=tmp_path / "x.png")


class TestSchemaDiagnostics:
    def test_empty_csv_error_no_file(self, tmp_path):
        (tmp_path / "spectrum.csv").write_text("")
        out = tmp_path / "fig.png"
        code = main(["spectrum", "--in", str(tmp_path), "--out", str(out)])
        assert code == 2
        assert not out.exists()

    def test_header_only_rejected(self, tmp_path):
        (tmp_path / "spectrum.csv").write_text("n,lambda\n")
        with pytest.raises(SchemaError, match="no data rows"):
            read_table(tmp_path / "spectrum.csv", "spectrum")

    def test_missing_column_named(self, tmp_path):
        (tmp_path / "spectrum.csv").write_text("n,value\n1,0.5\n")
        with pytest.raises(SchemaError) as err:
            read_table(tmp_path / "spectrum.csv", "spectrum")
        assert "lambda" in str(err.value) and "value" in str(err.value)

    def test_cli_reports_columns(self, tmp_path, capsys):
        (tmp_path / "residuals.csv").write_text("kind,value\nio,1e-7\n")
        code = main(["residuals", "--in", str(tmp_path), "--out", str(tmp_path / "r.png")])
        assert code == 2
        captured = capsys.readouterr()
        assert "threshold" in captured.err

    def test_missing_inputs(self, tmp_path):
        code = main(["spectrum", "--in", str(tmp_path), "--out", str(tmp_path / "s.png")])
        assert code == 2


@pytest.mark.skipif(shutil.which("nmqsd") is None, reason="primary CLI not installed")
class TestAgainstVerifyArtifacts:
    @pytest.fixture(scope="class")
    @staticmethod
    def verify_dir(tmp_path_factory):
        out = tmp_path_factory.mktemp("verify")
        proc = subprocess.run(
            ["nmqsd", "verify", "--out", str(out), "--quiet"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        return out

    @pytest.mark.parametrize("kind", KINDS)
    def test_five_kinds_from_verify_artifacts(self, verify_dir, tmp_path, kind):
        first = tmp_path / f"{kind}_1.png"
        second = tmp_path / f"{kind}_2.png"
        for out in (first, second):
            proc = subprocess.run(
                [
                    sys.executable,
                    "-m",
                    "plotkit.cli",
                    kind,
                    "--in",
                    str(verify_dir),
                    "--out",
                    str(out),
                ],
                capture_output=True,
                text=True,
            )
            assert proc.returncode == 0, proc.stderr
            assert out.exists()
        assert filecmp.cmp(first, second, shallow=False), f"{kind} render not reproducible"
