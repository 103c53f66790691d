"""Figure renderers, one per artifact kind.

Rendering is a pure function of the input files and the figure spec:
fixed fonts, sizes, and colors, no timestamps, no randomness, so
repeated runs produce pixel-identical images.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import SchemaError, read_table, square_from_pairs

RC_PARAMS = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

KINDS = ("lambda_curves", "spectrum", "covariance_heatmap", "mc_convergence", "residuals")


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input directory, figure kind, output image path."""

    input_dir: Path
    kind: str
    output: Path
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")


def _inputs(spec: FigureSpec, pattern: str) -> list[Path]:
    files = sorted(Path(spec.input_dir).glob(pattern))
    if not files:
        raise SchemaError(f"{spec.input_dir}: no files matching {pattern!r}")
    return files


def render_lambda_curves(spec: FigureSpec) -> None:
    files = _inputs(spec, "lambda*.csv")
    files = [f for f in files if "dyson" not in f.name] or files
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for path in files:
        table = read_table(path, "lambda")
        label = path.stem.replace("lambda_", "").replace("lambda", "volterra")
        ax.plot(table["t"], table["abs_lambda"], lw=1.4, label=label)
        if "abs_ref" in table:
            ax.plot(table["t"], table["abs_ref"], lw=0.8, ls="--", color="black")
    ax.set_xlabel("t")
    ax.set_ylabel("|lambda(t)|")
    ax.set_title("excited-amplitude factor (dashed: closed form)")
    ax.legend(loc="upper right", fontsize=7)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)


def render_spectrum(spec: FigureSpec) -> None:
    table = read_table(_inputs(spec, "spectrum.csv")[0], "spectrum")
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.semilogy(table["n"], table["lambda"], "o", ms=3, label="numerical")
    if "lambda_ref" in table:
        ax.semilogy(table["n"], table["lambda_ref"], lw=1.0, label="reference")
    ax.set_xlabel("mode index n")
    ax.set_ylabel("eigenvalue")
    ax.set_title("kernel eigen-spectrum")
    ax.legend(loc="upper right", fontsize=7)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)


def render_covariance_heatmap(spec: FigureSpec) -> None:
    cov = read_table(_inputs(spec, "covariance.csv")[0], "covariance")
    kern = read_table(_inputs(spec, "kernel.csv")[0], "kernel")
    times, c_re = square_from_pairs(cov["t"], cov["s"], cov["re_C"])
    _, c_im = square_from_pairs(cov["t"], cov["s"], cov["im_C"])
    _, k_re = square_from_pairs(kern["t"], kern["s"], kern["re_K"])
    _, k_im = square_from_pairs(kern["t"], kern["s"], kern["im_K"])
    estimate = c_re + 1j * c_im
    # the empirical second moment estimates conj(K) entrywise
    defect = np.abs(estimate - (k_re - 1j * k_im))
    extent = [times[0], times[-1], times[-1], times[0]]
    fig, axes = plt.subplots(1, 2, figsize=(7.4, 3.2))
    im0 = axes[0].imshow(np.abs(estimate), extent=extent, cmap="viridis")
    axes[0].set_title("|empirical covariance|")
    fig.colorbar(im0, ax=axes[0], shrink=0.85)
    im1 = axes[1].imshow(defect, extent=extent, cmap="magma")
    axes[1].set_title("|covariance - conj(K)|")
    fig.colorbar(im1, ax=axes[1], shrink=0.85)
    for ax in axes:
        ax.set_xlabel("s")
        ax.set_ylabel("t")
        ax.grid(False)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)


def render_mc_convergence(spec: FigureSpec) -> None:
    mc_files = [f for f in _inputs(spec, "rho*.csv") if "oracle" not in f.name]
    if not mc_files:
        raise SchemaError(f"{spec.input_dir}: no Monte-Carlo rho CSV")
    mc = read_table(mc_files[0], "rho")
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    sel = (mc["i"] == 0) & (mc["j"] == 0)
    t = mc["t"][sel]
    value = mc["re_rho"][sel]
    band = 5.0 * mc["stderr"][sel]
    ax.fill_between(t, value - band, value + band, alpha=0.3, label="MC 5-sigma band")
    ax.plot(t, value, lw=1.2, label="MC estimate")
    oracle_files = sorted(Path(spec.input_dir).glob("rho_oracle.csv"))
    if oracle_files:
        oracle = read_table(oracle_files[0], "rho")
        osel = (oracle["i"] == 0) & (oracle["j"] == 0)
        ax.plot(oracle["t"][osel], oracle["re_rho"][osel], ls="--", lw=1.0,
                color="black", label="microscopic oracle")
    ax.set_xlabel("t")
    ax.set_ylabel("excited population")
    ax.set_title("Monte-Carlo reduced state vs reference")
    ax.legend(loc="upper right", fontsize=7)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)


def render_residuals(spec: FigureSpec) -> None:
    table = read_table(_inputs(spec, "residuals.csv")[0], "residuals")
    fig, ax = plt.subplots(figsize=(5.6, 3.2))
    positions = np.arange(table["kind"].size)
    floor = 1e-18
    ax.bar(positions - 0.18, np.maximum(table["value"], floor), width=0.36, label="residual")
    ax.bar(positions + 0.18, np.maximum(table["threshold"], floor), width=0.36,
           alpha=0.5, label="tolerance")
    ax.set_yscale("log")
    ax.set_xticks(positions)
    ax.set_xticklabels(table["kind"], rotation=20, ha="right", fontsize=7)
    ax.set_ylabel("operator-identity residual")
    ax.set_title("identity checks vs tolerances")
    ax.legend(loc="upper right", fontsize=7)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)


RENDERERS = {
    "lambda_curves": render_lambda_curves,
    "spectrum": render_spectrum,
    "covariance_heatmap": render_covariance_heatmap,
    "mc_convergence": render_mc_convergence,
    "residuals": render_residuals,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure; raises SchemaError without writing on bad input."""
    with plt.rc_context(RC_PARAMS):
        RENDERERS[spec.kind](spec)
    return Path(spec.output)
