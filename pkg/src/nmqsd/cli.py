"""Batch command-line front door.

    nmqsd <command> --scenario <file> --out <dir> [--seed N] [--threads N] [--quiet]

Commands: kernel, mercer, sample, lambda, unravel, oracle, verify.
Exit codes: 0 success, 1 numerical failure, 2 usage or config error.
``NMQSD_OUTPUT_ROOT`` sets the default output root when --out is omitted.
Every run writes a manifest.json allowing bit-exact replay; CSV bodies
are deterministic functions of (scenario, seed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .baths import (
    KernelHandle,
    inverse_kernel_eval,
    kernel_matrix,
    quadrature_commutators,
)
from .csvio import write_csv, write_manifest
from .fock_oracle import FockTruncation, propagate_total, reduced_density
from .jaynes_cummings import dyson_partial_sum, solve_lambda_volterra
from .mercer import mercer_decompose
from .sampling import empirical_covariance, sample_trajectory_batch
from .scenarios import Scenario, ScenarioError, load_scenario
from .timegrid import TimeGrid
from .unravel import JcNonMarkov, MarkovUnravelling, mc_reduced_state
from .verify import run_all_checks

COMMANDS = ("kernel", "mercer", "sample", "lambda", "unravel", "oracle", "verify")

MAX_TABLE_POINTS = 128


def _subsampled(grid: TimeGrid) -> np.ndarray:
    stride = max(1, (grid.n_points - 1) // MAX_TABLE_POINTS)
    return grid.points[::stride]


def _pair_columns(times: np.ndarray):
    return np.repeat(times, times.size), np.tile(times, times.size)


def cmd_kernel(scenario: Scenario, out: Path, seed: int, threads: int, quiet: bool) -> list[Path]:
    files = []
    times = _subsampled(scenario.grid)
    tt, ss = _pair_columns(times)
    bath_type = scenario.bath["type"]
    if bath_type == "thermal":
        pair = scenario.thermal_pair()
        for tag, spec in (("1", pair.spec1), ("2", pair.spec2)):
            kmat = kernel_matrix(KernelHandle.discrete(spec), times)
            files.append(
                write_csv(
                    out / f"kernel{tag}.csv",
                    ["t", "s", "re_K", "im_K"],
                    [tt, ss, kmat.real.ravel(), kmat.imag.ravel()],
                )
            )
        return files
    handle = scenario.kernel_handle()
    if not handle.pointwise:
        raise ValueError("delta kernel not pointwise evaluable")
    kmat = kernel_matrix(handle, times)
    files.append(
        write_csv(
            out / "kernel.csv",
            ["t", "s", "re_K", "im_K"],
            [tt, ss, kmat.real.ravel(), kmat.imag.ravel()],
        )
    )
    xx = 0.5j * kmat.imag
    xy = kmat.real / 2j
    commuting = (np.abs(kmat.imag) <= 1e-12).astype(int)
    files.append(
        write_csv(
            out / "commutators.csv",
            ["t", "s", "re_xx", "im_xx", "re_xy", "im_xy", "commuting"],
            [tt, ss, xx.real.ravel(), xx.imag.ravel(), xy.real.ravel(), xy.imag.ravel(), commuting.ravel()],
        )
    )
    if bath_type == "discrete":
        spec = scenario.discrete_spec()
        if np.all(np.abs(spec.couplings) > 0):
            gmat = inverse_kernel_eval(spec, times[:, None], times[None, :])
            files.append(
                write_csv(
                    out / "inverse_kernel.csv",
                    ["t", "s", "re_G", "im_G"],
                    [tt, ss, gmat.real.ravel(), gmat.imag.ravel()],
                )
            )
    return files


def cmd_mercer(scenario: Scenario, out: Path, seed: int, threads: int, quiet: bool) -> list[Path]:
    handle = scenario.kernel_handle()
    trunc_tol = scenario.run_float("trunc_tol", 1e-10)
    basis = mercer_decompose(handle, scenario.grid, trunc_tol)
    n_idx = np.arange(1, basis.rank + 1)
    files = [write_csv(out / "spectrum.csv", ["n", "lambda"], [n_idx, basis.eigenvalues])]
    times = scenario.grid.points
    stride = max(1, (times.size - 1) // MAX_TABLE_POINTS)
    keep = min(basis.rank, scenario.run_int("n_eigenfunctions", 8))
    cols_n, cols_t, cols_re, cols_im = [], [], [], []
    for n in range(keep):
        cols_n.append(np.full(times[::stride].size, n + 1))
        cols_t.append(times[::stride])
        cols_re.append(basis.eigenfunctions[n].real[::stride])
        cols_im.append(basis.eigenfunctions[n].imag[::stride])
    files.append(
        write_csv(
            out / "eigenfunctions.csv",
            ["n", "t", "re_phi", "im_phi"],
            [np.concatenate(c) for c in (cols_n, cols_t, cols_re, cols_im)],
        )
    )
    return files


def cmd_sample(scenario: Scenario, out: Path, seed: int, threads: int, quiet: bool) -> list[Path]:
    spec = scenario.discrete_spec()
    n_traj = scenario.run_int("n_traj", 1000)
    coarse = TimeGrid(scenario.grid.horizon, min(scenario.grid.n_points, 33))
    batch = sample_trajectory_batch(spec, coarse, n_traj, seed)
    mean, stderr = empirical_covariance(batch)
    tt, ss = _pair_columns(coarse.points)
    files = [
        write_csv(
            out / "covariance.csv",
            ["t", "s", "re_C", "im_C", "stderr"],
            [tt, ss, mean.real.ravel(), mean.imag.ravel(), stderr.ravel()],
        )
    ]
    kmat = kernel_matrix(KernelHandle.discrete(spec), coarse.points)
    files.append(
        write_csv(
            out / "kernel.csv",
            ["t", "s", "re_K", "im_K"],
            [tt, ss, kmat.real.ravel(), kmat.imag.ravel()],
        )
    )
    n_show = min(n_traj, scenario.run_int("n_show", 8))
    files.append(
        write_csv(
            out / "trajectories.csv",
            ["index", "t", "re_zeta", "im_zeta"],
            [
                np.repeat(np.arange(n_show), coarse.n_points),
                np.tile(coarse.points, n_show),
                batch[:n_show].real.ravel(),
                batch[:n_show].imag.ravel(),
            ],
        )
    )
    return files


def cmd_lambda(scenario: Scenario, out: Path, seed: int, threads: int, quiet: bool) -> list[Path]:
    handle = scenario.kernel_handle()
    grid = scenario.grid
    lam = solve_lambda_volterra(handle, grid)
    header = ["t", "re_lambda", "im_lambda", "abs_lambda"]
    cols = [grid.points, lam.values.real, lam.values.imag, np.abs(lam.values)]
    ref = None
    if handle.kind == "markov":
        ref = np.exp(-0.5 * handle.rate * grid.points)
    elif handle.kind == "discrete" and handle.spec.n_modes == 1:
        shifted = handle.spec.shifted_frequencies[0]
        if abs(shifted) < 1e-12:
            ref = np.cos(np.abs(handle.spec.couplings[0]) * grid.points)
    elif handle.kind == "exponential":
        disc = np.emath.sqrt(handle.decay**2 / 4.0 - handle.amplitude)
        if abs(disc) > 1e-14:
            ref = np.exp(-0.5 * handle.decay * grid.points) * (
                np.cosh(disc * grid.points)
                + (0.5 * handle.decay / disc) * np.sinh(disc * grid.points)
            )
    if ref is not None:
        header += ["re_ref", "im_ref", "abs_ref"]
        ref = np.asarray(ref, dtype=complex)
        cols += [ref.real, ref.imag, np.abs(ref)]
    files = [write_csv(out / "lambda.csv", header, cols)]
    k_max = scenario.run_int("k_max", 8)
    dyson = dyson_partial_sum(handle, grid, k_max)
    files.append(
        write_csv(
            out / "lambda_dyson.csv",
            ["t", "re_lambda", "im_lambda", "abs_lambda"],
            [grid.points, dyson.values.real, dyson.values.imag, np.abs(dyson.values)],
        )
    )
    return files


def _rho_columns(grid: TimeGrid, matrices: np.ndarray, stderr: np.ndarray):
    dim = matrices.shape[1]
    ts, iis, jjs, res, ims, errs = [], [], [], [], [], []
    for i in range(dim):
        for j in range(dim):
            ts.append(grid.points)
            iis.append(np.full(grid.n_points, i))
            jjs.append(np.full(grid.n_points, j))
            res.append(matrices[:, i, j].real)
            ims.append(matrices[:, i, j].imag)
            errs.append(stderr[:, i, j])
    return [np.concatenate(c) for c in (ts, iis, jjs, res, ims, errs)]


def cmd_unravel(scenario: Scenario, out: Path, seed: int, threads: int, quiet: bool) -> list[Path]:
    grid = scenario.grid
    n_traj = scenario.run_int("n_traj", 1000)
    if scenario.bath["type"] == "markov":
        from dataclasses import replace

        model = scenario.system_model()
        if model.damping_rate == 0.0:
            model = replace(model, damping_rate=float(scenario.bath["rate"]))
        route = MarkovUnravelling(model)
    else:
        spec = scenario.discrete_spec()
        lam = solve_lambda_volterra(KernelHandle.discrete(spec), grid)
        route = JcNonMarkov(spec, lam)
    series = mc_reduced_state(
        route, scenario.initial_state(), n_traj, seed, grid, n_threads=threads
    )
    files = [
        write_csv(
            out / "rho.csv",
            ["t", "i", "j", "re_rho", "im_rho", "stderr"],
            _rho_columns(grid, series.matrices, series.stderr),
        ),
        write_csv(
            out / "norm.csv",
            ["t", "mean_norm", "stderr"],
            [grid.points, series.norm_mean, series.norm_stderr],
        ),
    ]
    return files


def cmd_oracle(scenario: Scenario, out: Path, seed: int, threads: int, quiet: bool) -> list[Path]:
    spec = scenario.discrete_spec()
    model = scenario.system_model()
    trunc = FockTruncation(
        n_max=scenario.run_int("n_max", 2),
        mode_count=spec.n_modes,
        system_dim=model.dim,
    )
    grid = scenario.grid
    leak_tol = scenario.run_float("leak_tol", 1e-6)
    states, leakage = propagate_total(
        model, spec, trunc, scenario.initial_state(), grid, leak_tol=leak_tol
    )
    rho = np.array([reduced_density(states[i], model.dim) for i in range(grid.n_points)])
    files = [
        write_csv(
            out / "rho_oracle.csv",
            ["t", "i", "j", "re_rho", "im_rho", "stderr"],
            _rho_columns(grid, rho, np.zeros((grid.n_points, model.dim, model.dim))),
        ),
        write_csv(out / "leakage.csv", ["t", "leakage"], [grid.points, leakage]),
    ]
    return files


def cmd_verify(scenario, out: Path, seed: int, threads: int, quiet: bool) -> list[Path]:
    results = run_all_checks(out, quiet=quiet)
    report = {
        "checks": {
            r.name: {"passed": r.passed, "detail": r.detail, "elapsed_s": round(r.elapsed, 3)}
            for r in results
        },
        "all_passed": all(r.passed for r in results),
    }
    path = out / "report.json"
    with open(path, "w", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not report["all_passed"]:
        raise ValueError("verification failed; see report.json")
    return sorted(p for p in out.iterdir() if p.suffix == ".csv")


HANDLERS = {
    "kernel": cmd_kernel,
    "mercer": cmd_mercer,
    "sample": cmd_sample,
    "lambda": cmd_lambda,
    "unravel": cmd_unravel,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmqsd",
        description="Batch runner for non-Markovian quantum state diffusion computations.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--scenario", help="scenario file (INI)", default=None)
        p.add_argument("--out", help="output directory", default=None)
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--threads", type=int, default=1, help="worker-thread cap")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2

    scenario = None
    if args.command != "verify":
        if args.scenario is None:
            print(f"nmqsd {args.command}: --scenario is required", file=sys.stderr)
            return 2
        try:
            scenario = load_scenario(args.scenario)
        except ScenarioError as exc:
            print(f"nmqsd: config error: {exc}", file=sys.stderr)
            return 2

    if args.out is not None:
        out = Path(args.out)
    else:
        root = Path(os.environ.get("NMQSD_OUTPUT_ROOT", "."))
        name = scenario.name if scenario is not None else "verify"
        out = root / name / args.command
    out.mkdir(parents=True, exist_ok=True)

    seed = args.seed
    if seed is None and scenario is not None:
        seed = scenario.run_int("seed", 0)
    if seed is None:
        seed = 0

    try:
        files = HANDLERS[args.command](scenario, out, seed, max(1, args.threads), args.quiet)
    except ScenarioError as exc:
        print(f"nmqsd: config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"nmqsd: {exc}", file=sys.stderr)
        return 1

    manifest_payload = {
        "command": args.command,
        "seed": seed,
        "scenario": scenario.echo() if scenario is not None else None,
        "threads": args.threads,
    }
    write_manifest(out, manifest_payload, list(files))
    if not args.quiet:
        print(f"wrote {len(files)} artifact(s) to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
