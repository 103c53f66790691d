"""Scenario files: flat INI sections describing one batch run.

A scenario fully determines a run together with the seed; the CLI echoes
it into the output manifest so any artifact can be replayed bit-exactly.

Sections::

    [scenario]  name
    [bath]      type = discrete | ohmic | lorentzian | flat | markov
                       | exponential | thermal   (+ per-type parameters)
    [system]    type = jc | matrices             (+ initial state)
    [grid]      horizon, points
    [run]       seed, n_traj, n_max, k_max, trunc_tol, ... (command-specific)
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baths import (
    ContinuumBathSpec,
    DiscreteBathSpec,
    KernelHandle,
    ThermalPair,
    discretize_continuum,
    thermal_double,
)
from .timegrid import TimeGrid
from .unravel import SystemModel


class ScenarioError(ValueError):
    """Configuration problem, reported with section/field context."""


def _parse_complex_list(text: str) -> np.ndarray:
    try:
        return np.array([complex(tok.strip().replace(" ", "")) for tok in text.split(",")])
    except ValueError as exc:
        raise ScenarioError(f"cannot parse complex list {text!r}: {exc}") from None


def _parse_float_list(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",")])
    except ValueError as exc:
        raise ScenarioError(f"cannot parse number list {text!r}: {exc}") from None


def _parse_matrix(text: str) -> np.ndarray:
    rows = [r for r in (row.strip() for row in text.split(";")) if r]
    return np.array([_parse_complex_list(row) for row in rows])


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario: bath + system + grid + run parameters."""

    name: str
    bath: dict
    system: dict
    grid: TimeGrid
    run: dict = field(default_factory=dict)

    # -- bath -----------------------------------------------------------
    def discrete_spec(self) -> DiscreteBathSpec:
        bath = self.bath
        kind = bath["type"]
        if kind in ("discrete", "thermal"):
            return DiscreteBathSpec(
                frequencies=_parse_float_list(bath["frequencies"]),
                couplings=_parse_complex_list(bath["couplings"]),
                detuning=float(bath.get("detuning", 0.0)),
            )
        if kind in ("ohmic", "lorentzian", "flat"):
            spec = self.continuum_spec()
            n_modes = int(bath["n_modes"])
            omega_max = float(bath["omega_max"])
            disc = discretize_continuum(spec, n_modes, omega_max)
            detuning = float(bath.get("detuning", 0.0))
            if detuning:
                disc = DiscreteBathSpec(disc.frequencies, disc.couplings, detuning)
            return disc
        raise ScenarioError(f"bath type {kind!r} has no discrete modes")

    def continuum_spec(self) -> ContinuumBathSpec:
        bath = self.bath
        kind = bath["type"]
        if kind == "ohmic":
            params = {"eta": float(bath["eta"]), "cutoff": float(bath["cutoff"])}
        elif kind == "lorentzian":
            params = {
                "eta": float(bath["eta"]),
                "width": float(bath["width"]),
                "center": float(bath["center"]),
            }
        elif kind == "flat":
            params = {"eta": float(bath["eta"]), "omega_max": float(bath["omega_max"])}
        else:
            raise ScenarioError(f"bath type {kind!r} is not a continuum family")
        return ContinuumBathSpec(kind, params)

    def kernel_handle(self) -> KernelHandle:
        kind = self.bath["type"]
        if kind == "markov":
            return KernelHandle.markov(float(self.bath["rate"]))
        if kind == "exponential":
            return KernelHandle.exponential(
                float(self.bath["amplitude"]), float(self.bath["decay"])
            )
        return KernelHandle.discrete(self.discrete_spec())

    def thermal_pair(self) -> ThermalPair:
        if self.bath["type"] != "thermal":
            raise ScenarioError("bath is not thermal")
        return thermal_double(self.discrete_spec(), float(self.bath["kT"]))

    # -- system ----------------------------------------------------------
    def system_model(self) -> SystemModel:
        sys = self.system
        if sys.get("type", "jc") == "jc":
            return SystemModel.jaynes_cummings(damping_rate=float(sys.get("damping_rate", 0.0)))
        ham = _parse_matrix(sys["hamiltonian"])
        coupling = _parse_matrix(sys["coupling"])
        return SystemModel(
            dim=ham.shape[0],
            hamiltonian=ham,
            coupling=coupling,
            damping_rate=float(sys.get("damping_rate", 0.0)),
        )

    def initial_state(self) -> np.ndarray:
        sys = self.system
        text = sys.get("initial", "excited")
        if text == "excited":
            return np.array([1.0, 0.0], dtype=complex)
        if text == "ground":
            return np.array([0.0, 1.0], dtype=complex)
        state = _parse_complex_list(text)
        norm = np.linalg.norm(state)
        if norm == 0:
            raise ScenarioError("initial state must be nonzero")
        return state / norm

    # -- run parameters ---------------------------------------------------
    def run_int(self, key: str, default: int | None = None) -> int:
        if key not in self.run:
            if default is None:
                raise ScenarioError(f"[run] missing required key {key!r}")
            return default
        return int(self.run[key])

    def run_float(self, key: str, default: float | None = None) -> float:
        if key not in self.run:
            if default is None:
                raise ScenarioError(f"[run] missing required key {key!r}")
            return default
        return float(self.run[key])

    def echo(self) -> dict:
        return {
            "name": self.name,
            "bath": dict(self.bath),
            "system": dict(self.system),
            "grid": {"horizon": self.grid.horizon, "points": self.grid.n_points},
            "run": dict(self.run),
        }


def load_scenario(path: str | Path) -> Scenario:
    parser = configparser.ConfigParser()
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    for section in ("bath", "grid"):
        if section not in parser:
            raise ScenarioError(f"{path}: missing [{section}] section")
    bath = dict(parser["bath"])
    if "type" not in bath:
        raise ScenarioError(f"{path}: [bath] needs a 'type' field")
    try:
        grid = TimeGrid(
            float(parser["grid"]["horizon"]), int(parser["grid"]["points"])
        )
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"{path}: [grid] needs numeric horizon/points ({exc})") from None
    return Scenario(
        name=parser.get("scenario", "name", fallback=path.stem),
        bath=bath,
        system=dict(parser["system"]) if "system" in parser else {},
        grid=grid,
        run=dict(parser["run"]) if "run" in parser else {},
    )
