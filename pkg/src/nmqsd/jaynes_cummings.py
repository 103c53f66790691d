"""Exact two-level (Jaynes-Cummings) dynamics driven by a bath kernel.

In the interaction picture the excited-state amplitude factor lambda(t)
obeys the Volterra integro-differential equation

    lambda'(t) = - int_0^t K(t, u) lambda(u) du,    lambda(0) = 1,

and the per-trajectory state is the closed form

    Psi_t(zeta) = phi + <e|phi> ( (lambda(t) - 1) |e>
                                  + (int_0^t zeta_u lambda(u) du) |g> ).

lambda also equals the alternating Dyson series sum_k (-1)^k I_k(t) with
I_0 = 1 and I_{k+1}'(t) = int_0^t K(t, u) I_k(u) du.  For the delta
kernel gamma*delta(t-s) the terms collapse to I_k = (gamma t / 2)^k / k!
and lambda = exp(-gamma t / 2).

State vectors use the ordering [excited, ground].

Numerics: quadratures are trapezoidal with a Gregory first-difference
end correction, and time stepping is one predictor-corrector sweep.
The scheme is globally second order; the end correction halves the
phase-error constant relative to the plain trapezoidal rule (measured
on the resonant-mode cosine solution).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .baths import KernelHandle, kernel_eval
from .sampling import ComplexTrajectory
from .timegrid import TimeGrid

__all__ = [
    "EXCITED",
    "GROUND",
    "LambdaSolution",
    "JcTrajectoryState",
    "solve_lambda_volterra",
    "dyson_partial_sum",
    "dyson_terms",
    "jc_state",
    "jc_state_series",
    "jc_propagator",
    "gateaux_state_derivative",
    "ds_residual",
    "norm_conservation_defect",
]

EXCITED, GROUND = 0, 1


@dataclass(frozen=True)
class LambdaSolution:
    """lambda(t) on a grid plus a tag recording how it was computed.

    lambda(0) = 1 always; |lambda| <= 1 holds for converged solutions
    (Dyson partial sums may exceed it at large t).
    """

    grid: TimeGrid
    values: np.ndarray
    method: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.size != self.grid.n_points:
            raise ValueError("values length must match grid")
        if abs(values[0] - 1.0) > 1e-12:
            raise ValueError("lambda(0) must be 1")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class JcTrajectoryState:
    """Amplitudes (c_e, c_g) per grid point for one trajectory."""

    grid: TimeGrid
    amplitudes: np.ndarray  # shape (n_points, 2)
    initial: np.ndarray  # shape (2,)


def _lag_table(handle: KernelHandle, grid: TimeGrid) -> np.ndarray:
    """K(lag) at lags 0, h, 2h, ...; all handle kinds are stationary."""
    return np.asarray(kernel_eval(handle, grid.points, 0.0), dtype=complex)


def _gregory_weights(i: int, h: float) -> np.ndarray:
    """Quadrature weights over nodes 0..i: trapezoid + end correction."""
    w = np.full(i + 1, h)
    w[0] = w[-1] = 0.5 * h
    if i >= 3:
        # int f = trap - (h/12) * ((f_i - f_{i-1}) - (f_1 - f_0))
        w[-1] -= h / 12.0
        w[-2] += h / 12.0
        w[1] -= h / 12.0
        w[0] += h / 12.0
    return w


def solve_lambda_volterra(
    handle: KernelHandle, grid: TimeGrid, endpoint_check: float | None = None
) -> LambdaSolution:
    """Second-order product integration of the memory equation.

    The markov kind dispatches to the closed form exp(-gamma t / 2).
    When ``endpoint_check`` is given, the equation is re-solved at half
    the step; if the endpoint moves by more than 10x the requested
    tolerance the step size is rejected.
    """
    if handle.kind == "markov":
        values = np.exp(-0.5 * handle.rate * grid.points)
        return LambdaSolution(grid=grid, values=values, method="closed_form")

    lam = _volterra_values(handle, grid)
    if endpoint_check is not None:
        fine = _volterra_values(handle, grid.refined(2))
        if abs(fine[-1] - lam[-1]) > 10.0 * endpoint_check:
            raise ValueError("step size too large")
    return LambdaSolution(grid=grid, values=lam, method="volterra")


def _volterra_values(handle: KernelHandle, grid: TimeGrid) -> np.ndarray:
    n, h = grid.n_points, grid.step
    table = _lag_table(handle, grid)
    lam = np.empty(n, dtype=complex)
    lam[0] = 1.0
    force = np.empty(n, dtype=complex)
    force[0] = 0.0

    def memory(i: int) -> complex:
        # integral of K(t_i, u) lambda(u) over [0, t_i]; the kernel row is
        # the reversed prefix of the stationary lag table
        row = table[i::-1]
        return np.dot(_gregory_weights(i, h), row * lam[: i + 1])

    for i in range(n - 1):
        lam[i + 1] = lam[i] + h * force[i]  # predictor
        f_pred = -memory(i + 1)
        lam[i + 1] = lam[i] + 0.5 * h * (force[i] + f_pred)  # corrector
        force[i + 1] = -memory(i + 1)
    return lam


def dyson_partial_sum(handle: KernelHandle, grid: TimeGrid, k_max: int) -> LambdaSolution:
    """Alternating partial sum sum_{k<=k_max} (-1)^k I_k(t).

    I_k is built iteratively: one memory quadrature J_k(t) =
    int_0^t K(t, u) I_k(u) du followed by a cumulative integral
    I_{k+1} = int_0^t J_k.  The markov kind uses the closed form
    I_k = (gamma t / 2)^k / k! (the t^k factor is required for the
    partial sums to converge to exp(-gamma t / 2)).
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    if handle.kind == "markov":
        x = 0.5 * handle.rate * grid.points
        partial = sum((-x) ** k / factorial(k) for k in range(k_max + 1))
        return LambdaSolution(
            grid=grid, values=np.asarray(partial, dtype=complex), method=f"dyson({k_max})"
        )

    n, h = grid.n_points, grid.step
    table = _lag_table(handle, grid)
    term = np.ones(n, dtype=complex)  # I_0
    partial = term.copy()
    for k in range(1, k_max + 1):
        rate = np.empty(n, dtype=complex)
        rate[0] = 0.0
        for i in range(1, n):
            rate[i] = np.dot(_gregory_weights(i, h), table[i::-1] * term[: i + 1])
        term = grid.cumulative(rate)
        partial += (-1) ** k * term
    return LambdaSolution(grid=grid, values=partial, method=f"dyson({k_max})")


def dyson_terms(handle: KernelHandle, grid: TimeGrid, k_max: int) -> list[np.ndarray]:
    """The individual I_k tabulations, k = 0..k_max (diagnostic helper)."""
    if handle.kind == "markov":
        x = 0.5 * handle.rate * grid.points
        return [x**k / factorial(k) for k in range(k_max + 1)]
    n, h = grid.n_points, grid.step
    table = _lag_table(handle, grid)
    terms = [np.ones(n, dtype=complex)]
    for _ in range(k_max):
        rate = np.empty(n, dtype=complex)
        rate[0] = 0.0
        prev = terms[-1]
        for i in range(1, n):
            rate[i] = np.dot(_gregory_weights(i, h), table[i::-1] * prev[: i + 1])
        terms.append(grid.cumulative(rate))
    return terms


def _check_shared_grid(lam: LambdaSolution, zeta: ComplexTrajectory):
    if (lam.grid.horizon, lam.grid.n_points) != (zeta.grid.horizon, zeta.grid.n_points):
        raise ValueError("lambda and trajectory must share a grid")


def jc_state_series(
    initial: np.ndarray, lam: LambdaSolution, zeta: ComplexTrajectory
) -> JcTrajectoryState:
    """Closed-form trajectory state at every grid point."""
    _check_shared_grid(lam, zeta)
    phi = np.asarray(initial, dtype=complex)
    if phi.shape != (2,):
        raise ValueError("initial state must be a two-component vector")
    drive = lam.grid.cumulative(zeta.values * lam.values)
    amplitudes = np.empty((lam.grid.n_points, 2), dtype=complex)
    amplitudes[:, EXCITED] = phi[EXCITED] * lam.values
    amplitudes[:, GROUND] = phi[GROUND] + phi[EXCITED] * drive
    return JcTrajectoryState(grid=lam.grid, amplitudes=amplitudes, initial=phi)


def jc_state(
    initial: np.ndarray, lam: LambdaSolution, zeta: ComplexTrajectory, t_index: int
) -> np.ndarray:
    """State vector [c_e, c_g] at grid index t_index."""
    return jc_state_series(initial, lam, zeta).amplitudes[t_index]


def jc_propagator(lam: LambdaSolution, zeta: ComplexTrajectory, t_index: int) -> np.ndarray:
    """2x2 map U_t(zeta) = |g><g| + lambda(t)|e><e| + (int zeta lambda)|g><e|."""
    _check_shared_grid(lam, zeta)
    drive = lam.grid.cumulative(zeta.values * lam.values)[t_index]
    return np.array(
        [[lam.values[t_index], 0.0], [drive, 1.0]],
        dtype=complex,
    )


def _hat_bump(grid: TimeGrid, center: int, width: int, t_index: int) -> np.ndarray:
    """Hat of half-width ``width`` cells at a node, unit mass within [0, t].

    The state at time t integrates the trajectory over [0, t] only, so a
    bump is normalized by the part of its mass the state can see; without
    this the derivative at the window boundary comes out halved.  A bump
    entirely beyond t keeps its raw shape (the derivative is exactly zero
    regardless of scale).
    """
    offsets = np.abs(np.arange(grid.n_points) - center)
    bump = np.clip(1.0 - offsets / width, 0.0, None)
    visible = bump[: t_index + 1]
    w = np.full(t_index + 1, grid.step)
    w[0] = w[-1] = 0.5 * grid.step
    mass = float(np.dot(w, visible))
    if mass <= 0.0:
        return bump
    return bump / mass


def gateaux_state_derivative(
    initial: np.ndarray,
    lam: LambdaSolution,
    zeta: ComplexTrajectory,
    t_index: int,
    tau_index: int,
    bump_width: int = 1,
    eps: float = 1e-5,
) -> np.ndarray:
    """Finite-difference functional derivative of Psi_t along a hat bump.

    Approximates delta Psi_t / delta zeta_tau with a normalized hat of
    ``bump_width`` grid cells at node tau_index.  For the closed-form
    state the ground component equals lambda(tau) <e|phi> up to bump
    smearing, and it vanishes identically for tau > t.
    """
    if not 1e-8 <= eps <= 1e-2:
        raise ValueError("perturbation scale unreliable")
    bump = _hat_bump(lam.grid, tau_index, bump_width, t_index)
    shifted = ComplexTrajectory(grid=zeta.grid, values=zeta.values + eps * bump)
    base = jc_state(initial, lam, zeta, t_index)
    moved = jc_state(initial, lam, shifted, t_index)
    return (moved - base) / eps


def ds_residual(
    initial: np.ndarray,
    lam: LambdaSolution,
    spec_or_handle,
    zeta: ComplexTrajectory,
    t_index: int,
    bump_width: int = 1,
    eps: float = 1e-5,
) -> float:
    """Defect of the trajectory equation at one interior grid time.

    Compares d Psi / dt (central difference) against
    zeta_t <e|Psi_t> |g> - [int_0^t K(t, u) <g| dPsi/dzeta_u> du] |e>,
    with the functional derivative taken as a hat-bump Gateaux
    derivative.  Returns the two-vector norm of the difference.
    """
    if not 1e-8 <= eps <= 1e-2:
        raise ValueError("perturbation scale unreliable")
    grid = lam.grid
    if not 0 < t_index < grid.n_points - 1:
        raise ValueError("t_index must be interior to the grid")
    handle = (
        spec_or_handle
        if isinstance(spec_or_handle, KernelHandle)
        else KernelHandle.discrete(spec_or_handle)
    )
    series = jc_state_series(initial, lam, zeta)
    lhs = (series.amplitudes[t_index + 1] - series.amplitudes[t_index - 1]) / (2.0 * grid.step)

    rhs = np.zeros(2, dtype=complex)
    rhs[GROUND] = zeta.values[t_index] * series.amplitudes[t_index, EXCITED]
    deriv_g = np.empty(t_index + 1, dtype=complex)
    for j in range(t_index + 1):
        deriv_g[j] = gateaux_state_derivative(
            initial, lam, zeta, t_index, j, bump_width, eps
        )[GROUND]
    t = grid.points[t_index]
    kern_row = np.atleast_1d(kernel_eval(handle, t, grid.points[: t_index + 1]))
    w = np.full(t_index + 1, grid.step)
    w[0] = w[-1] = 0.5 * grid.step
    rhs[EXCITED] = -np.dot(w, kern_row * deriv_g)
    return float(np.linalg.norm(lhs - rhs))


def norm_conservation_defect(
    lam: LambdaSolution, handle: KernelHandle, n_checkpoints: int = 48
) -> tuple[np.ndarray, np.ndarray]:
    """Defect of |lambda(t)|^2 + int int lambda(u) conj(lambda(v)) K(v, u) - 1.

    The double integral over [0, t]^2 is the average squared ground-state
    amplitude, so the sum is the mean state norm and should be 1 at every
    t.  Evaluated at a spread of checkpoint times (the double quadrature
    is re-run per checkpoint; the Toeplitz structure keeps this cheap).
    Returns (times, defects).
    """
    from scipy.linalg import matmul_toeplitz

    grid = lam.grid
    idx = np.unique(np.linspace(1, grid.n_points - 1, n_checkpoints).astype(int))
    defects = np.empty(idx.size)
    if handle.kind == "markov":
        accumulated = grid.cumulative(np.abs(lam.values) ** 2)
        full = np.abs(lam.values) ** 2 + handle.rate * accumulated - 1.0
        return grid.points[idx], full[idx]

    table = _lag_table(handle, grid)
    for out, i in enumerate(idx):
        m = i + 1
        w = np.full(m, grid.step)
        w[0] = w[-1] = 0.5 * grid.step
        v = w * lam.values[:m]
        kv = matmul_toeplitz((table[:m], np.conj(table[:m])), v)
        double = np.real(np.vdot(v, kv))
        defects[out] = np.abs(lam.values[i]) ** 2 + double - 1.0
    return grid.points[idx], defects
