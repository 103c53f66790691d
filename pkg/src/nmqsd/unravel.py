"""Monte-Carlo unravelling: per-trajectory propagation and state averages.

An unravelling replaces the reduced density matrix by an ensemble of
pure states indexed by complex trajectories: averaging
|Psi_t(zeta)><Psi_t(zeta)| over the Gaussian trajectory measure
reproduces every one-time expectation of the open system.  Two concrete
propagation routes are available:

  * the closed-form two-level (Jaynes-Cummings) state for a discrete
    bath, with any kernel handled through lambda(t);
  * the memoryless equation
    dPsi/dt = (-i H - (gamma/2) L^dag L + zeta_t L) Psi
    for arbitrary small systems, integrated with fixed-step RK4 and
    zeta_t = sqrt(gamma) f(t) sampled as discrete white noise.

Individual states are not normalized; only the ensemble mean norm is 1.
Reductions accumulate in fixed-size chunks with pairwise summation, so
results are bit-identical regardless of worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .baths import DiscreteBathSpec, KernelHandle, kernel_eval
from .jaynes_cummings import EXCITED, GROUND, LambdaSolution
from .sampling import ComplexTrajectory
from .timegrid import TimeGrid

__all__ = [
    "SystemModel",
    "ReducedStateSeries",
    "JcNonMarkov",
    "MarkovUnravelling",
    "markov_propagate",
    "mc_reduced_state",
    "shifted_form_residual",
]

_CHUNK = 2048  # fixed reduction chunk; part of the determinism contract


@dataclass(frozen=True)
class SystemModel:
    """Small open system: Hamiltonian, coupling operator, damping rate."""

    dim: int
    hamiltonian: np.ndarray
    coupling: np.ndarray
    damping_rate: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        l = np.asarray(self.coupling, dtype=complex)
        if h.shape != (self.dim, self.dim) or l.shape != (self.dim, self.dim):
            raise ValueError("operator shapes must match the system dimension")
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise ValueError("hamiltonian must be Hermitian")
        if self.damping_rate < 0:
            raise ValueError("damping rate must be nonnegative")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "coupling", l)

    @classmethod
    def jaynes_cummings(cls, damping_rate: float = 0.0) -> "SystemModel":
        """Two-level system with lowering-operator coupling, H = 0."""
        lower = np.zeros((2, 2), dtype=complex)
        lower[GROUND, EXCITED] = 1.0
        return cls(dim=2, hamiltonian=np.zeros((2, 2)), coupling=lower, damping_rate=damping_rate)


@dataclass(frozen=True)
class ReducedStateSeries:
    """Time-indexed density matrices with Monte-Carlo standard errors.

    ``stderr`` combines the real and imaginary sample variances per
    entry.  ``norm_mean``/``norm_stderr`` track the ensemble state norm,
    which is conserved on average only.
    """

    grid: TimeGrid
    matrices: np.ndarray  # (n_points, d, d)
    stderr: np.ndarray  # (n_points, d, d) real
    n_samples: int
    norm_mean: np.ndarray
    norm_stderr: np.ndarray


@dataclass(frozen=True)
class JcNonMarkov:
    """Unravelling route: closed-form two-level states for a discrete bath."""

    spec: DiscreteBathSpec
    lam: LambdaSolution


@dataclass(frozen=True)
class MarkovUnravelling:
    """Unravelling route: white-noise trajectories through the RK4 integrator."""

    model: SystemModel


def _stream(seed: int, index: int) -> Generator:
    return Generator(Philox(key=np.array([seed, index], dtype=np.uint64)))


def _complex_normals(rng: Generator, shape) -> np.ndarray:
    size = int(np.prod(shape))
    xy = rng.standard_normal(2 * size)
    return ((xy[0::2] + 1j * xy[1::2]) / np.sqrt(2.0)).reshape(shape)


def markov_propagate(
    model: SystemModel,
    zeta: ComplexTrajectory,
    initial: np.ndarray,
    endpoint_check: float | None = None,
) -> np.ndarray:
    """Integrate the memoryless trajectory equation for one zeta.

    Fixed-step RK4 on the grid of ``zeta``; trajectory values are
    interpolated linearly for the half steps.  Returns states at every
    grid point, shape (n_points, dim).
    """
    if model.dim > 16:
        raise ValueError("dense propagation is limited to dimension 16")
    states = _markov_batch(model, zeta.grid, zeta.values[None, :], np.asarray(initial, complex))
    if endpoint_check is not None:
        fine_grid = zeta.grid.refined(2)
        fine_values = np.interp(fine_grid.points, zeta.grid.points, zeta.values.real).astype(
            complex
        )
        fine_values += 1j * np.interp(fine_grid.points, zeta.grid.points, zeta.values.imag)
        fine = _markov_batch(model, fine_grid, fine_values[None, :], np.asarray(initial, complex))
        if np.linalg.norm(fine[0, -1] - states[0, -1]) > 10.0 * endpoint_check:
            raise ValueError("step size too large")
    return states[0]


def _markov_batch(
    model: SystemModel, grid: TimeGrid, zetas: np.ndarray, initial: np.ndarray
) -> np.ndarray:
    """RK4 for a batch of trajectories; returns (batch, n_points, dim)."""
    h = grid.step
    drift = (
        -1j * model.hamiltonian
        - 0.5 * model.damping_rate * model.coupling.conj().T @ model.coupling
    )
    coupling_t = model.coupling.T
    drift_t = drift.T

    def rhs(psi, z):
        return psi @ drift_t + z[:, None] * (psi @ coupling_t)

    batch = zetas.shape[0]
    out = np.empty((batch, grid.n_points, model.dim), dtype=complex)
    out[:, 0] = initial
    psi = np.broadcast_to(initial, (batch, model.dim)).copy()
    for n in range(grid.n_points - 1):
        z0 = zetas[:, n]
        z1 = zetas[:, n + 1]
        zm = 0.5 * (z0 + z1)
        k1 = rhs(psi, z0)
        k2 = rhs(psi + 0.5 * h * k1, zm)
        k3 = rhs(psi + 0.5 * h * k2, zm)
        k4 = rhs(psi + h * k3, z1)
        psi = psi + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        out[:, n + 1] = psi
    return out


def _jc_batch(route: JcNonMarkov, grid: TimeGrid, zetas: np.ndarray, phi: np.ndarray) -> np.ndarray:
    lam = route.lam.values
    drive = grid.cumulative(zetas * lam)
    out = np.empty((zetas.shape[0], grid.n_points, 2), dtype=complex)
    out[..., EXCITED] = phi[EXCITED] * lam
    out[..., GROUND] = phi[GROUND] + phi[EXCITED] * drive
    return out


def _chunk_states(route, grid, phi, seed, start, count) -> np.ndarray:
    """Propagated states for trajectory indices start..start+count-1."""
    if isinstance(route, JcNonMarkov):
        features = route.spec.feature_columns(grid.points)
        zetas = np.empty((count, grid.n_points), dtype=complex)
        for j in range(count):
            f = _complex_normals(_stream(seed, start + j), route.spec.n_modes)
            zetas[j] = features @ np.conj(f)
        return _jc_batch(route, grid, zetas, phi)
    if isinstance(route, MarkovUnravelling):
        gamma = route.model.damping_rate
        scale = np.sqrt(gamma / grid.step)
        zetas = np.empty((count, grid.n_points), dtype=complex)
        for j in range(count):
            zetas[j] = scale * _complex_normals(_stream(seed, start + j), grid.n_points)
        return _markov_batch(route.model, grid, zetas, phi)
    raise TypeError("unknown unravelling route")


def mc_reduced_state(
    route,
    phi: np.ndarray,
    n_traj: int,
    seed: int,
    grid: TimeGrid,
    n_threads: int = 1,
) -> ReducedStateSeries:
    """Average |Psi><Psi| over sampled trajectories.

    Chunks of fixed size are reduced independently and combined in index
    order, so the result does not depend on ``n_threads``.
    """
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    phi = np.asarray(phi, dtype=complex)
    if isinstance(route, JcNonMarkov):
        if (grid.horizon, grid.n_points) != (route.lam.grid.horizon, route.lam.grid.n_points):
            raise ValueError("lambda solution must live on the requested grid")
        dim = 2
    else:
        dim = route.model.dim
    n_pts = grid.n_points

    starts = list(range(0, n_traj, _CHUNK))

    def reduce_chunk(start: int):
        count = min(_CHUNK, n_traj - start)
        psi = _chunk_states(route, grid, phi, seed, start, count)
        psi_conj = np.conj(psi)
        s1 = np.einsum("bni,bnj->nij", psi, psi_conj)
        s2 = np.einsum("bni,bnj->nij", psi**2, psi_conj**2)
        a2 = np.einsum("bni,bnj->nij", np.abs(psi) ** 2, np.abs(psi) ** 2).real
        norms = np.sum(np.abs(psi) ** 2, axis=2)
        t1 = norms.sum(axis=0)
        t2 = (norms**2).sum(axis=0)
        return s1, s2, a2, t1, t2

    if n_threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            partials = list(pool.map(reduce_chunk, starts))
    else:
        partials = [reduce_chunk(s) for s in starts]

    s1 = sum(p[0] for p in partials)
    s2 = sum(p[1] for p in partials)
    a2 = sum(p[2] for p in partials)
    t1 = sum(p[3] for p in partials)
    t2 = sum(p[4] for p in partials)

    n = n_traj
    mean = s1 / n
    if n > 1:
        sum_re_sq = 0.5 * (s2.real + a2)
        sum_im_sq = 0.5 * (a2 - s2.real)
        var_re = (sum_re_sq - n * mean.real**2) / (n - 1)
        var_im = (sum_im_sq - n * mean.imag**2) / (n - 1)
        stderr = np.sqrt(np.clip(var_re + var_im, 0.0, None) / n)
        norm_var = (t2 - t1**2 / n) / (n - 1)
        norm_stderr = np.sqrt(np.clip(norm_var, 0.0, None) / n)
    else:
        stderr = np.zeros((n_pts, dim, dim))
        norm_stderr = np.zeros(n_pts)
    return ReducedStateSeries(
        grid=grid,
        matrices=mean,
        stderr=stderr,
        n_samples=n,
        norm_mean=t1 / n,
        norm_stderr=norm_stderr,
    )


def shifted_form_residual(
    spec: DiscreteBathSpec,
    lam: LambdaSolution,
    zeta: ComplexTrajectory,
    t_index: int,
    n_shift: int,
    seed: int,
    phi: np.ndarray | None = None,
) -> tuple[complex, float]:
    """Monte-Carlo check of the shifted-trajectory form of the dynamics.

    Estimates E_xi[ conj(xi_t) <g|Psi_t(zeta + xi)> ] over independent
    shift trajectories xi and subtracts the memory integral
    <e|phi> int_0^t K(t, u) lambda(u) du computed by quadrature.  The two
    agree in expectation for every base trajectory zeta; the return is
    (difference, standard error).
    """
    grid = lam.grid
    if not 0 < t_index < grid.n_points - 1:
        raise ValueError("t_index must be interior to the grid")
    phi = np.array([1.0, 0.0], dtype=complex) if phi is None else np.asarray(phi, complex)
    lam_vals = lam.values[: t_index + 1]
    weights = np.full(t_index + 1, grid.step)
    weights[0] = weights[-1] = 0.5 * grid.step
    base_drive = np.dot(weights, zeta.values[: t_index + 1] * lam_vals)

    features = spec.feature_columns(grid.points[: t_index + 1])
    total = 0.0 + 0.0j
    total_sq_re = 0.0
    total_sq_im = 0.0
    done = 0
    while done < n_shift:
        count = min(_CHUNK, n_shift - done)
        xi = np.empty((count, t_index + 1), dtype=complex)
        for j in range(count):
            f = _complex_normals(_stream(seed, done + j), spec.n_modes)
            xi[j] = features @ np.conj(f)
        ground = phi[GROUND] + phi[EXCITED] * (base_drive + (xi * lam_vals) @ weights)
        values = np.conj(xi[:, -1]) * ground
        total += values.sum()
        total_sq_re += np.sum(values.real**2)
        total_sq_im += np.sum(values.imag**2)
        done += count

    mean = total / n_shift
    var = (total_sq_re - n_shift * mean.real**2) / (n_shift - 1)
    var += (total_sq_im - n_shift * mean.imag**2) / (n_shift - 1)
    stderr = float(np.sqrt(max(var, 0.0) / n_shift))

    kern_row = np.atleast_1d(
        kernel_eval(KernelHandle.discrete(spec), grid.points[t_index], grid.points[: t_index + 1])
    )
    memory = phi[EXCITED] * np.dot(weights, kern_row * lam_vals)
    return complex(mean - memory), stderr
