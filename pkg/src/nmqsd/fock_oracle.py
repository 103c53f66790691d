"""Direct system-bath simulation in a truncated Fock space.

Everything else in this package works with the reduced description
(kernel, trajectories, closed forms).  This module integrates the
microscopic interaction-picture dynamics

    dU_t/dt = -i Upsilon_t U_t,
    -i Upsilon_t = -i H (x) I  +  L (x) Z(t)  -  L^dag (x) Z(t)^dag,
    Z(t) = sum_k g_k exp(i (omega_k - omega0) t) a_k^dag,

with each bath mode truncated at ``n_max`` quanta, and provides partial
traces, coherent-amplitude (Bargmann) projections, and numerical checks
of the input-output and Ehrenfest operator identities.  It serves as the
oracle the trajectory machinery is validated against.

Basis ordering: the system index is slowest, bath occupations are
lexicographic with mode 0 most significant.  Index = s * B + b with
b = sum_m occ_m * (n_max+1)^(modes-1-m).

The truncated generator is exactly Hermitian, so propagation is unitary
up to integrator error; what truncation costs is fidelity to the
untruncated dynamics.  That cost is tracked as ``leakage``: the
probability mass sitting on the top rung (some mode at occupation
n_max), the states whose upward coupling was clipped.  Operator
identities are checked on the complementary restricted subspace.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .baths import DiscreteBathSpec, KernelHandle, kernel_eval
from .timegrid import TimeGrid
from .unravel import SystemModel

__all__ = [
    "FockTruncation",
    "TotalState",
    "ladder_operators",
    "bath_z_operator",
    "build_interaction_generator",
    "propagate_total",
    "propagate_unitary",
    "single_excitation_propagate",
    "reduced_density",
    "bargmann_project",
    "exponential_vector",
    "io_relation_residual",
    "equal_time_commutator_residual",
    "ehrenfest_residual",
]

TOTAL_DIM_GUARD = 20_000


@dataclass(frozen=True)
class FockTruncation:
    """Per-mode quantum cutoff defining the finite bath space."""

    n_max: int
    mode_count: int
    system_dim: int = 2

    def __post_init__(self):
        if self.n_max < 1 or self.mode_count < 1 or self.system_dim < 1:
            raise ValueError("truncation parameters must be positive")
        if self.total_dim > TOTAL_DIM_GUARD:
            raise ValueError("truncation too large")

    @property
    def bath_dim(self) -> int:
        return (self.n_max + 1) ** self.mode_count

    @property
    def total_dim(self) -> int:
        return self.system_dim * (self.n_max + 1) ** self.mode_count

    def occupations(self) -> np.ndarray:
        """Occupation numbers per bath basis state, shape (bath_dim, modes)."""
        levels = self.n_max + 1
        idx = np.arange(self.bath_dim)
        occ = np.empty((self.bath_dim, self.mode_count), dtype=int)
        for m in reversed(range(self.mode_count)):
            occ[:, m] = idx % levels
            idx = idx // levels
        return occ

    def top_rung_mask(self) -> np.ndarray:
        """Bath states with some mode at the cutoff occupation."""
        return np.any(self.occupations() == self.n_max, axis=1)

    def restricted_mask(self) -> np.ndarray:
        """Total-space mask of states with all modes below the cutoff."""
        below = ~self.top_rung_mask()
        return np.tile(below, self.system_dim)


@dataclass(frozen=True)
class TotalState:
    """State vector in the truncated system (x) bath space."""

    vector: np.ndarray
    trunc: FockTruncation

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=complex)
        if vec.size != self.trunc.total_dim:
            raise ValueError("vector length must match the truncation")
        if np.linalg.norm(vec) > 1.0 + 1e-9:
            raise ValueError("state norm exceeds one")
        object.__setattr__(self, "vector", vec)

    @property
    def norm_deficit(self) -> float:
        return 1.0 - float(np.linalg.norm(self.vector) ** 2)

    def leakage(self) -> float:
        """Probability mass on the top rung of the truncated ladder."""
        mask = np.tile(self.trunc.top_rung_mask(), self.trunc.system_dim)
        return float(np.sum(np.abs(self.vector[mask]) ** 2))


def ladder_operators(trunc: FockTruncation) -> list[np.ndarray]:
    """Annihilation operator of each mode on the full bath space."""
    levels = trunc.n_max + 1
    single = np.diag(np.sqrt(np.arange(1, levels)), k=1).astype(complex)
    eye = np.eye(levels, dtype=complex)
    ops = []
    for m in range(trunc.mode_count):
        op = np.array([[1.0]], dtype=complex)
        for pos in range(trunc.mode_count):
            op = np.kron(op, single if pos == m else eye)
        ops.append(op)
    return ops


def bath_z_operator(spec: DiscreteBathSpec, trunc: FockTruncation, t: float) -> np.ndarray:
    """Z(t) = sum_k g_k exp(i (omega_k - omega0) t) a_k^dag on the bath space."""
    if spec.n_modes != trunc.mode_count:
        raise ValueError("mode count mismatch")
    phases = spec.couplings * np.exp(1j * spec.shifted_frequencies * t)
    lowering = ladder_operators(trunc)
    z = np.zeros((trunc.bath_dim, trunc.bath_dim), dtype=complex)
    for coeff, a in zip(phases, lowering):
        z += coeff * a.conj().T
    return z


def build_interaction_generator(
    model: SystemModel, spec: DiscreteBathSpec, trunc: FockTruncation, t: float
) -> np.ndarray:
    """-i Upsilon_t on the total space."""
    if trunc.system_dim != model.dim:
        raise ValueError("system dimension mismatch")
    z = bath_z_operator(spec, trunc, t)
    eye_b = np.eye(trunc.bath_dim)
    gen = np.kron(-1j * model.hamiltonian, eye_b)
    gen += np.kron(model.coupling, z)
    gen -= np.kron(model.coupling.conj().T, z.conj().T)
    return gen


class _GeneratorCache:
    """-i Upsilon_t assembled from per-mode blocks; fast repeated evaluation."""

    def __init__(self, model: SystemModel, spec: DiscreteBathSpec, trunc: FockTruncation):
        eye_b = np.eye(trunc.bath_dim)
        self.static = np.kron(-1j * model.hamiltonian, eye_b)
        self.blocks = []
        for coupling, a in zip(spec.couplings, ladder_operators(trunc)):
            self.blocks.append(np.kron(model.coupling, coupling * a.conj().T))
        self.freqs = spec.shifted_frequencies

    def __call__(self, t: float) -> np.ndarray:
        gen = self.static.copy()
        for omega, block in zip(self.freqs, self.blocks):
            rotated = np.exp(1j * omega * t) * block
            gen += rotated
            gen -= rotated.conj().T
        return gen


def _rk4_nonautonomous(apply_gen, y0: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Classic RK4 with midpoint generator evaluations; y may be a matrix."""
    h = grid.step
    out = np.empty((grid.n_points,) + y0.shape, dtype=complex)
    out[0] = y0
    y = y0.astype(complex)
    for n in range(grid.n_points - 1):
        t = grid.points[n]
        k1 = apply_gen(t, y)
        k2 = apply_gen(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = apply_gen(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = apply_gen(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        out[n + 1] = y
    return out


def propagate_total(
    model: SystemModel,
    spec: DiscreteBathSpec,
    trunc: FockTruncation,
    phi: np.ndarray,
    grid: TimeGrid,
    leak_tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate phi (x) vacuum under the interaction generator.

    Returns (states, leakage) with states of shape (n_points, total_dim)
    and leakage the top-rung mass per step.  Raises once leakage exceeds
    ``leak_tol``: results past that point depend on the cutoff.
    """
    phi = np.asarray(phi, dtype=complex)
    if phi.size != model.dim:
        raise ValueError("initial state dimension mismatch")
    vacuum = np.zeros(trunc.bath_dim, dtype=complex)
    vacuum[0] = 1.0
    y0 = np.kron(phi, vacuum)
    gen = _GeneratorCache(model, spec, trunc)
    states = _rk4_nonautonomous(lambda t, y: gen(t) @ y, y0, grid)
    mask = np.tile(trunc.top_rung_mask(), trunc.system_dim)
    leakage = np.sum(np.abs(states[:, mask]) ** 2, axis=1)
    if np.any(leakage > leak_tol):
        raise ValueError("increase n_max")
    return states, leakage


def propagate_unitary(
    model: SystemModel, spec: DiscreteBathSpec, trunc: FockTruncation, grid: TimeGrid
) -> np.ndarray:
    """Full propagator matrices U_t at every grid point."""
    gen = _GeneratorCache(model, spec, trunc)
    eye = np.eye(trunc.total_dim, dtype=complex)
    return _rk4_nonautonomous(lambda t, y: gen(t) @ y, eye, grid)


def single_excitation_propagate(
    spec: DiscreteBathSpec, grid: TimeGrid
) -> tuple[np.ndarray, np.ndarray]:
    """Exact single-excitation sector of the two-level model.

    Integrates
        c_e' = -sum_k conj(g_k) exp(-i (omega_k-omega0) t) c_k,
        c_k' = g_k exp(+i (omega_k-omega0) t) c_e,
    from c_e(0) = 1.  In exact arithmetic c_e(t) equals lambda(t); here
    it provides an independent RK4 route to the same amplitude.
    Returns (c_e, c_modes) with shapes (n,) and (n, n_modes).
    """
    couplings = spec.couplings
    freqs = spec.shifted_frequencies

    def apply(t, y):
        phase = np.exp(1j * freqs * t)
        out = np.empty_like(y)
        out[0] = -np.sum(np.conj(couplings * phase) * y[1:])
        out[1:] = couplings * phase * y[0]
        return out

    y0 = np.zeros(spec.n_modes + 1, dtype=complex)
    y0[0] = 1.0
    series = _rk4_nonautonomous(apply, y0, grid)
    return series[:, 0], series[:, 1:]


def reduced_density(state: TotalState | np.ndarray, d: int | None = None) -> np.ndarray:
    """Partial trace over the bath: rho = V V^dag with V the (d, B) reshape."""
    if isinstance(state, TotalState):
        vec, d = state.vector, state.trunc.system_dim
    else:
        vec = np.asarray(state, dtype=complex)
        if d is None:
            raise ValueError("system dimension required for raw vectors")
    v = vec.reshape(d, -1)
    return v @ v.conj().T


def exponential_vector(f: np.ndarray, trunc: FockTruncation) -> np.ndarray:
    """Truncated coherent (exponential) vector prod_k sum_n f_k^n/sqrt(n!) |n>."""
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    if f.size != trunc.mode_count:
        raise ValueError("amplitude length mismatch")
    if np.sum(np.abs(f) ** 2) > trunc.n_max / 4.0:
        raise ValueError("amplitude too large for truncation")
    ns = np.arange(trunc.n_max + 1)
    norms = np.sqrt([factorial(n) for n in ns])
    vec = np.array([1.0], dtype=complex)
    for amp in f:
        vec = np.kron(vec, amp**ns / norms)
    return vec


def bargmann_project(state: TotalState, f: np.ndarray) -> np.ndarray:
    """System vector <e^f | Psi>, the hybrid complex-wave representation.

    With the bath started in vacuum, t = 0 returns the initial system
    state for every admissible f (exponential vectors overlap the vacuum
    with weight one).
    """
    ef = exponential_vector(f, state.trunc)
    reshaped = state.vector.reshape(state.trunc.system_dim, state.trunc.bath_dim)
    return reshaped @ np.conj(ef)


def _restricted_spectral_norm(matrix: np.ndarray, trunc: FockTruncation) -> float:
    mask = trunc.restricted_mask()
    sub = matrix[np.ix_(mask, mask)]
    return float(np.linalg.norm(sub, ord=2))


def io_relation_residual(
    model: SystemModel,
    spec: DiscreteBathSpec,
    trunc: FockTruncation,
    t_index: int,
    grid: TimeGrid,
    unitaries: np.ndarray | None = None,
) -> float:
    """Defect of Z_out(t)^dag = Z_in(t)^dag + int_0^t K(t,u) j_u(L) du.

    All operators are built from propagated matrices; the memory integral
    uses trapezoid weights.  The spectral norm is taken on the subspace
    below the truncation rung, where the ladder algebra is exact.
    """
    if unitaries is None:
        unitaries = propagate_unitary(model, spec, trunc, grid)
    t = grid.points[t_index]
    eye_s = np.eye(model.dim)
    z_in_dag = np.kron(eye_s, bath_z_operator(spec, trunc, t).conj().T)
    u_t = unitaries[t_index]
    z_out_dag = u_t.conj().T @ z_in_dag @ u_t

    memory = np.zeros_like(z_in_dag)
    if t_index > 0:
        coupling_total = np.kron(model.coupling, np.eye(trunc.bath_dim))
        weights = np.full(t_index + 1, grid.step)
        weights[0] = weights[-1] = 0.5 * grid.step
        kern_row = np.atleast_1d(
            kernel_eval(KernelHandle.discrete(spec), t, grid.points[: t_index + 1])
        )
        for j in range(t_index + 1):
            u_j = unitaries[j]
            memory += weights[j] * kern_row[j] * (u_j.conj().T @ coupling_total @ u_j)
    return _restricted_spectral_norm(z_out_dag - z_in_dag - memory, trunc)


def equal_time_commutator_residual(
    model: SystemModel,
    spec: DiscreteBathSpec,
    trunc: FockTruncation,
    observable: np.ndarray,
    t_index: int,
    grid: TimeGrid,
    unitaries: np.ndarray | None = None,
) -> float:
    """Norm of [j_t(X), Z_out(t)] on the restricted subspace (zero exactly)."""
    if unitaries is None:
        unitaries = propagate_unitary(model, spec, trunc, grid)
    u_t = unitaries[t_index]
    t = grid.points[t_index]
    x_total = u_t.conj().T @ np.kron(observable, np.eye(trunc.bath_dim)) @ u_t
    z_out = u_t.conj().T @ np.kron(np.eye(model.dim), bath_z_operator(spec, trunc, t)) @ u_t
    return _restricted_spectral_norm(x_total @ z_out - z_out @ x_total, trunc)


def ehrenfest_residual(
    model: SystemModel,
    spec: DiscreteBathSpec,
    trunc: FockTruncation,
    observable: np.ndarray,
    grid: TimeGrid,
    unitaries: np.ndarray | None = None,
) -> np.ndarray:
    """Pointwise defect of the memory-kernel Ehrenfest identity.

    d<j_t(X)>/dt (central differences) is compared against
    <j_t(-i[X,H])> + int_0^t K(t,u) <j_t([L^dag,X]) j_u(L)> du + c.c.-
    structured second term, for the initial state phi (x) vacuum with
    phi the first basis vector of the system.  Returns |defect| at the
    interior grid points.
    """
    if unitaries is None:
        unitaries = propagate_unitary(model, spec, trunc, grid)
    n = grid.n_points
    eye_b = np.eye(trunc.bath_dim)
    x = np.asarray(observable, dtype=complex)
    if np.max(np.abs(x - x.conj().T)) > 1e-12:
        raise ValueError("observable must be Hermitian")
    h_comm = (x @ model.hamiltonian - model.hamiltonian @ x) / 1j
    xl_comm = x @ model.coupling - model.coupling @ x  # [X, L] = [L^dag, X]^dag

    phi = np.zeros(model.dim, dtype=complex)
    phi[0] = 1.0
    vacuum = np.zeros(trunc.bath_dim, dtype=complex)
    vacuum[0] = 1.0
    psi0 = np.kron(phi, vacuum)
    psis = np.einsum("tij,j->ti", unitaries, psi0)

    x_total = np.kron(x, eye_b)
    hcomm_total = np.kron(h_comm, eye_b)
    xl_total = np.kron(xl_comm, eye_b)
    l_total = np.kron(model.coupling, eye_b)

    expect_x = np.real(np.einsum("ti,ti->t", np.conj(psis), psis @ x_total.T))
    lhs = (expect_x[2:] - expect_x[:-2]) / (2.0 * grid.step)
    drift = np.real(np.einsum("ti,ti->t", np.conj(psis), psis @ hcomm_total.T))

    # j_t(A)|psi0> = U_t^dag (A x I) psi_t; two-time averages are inner
    # products of these vectors, and the second memory term is the
    # conjugate of the first
    alpha_xl = np.einsum("tji,tj->ti", np.conj(unitaries), psis @ xl_total.T)
    alpha_l = np.einsum("tji,tj->ti", np.conj(unitaries), psis @ l_total.T)

    kernel = KernelHandle.discrete(spec)
    residuals = np.empty(n - 2)
    for w_idx, t_idx in enumerate(range(1, n - 1)):
        t = grid.points[t_idx]
        weights = np.full(t_idx + 1, grid.step)
        weights[0] = weights[-1] = 0.5 * grid.step
        kern_row = np.atleast_1d(kernel_eval(kernel, t, grid.points[: t_idx + 1]))
        memory = np.dot(weights * kern_row, alpha_l[: t_idx + 1] @ np.conj(alpha_xl[t_idx]))
        rhs = drift[t_idx] + 2.0 * np.real(memory)
        residuals[w_idx] = abs(lhs[w_idx] - rhs)
    return residuals
