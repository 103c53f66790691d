"""Complex Gaussian trajectory sampling.

Bath amplitude vectors f are distributed with density
prod_k exp(-|f_k|^2)/pi, i.e. independent circular complex Gaussians
with E|f_k|^2 = 1.  The associated complex trajectory is

    zeta_t(f) = <f|g_t> = sum_k g_k exp(i (omega_k - omega0) t) conj(f_k),

whose second-order statistics are E[zeta_t conj(zeta_s)] = K(s, t) and
E[zeta_t zeta_s] = 0.  Trajectories can equivalently be synthesized from
a Mercer basis (Karhunen-Loeve form) with independent coefficients of
variance lambda_n.  All randomness comes from counter-based Philox
streams keyed on (seed, index): a trajectory is fully determined by its
key, independent of batch layout or generation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .baths import DiscreteBathSpec
from .mercer import MercerBasis
from .timegrid import TimeGrid

__all__ = [
    "AmplitudeSample",
    "ComplexTrajectory",
    "sample_amplitudes",
    "trajectory_from_amplitudes",
    "sample_trajectory_kl",
    "sample_trajectory_batch",
    "empirical_covariance",
]


@dataclass(frozen=True)
class AmplitudeSample:
    """One draw of bath mode amplitudes, reproducible from (seed, index)."""

    f: np.ndarray
    seed: int
    index: int


@dataclass(frozen=True)
class ComplexTrajectory:
    """A complex-valued function of time sampled on a uniform grid."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if values.size != self.grid.n_points:
            raise ValueError("values length must match grid")
        object.__setattr__(self, "values", values)


def _stream(seed: int, index: int) -> Generator:
    key = np.array([seed, index], dtype=np.uint64)
    return Generator(Philox(key=key))


def _standard_complex(rng: Generator, n: int) -> np.ndarray:
    xy = rng.standard_normal(2 * n)
    return (xy[0::2] + 1j * xy[1::2]) / np.sqrt(2.0)


def sample_amplitudes(spec: DiscreteBathSpec, seed: int, index: int = 0) -> AmplitudeSample:
    """Independent circular complex Gaussian amplitudes, E|f_k|^2 = 1."""
    f = _standard_complex(_stream(seed, index), spec.n_modes)
    return AmplitudeSample(f=f, seed=seed, index=index)


def trajectory_from_amplitudes(
    spec: DiscreteBathSpec, f: AmplitudeSample | np.ndarray, grid: TimeGrid
) -> ComplexTrajectory:
    """zeta(t_i) = sum_k g_k exp(i (omega_k - omega0) t_i) conj(f_k)."""
    amps = f.f if isinstance(f, AmplitudeSample) else np.atleast_1d(np.asarray(f, dtype=complex))
    if amps.size != spec.n_modes:
        raise ValueError("amplitude length does not match mode count")
    values = spec.feature_columns(grid.points) @ np.conj(amps)
    return ComplexTrajectory(grid=grid, values=values)


def sample_trajectory_kl(basis: MercerBasis, seed: int, index: int = 0) -> ComplexTrajectory:
    """Karhunen-Loeve synthesis from a Mercer basis.

    Draws independent c_n with E|c_n|^2 = lambda_n and returns
    zeta(t_i) = sum_n conj(c_n) conj(phi_n(t_i)), so that conj(zeta) has
    eigenbasis coefficients c_n.
    """
    if basis.rank < 1:
        raise ValueError("basis must have rank at least one")
    c = np.sqrt(basis.eigenvalues) * _standard_complex(_stream(seed, index), basis.rank)
    values = np.conj(c @ basis.eigenfunctions)
    return ComplexTrajectory(grid=basis.grid, values=values)


def sample_trajectory_batch(
    spec: DiscreteBathSpec, grid: TimeGrid, n_traj: int, seed: int, start_index: int = 0
) -> np.ndarray:
    """Matrix of trajectories, row j = trajectory with index start_index + j.

    Rows are identical to calling sample_amplitudes /
    trajectory_from_amplitudes one index at a time.
    """
    features = spec.feature_columns(grid.points)
    out = np.empty((n_traj, grid.n_points), dtype=complex)
    for j in range(n_traj):
        f = _standard_complex(_stream(seed, start_index + j), spec.n_modes)
        out[j] = features @ np.conj(f)
    return out


def empirical_covariance(trajectories) -> tuple[np.ndarray, np.ndarray]:
    """Sample second moment C(t_i, t_j) = mean of zeta(t_i) conj(zeta(t_j)).

    Accepts a batch matrix (one row per trajectory) or a sequence of
    ComplexTrajectory on a common grid.  Returns (C, stderr) where stderr
    combines the real and imaginary sample variances per entry.  C
    estimates E[zeta_t conj(zeta_s)] = K(s, t).
    """
    if isinstance(trajectories, np.ndarray):
        batch = trajectories
    else:
        trajectories = list(trajectories)
        if len({(tr.grid.horizon, tr.grid.n_points) for tr in trajectories}) > 1:
            raise ValueError("trajectories must share a grid")
        batch = np.array([tr.values for tr in trajectories])
    n = batch.shape[0]
    if n == 0:
        raise ValueError("need at least one trajectory")
    products = batch[:, :, None] * np.conj(batch[:, None, :])
    mean = products.mean(axis=0)
    if n == 1:
        return mean, np.zeros(mean.shape)
    var = products.real.var(axis=0, ddof=1) + products.imag.var(axis=0, ddof=1)
    return mean, np.sqrt(var / n)
