"""Nystrom eigendecomposition of a kernel on [0, T] and the induced RKHS.

A positive definite kernel restricted to a finite horizon admits the
expansion K(t, s) = sum_n lambda_n phi_n(t) conj(phi_n(s)) with
eigenpairs of the integral operator (T_K u)(t) = int_0^T K(t, s) u(s) ds.
Discretizing with trapezoidal weights w_i and symmetrizing,

    B = W^(1/2) K W^(1/2),   B v_n = lambda_n v_n,   phi_n = v_n / sqrt(w),

keeps the matrix exactly Hermitian in floating point and gives
O(dt^2) eigenvalue accuracy.  On top of the eigenbasis this module
implements the RKHS inner product sum_n conj(u_n) v_n / lambda_n, the
representers k_t with coefficients lambda_n conj(phi_n(t)), the feature
embedding of bath amplitude vectors (whose image is the space of complex
trajectories), and the causal re-expansion on a running horizon.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .baths import DiscreteBathSpec
from .timegrid import TimeGrid

__all__ = [
    "MercerBasis",
    "RkhsElement",
    "mercer_decompose",
    "rkhs_inner",
    "representer",
    "embed_feature",
    "causal_basis",
]

#: eigenvalues below this fraction of the largest are dropped by default;
#: smaller ones are roundoff-dominated and destabilize the 1/lambda inner
#: product.
DEFAULT_TRUNC_TOL = 1e-10

#: negative eigenvalues above this fraction of lambda_1 (in magnitude) are
#: clamped to zero and dropped; anything more negative is a genuine
#: positivity failure.
NEGATIVE_EIG_TOL = 1e-10


@dataclass(frozen=True)
class MercerBasis:
    """Eigenvalues (descending), grid-sampled eigenfunctions, and the grid.

    ``eigenfunctions[n, i]`` is phi_n(t_i), normalized so that
    sum_i w_i |phi_n(t_i)|^2 = 1.
    """

    grid: TimeGrid
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        """Truncated kernel sum_n lambda_n phi_n(t_i) conj(phi_n(t_j))."""
        phi = self.eigenfunctions
        return (phi.T * self.eigenvalues) @ np.conj(phi)


@dataclass(frozen=True)
class RkhsElement:
    """Coefficients u_n in the eigenbasis; the function is sum u_n phi_n."""

    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.atleast_1d(np.asarray(self.coefficients, dtype=complex))
        )

    @property
    def rank(self) -> int:
        return self.coefficients.size

    def evaluate(self, basis: MercerBasis) -> np.ndarray:
        """Grid samples sum_n u_n phi_n(t_i)."""
        if self.rank != basis.rank:
            raise ValueError("basis mismatch")
        return self.coefficients @ basis.eigenfunctions


def mercer_decompose(
    kernel: Callable[[np.ndarray, np.ndarray], np.ndarray],
    grid: TimeGrid,
    trunc_tol: float = DEFAULT_TRUNC_TOL,
) -> MercerBasis:
    """Solve the Nystrom-discretized eigenproblem of a pointwise kernel.

    ``kernel`` is anything that evaluates K(t, s) with numpy broadcasting:
    a discrete KernelHandle, the exponential handle, or a plain callable
    such as ``lambda t, s: np.minimum(t, s)``.  Eigenpairs with
    lambda_n < trunc_tol * lambda_1 are dropped.  Tiny negative
    eigenvalues (within roundoff of zero) are clamped and dropped; larger
    negative ones raise.
    """
    if not 0 < trunc_tol < 1:
        raise ValueError("trunc_tol must lie in (0, 1)")
    if getattr(kernel, "pointwise", True) is False:
        raise ValueError("delta kernel not pointwise evaluable")
    from .baths import KernelHandle, kernel_matrix  # local import to avoid cycle

    if isinstance(kernel, KernelHandle):
        kmat = kernel_matrix(kernel, grid.points)
    else:
        kmat = np.asarray(kernel(grid.points[:, None], grid.points[None, :]))
    kmat = 0.5 * (kmat + kmat.conj().T)
    if np.max(np.abs(kmat.imag)) == 0.0:
        kmat = kmat.real

    root_w = np.sqrt(grid.weights)
    sym = kmat * np.outer(root_w, root_w)
    eigvals, eigvecs = scipy.linalg.eigh(sym)
    eigvals, eigvecs = eigvals[::-1], eigvecs[:, ::-1]

    top = eigvals[0] if eigvals.size else 0.0
    if top <= 0.0:
        raise ValueError("kernel numerically zero")
    if eigvals[-1] < -NEGATIVE_EIG_TOL * top:
        raise ValueError("kernel not positive semidefinite on grid")

    keep = eigvals >= trunc_tol * top
    eigvals, eigvecs = eigvals[keep], eigvecs[:, keep]
    if eigvals.size == 0:
        raise ValueError("kernel numerically zero")

    phi = (eigvecs / root_w[:, None]).T.astype(complex)
    # fix the free phase: largest-magnitude component real positive
    anchor = np.argmax(np.abs(phi), axis=1)
    phase = phi[np.arange(phi.shape[0]), anchor]
    phi *= np.where(np.abs(phase) > 0, np.abs(phase) / phase, 1.0)[:, None]
    return MercerBasis(grid=grid, eigenvalues=eigvals, eigenfunctions=phi)


def rkhs_inner(u: RkhsElement, v: RkhsElement, basis: MercerBasis) -> complex:
    """RKHS inner product sum_n conj(u_n) v_n / lambda_n."""
    if u.rank != basis.rank or v.rank != basis.rank:
        raise ValueError("basis mismatch")
    return complex(np.sum(np.conj(u.coefficients) * v.coefficients / basis.eigenvalues))


def representer(basis: MercerBasis, t: float) -> RkhsElement:
    """Evaluation functional k_t = K(t, .) as an element of the RKHS.

    Coefficients are lambda_n conj(phi_n(t)).  Times are resolved to the
    nearest grid node; the basis carries no off-grid kernel data.
    """
    idx = basis.grid.index_of(t)
    return RkhsElement(basis.eigenvalues * np.conj(basis.eigenfunctions[:, idx]))


def embed_feature(f: np.ndarray, spec: DiscreteBathSpec, basis: MercerBasis) -> RkhsElement:
    """Embed a bath amplitude vector as the trajectory conj(zeta(f)).

    The complex trajectory of f is zeta_t(f) = <f|g_t>; its conjugate lies
    in the RKHS with coefficients c_n = sum_i w_i conj(phi_n(t_i))
    conj(zeta_{t_i}(f)).  The map is a conjugate-linear isometry:
    <embed(f1), embed(f2)>_H = <f1|f2>.
    """
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    if f.size != spec.n_modes:
        raise ValueError("amplitude length does not match mode count")
    features = spec.feature_columns(basis.grid.points)
    zeta_conj = features.conj() @ f
    coeffs = (basis.eigenfunctions.conj() * basis.grid.weights) @ zeta_conj
    return RkhsElement(coeffs)


def causal_basis(
    kernel: Callable[[np.ndarray, np.ndarray], np.ndarray],
    t: float,
    n_points: int,
    trunc_tol: float = DEFAULT_TRUNC_TOL,
) -> MercerBasis:
    """Mercer basis on the running horizon [0, t].

    Evaluating the reconstruction at the right endpoint gives the causal
    kernel K(t, s) theta(t - s); each eigenfunction is supported in
    [0, t] by construction.
    """
    if t <= 0:
        raise ValueError("running horizon must be positive")
    return mercer_decompose(kernel, TimeGrid(t, n_points), trunc_tol)
