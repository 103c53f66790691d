"""Bath correlation kernels.

A bath of harmonic modes with frequencies ``omega_k`` and couplings
``g_k`` has the two-time correlation function

    K(t, s) = sum_k |g_k|^2 exp(-i (omega_k - omega0) (t - s)),

where ``omega0`` is an optional detuning that moves the kernel into the
rotating frame of a driven two-level system.  The kernel is sesquilinear,
``K(t, s)* = K(s, t)``, stationary, and positive definite.  Besides the
discrete family this module provides the memoryless (delta) kernel
``gamma * delta(t - s)``, a real exponential test kernel
``A * exp(-kappa |t - s|)``, continuum spectral densities with their
midpoint-rule discretization, the inverse kernel of a faithful bath, the
two-bath decomposition of a thermal state, and the quadrature commutator
diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

__all__ = [
    "DiscreteBathSpec",
    "ContinuumBathSpec",
    "KernelHandle",
    "ThermalPair",
    "kernel_eval",
    "kernel_matrix",
    "discretize_continuum",
    "faithful_reduce",
    "inverse_kernel_eval",
    "parseval_resolvent",
    "quadrature_commutators",
    "thermal_double",
]


@dataclass(frozen=True)
class DiscreteBathSpec:
    """Finite list of bath modes: frequencies, complex couplings, detuning.

    ``detuning`` shifts every mode frequency, so phases evolve with
    ``omega_k - detuning``.  Frequencies must be pairwise distinct
    (non-degenerate modes).
    """

    frequencies: np.ndarray
    couplings: np.ndarray
    detuning: float = 0.0

    def __post_init__(self):
        freqs = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        coups = np.atleast_1d(np.asarray(self.couplings, dtype=complex))
        if freqs.size == 0:
            raise ValueError("bath needs at least one mode")
        if freqs.shape != coups.shape:
            raise ValueError("frequencies and couplings must have equal length")
        if np.unique(freqs).size != freqs.size:
            raise ValueError("mode frequencies must be pairwise distinct")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "couplings", coups)

    @property
    def n_modes(self) -> int:
        return self.frequencies.size

    @property
    def shifted_frequencies(self) -> np.ndarray:
        """Mode frequencies relative to the detuning."""
        return self.frequencies - self.detuning

    def feature_columns(self, times: np.ndarray) -> np.ndarray:
        """Matrix g_k * exp(i (omega_k - omega0) t_i), shape (n_times, n_modes).

        Row i is the feature vector g_{t_i}; the kernel is the Gram matrix
        of these rows and a complex trajectory is ``conj(f) @ row``.
        """
        times = np.asarray(times, dtype=float)
        phases = np.exp(1j * np.outer(times, self.shifted_frequencies))
        return phases * self.couplings


@dataclass(frozen=True)
class ContinuumBathSpec:
    """Spectral density J(omega) >= 0 from a named parametric family.

    Families:
      * ``ohmic``:      J = eta * omega * exp(-omega / cutoff)
      * ``lorentzian``: J = eta * width^2 / ((omega - center)^2 + width^2)
      * ``flat``:       J = eta on [0, omega_max], zero outside
    """

    family: str
    parameters: dict = field(default_factory=dict)

    _FAMILIES = ("ohmic", "lorentzian", "flat")

    def __post_init__(self):
        if self.family not in self._FAMILIES:
            raise ValueError(f"unknown spectral density family {self.family!r}")

    def density(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        p = self.parameters
        if self.family == "ohmic":
            j = p["eta"] * omega * np.exp(-omega / p["cutoff"])
        elif self.family == "lorentzian":
            j = p["eta"] * p["width"] ** 2 / ((omega - p["center"]) ** 2 + p["width"] ** 2)
        else:
            j = np.where((omega >= 0) & (omega <= p["omega_max"]), p["eta"], 0.0)
        return j

    __call__ = density


@dataclass(frozen=True)
class KernelHandle:
    """Tagged kernel: ``discrete``, ``markov`` (delta), or ``exponential``.

    The markov kind has no pointwise value; callers must branch on
    ``kind`` and use the closed-form paths instead.  Handles with a
    pointwise value are callable: ``handle(t, s)``.
    """

    kind: str
    spec: DiscreteBathSpec | None = None
    rate: float = 0.0
    amplitude: float = 0.0
    decay: float = 0.0

    @classmethod
    def discrete(cls, spec: DiscreteBathSpec) -> "KernelHandle":
        return cls(kind="discrete", spec=spec)

    @classmethod
    def markov(cls, rate: float) -> "KernelHandle":
        if rate < 0:
            raise ValueError("markov rate must be nonnegative")
        return cls(kind="markov", rate=rate)

    @classmethod
    def exponential(cls, amplitude: float, decay: float) -> "KernelHandle":
        if amplitude < 0 or decay < 0:
            raise ValueError("exponential kernel needs nonnegative amplitude and decay")
        return cls(kind="exponential", amplitude=amplitude, decay=decay)

    @property
    def pointwise(self) -> bool:
        return self.kind != "markov"

    def __call__(self, t, s):
        return kernel_eval(self, t, s)


@dataclass(frozen=True)
class ThermalPair:
    """Two vacuum baths representing one bath at temperature kT.

    ``spec1`` carries couplings sqrt(n+1) g (spontaneous + stimulated
    emission), ``spec2`` carries sqrt(n) conj(g) (absorption), with the
    Bose occupation n = 1/(exp(omega/kT) - 1).  Per mode
    |g1|^2 - |g2|^2 = |g|^2.
    """

    spec1: DiscreteBathSpec
    spec2: DiscreteBathSpec
    temperature: float


def kernel_eval(handle: KernelHandle, t, s):
    """Pointwise kernel value K(t, s); broadcasts over array arguments.

    Raises for the markov kind, whose delta kernel has no pointwise value.
    """
    if handle.kind == "markov":
        raise ValueError("delta kernel not pointwise evaluable")
    lag = np.asarray(t, dtype=float) - np.asarray(s, dtype=float)
    if handle.kind == "exponential":
        value = handle.amplitude * np.exp(-handle.decay * np.abs(lag))
        value = np.asarray(value, dtype=complex)
    else:
        spec = handle.spec
        weights = np.abs(spec.couplings) ** 2
        phases = np.exp(-1j * np.multiply.outer(lag, spec.shifted_frequencies))
        value = phases @ weights
    return complex(value) if np.ndim(lag) == 0 else value


def kernel_matrix(handle: KernelHandle, times: np.ndarray) -> np.ndarray:
    """Gram matrix K(t_i, t_j) on a set of times.

    For discrete baths this uses the feature factorization
    K = F F^dagger, which keeps the matrix exactly Hermitian positive
    semidefinite in floating point.
    """
    times = np.asarray(times, dtype=float)
    if handle.kind == "discrete":
        f = handle.spec.feature_columns(times)
        return np.conj(f) @ f.T
    return kernel_eval(handle, times[:, None], times[None, :])


def discretize_continuum(spec: ContinuumBathSpec, n_modes: int, omega_max: float) -> DiscreteBathSpec:
    """Midpoint-rule discretization of a continuum bath.

    Modes sit at omega_k = (k - 1/2) * domega with couplings
    g_k = sqrt(J(omega_k) domega / pi), so the discrete kernel is the
    Riemann-sum approximation of (1/pi) * int_0^omega_max J e^{-i omega lag}.
    The midpoint grid avoids the omega = 0 endpoint where an ohmic density
    vanishes and a thermal occupation would diverge.
    """
    if n_modes < 1:
        raise ValueError("need at least one mode")
    if omega_max <= 0:
        raise ValueError("omega_max must be positive")
    domega = omega_max / n_modes
    omegas = (np.arange(n_modes) + 0.5) * domega
    j = spec.density(omegas)
    if np.any(j < 0):
        raise ValueError("invalid spectral density")
    couplings = np.sqrt(j * domega / np.pi).astype(complex)
    return DiscreteBathSpec(frequencies=omegas, couplings=couplings)


def faithful_reduce(spec: DiscreteBathSpec, tol: float = 0.0) -> tuple[DiscreteBathSpec, bool]:
    """Drop modes with |g_k| <= tol; the kernel is unchanged exactly.

    Returns the reduced spec and a flag that is True when nothing was
    removed (the coupling was already faithful at this tolerance).
    """
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    keep = np.abs(spec.couplings) > tol
    if not np.any(keep):
        raise ValueError("decoupled bath")
    if np.all(keep):
        return spec, True
    reduced = replace(spec, frequencies=spec.frequencies[keep], couplings=spec.couplings[keep])
    return reduced, False


def inverse_kernel_eval(spec: DiscreteBathSpec, t, s):
    """Inverse kernel G(t, s) = (1/2pi) sum_k |g_k|^{-2} e^{-i(omega_k-omega0)(t-s)}.

    Defined only for faithful couplings (every |g_k| > 0).  On a uniform
    commensurate frequency grid, G inverts K over one period; see
    the Parseval check in the mercer module tests.
    """
    if np.any(np.abs(spec.couplings) == 0):
        raise ValueError("inverse kernel undefined for unfaithful coupling")
    lag = np.asarray(t, dtype=float) - np.asarray(s, dtype=float)
    weights = np.abs(spec.couplings) ** (-2.0)
    phases = np.exp(-1j * np.multiply.outer(lag, spec.shifted_frequencies))
    value = (phases @ weights) / (2.0 * np.pi)
    return complex(value) if np.ndim(lag) == 0 else value


def _float_gcd(values: np.ndarray, tol: float = 1e-9) -> float:
    """Approximate positive GCD of a set of real numbers."""
    g = 0.0
    for v in np.abs(np.asarray(values, dtype=float)):
        if v < tol:
            continue
        a, b = (g, v) if g > v else (v, g)
        while b > tol:
            a, b = b, np.fmod(a, b)
        g = a
    return g


def parseval_resolvent(
    spec: DiscreteBathSpec, f: np.ndarray, n_quad: int = 0, domega: float | None = None
) -> float:
    """Recover sum_k |f_k|^2 from a trajectory through the inverse kernel.

    Requires mode frequencies on a uniform grid omega_k = m_k * domega
    (integer m_k): the phase functions are then orthogonal over one
    period P = 2 pi / domega and

        sum_k |f_k|^2 = (domega^2 / 2 pi) *
            int_P int_P zeta(t) G(t, s) conj(zeta(s)) dt ds.

    The double integral is evaluated with the periodic rectangle rule,
    which is exact for the trigonometric polynomials involved once the
    number of quadrature nodes exceeds twice the largest frequency index.
    Note the pairing: the inverse kernel contracts zeta against
    conj(zeta), the mirror of the covariance law E[zeta_t conj(zeta_s)] =
    K(s, t).
    """
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    shifted = spec.shifted_frequencies
    if domega is None:
        domega = _float_gcd(shifted)
    if domega <= 0:
        raise ValueError("frequencies must lie on a uniform commensurate grid")
    ratios = shifted / domega
    indices = np.round(ratios).astype(int)
    if not np.allclose(ratios, indices, atol=1e-9):
        raise ValueError("frequencies must lie on a uniform commensurate grid")
    period = 2.0 * np.pi / domega
    if n_quad <= 0:
        n_quad = max(4 * int(np.max(np.abs(indices))) + 8, 16)
    t = np.arange(n_quad) * period / n_quad
    dt = period / n_quad
    zeta = spec.feature_columns(t) @ np.conj(f)
    g = inverse_kernel_eval(spec, t[:, None], t[None, :])
    quad = np.einsum("i,ij,j->", zeta, g, np.conj(zeta)) * dt * dt
    return float(np.real(quad) * domega**2 / (2.0 * np.pi))


def quadrature_commutators(handle: KernelHandle, t: float, s: float, tol: float = 1e-12):
    """Commutators of the quadrature processes X, Y at times (t, s).

    [X(t), X(s)] = [Y(t), Y(s)] = (i/2) Im K(t, s) times identity and
    [X(t), Y(s)] = (1/2i) Re K(t, s).  The quadrature families commute at
    all lags iff the kernel is real-valued (spectrum symmetric with
    |g(omega)| = |g(-omega)|); ``commuting`` reports |Im K| <= tol.
    """
    if not handle.pointwise:
        raise ValueError("delta kernel not pointwise evaluable")
    value = kernel_eval(handle, t, s)
    xx_comm = 0.5j * value.imag
    xy_comm = value.real / 2j
    return xx_comm, xy_comm, bool(abs(value.imag) <= tol)


def thermal_double(spec: DiscreteBathSpec, kT: float) -> ThermalPair:
    """Decompose a bath at temperature kT into two vacuum baths.

    Bose occupation n(omega) = 1/(exp(omega/kT) - 1) requires every mode
    frequency to be positive.
    """
    if kT <= 0:
        raise ValueError("temperature must be positive")
    if np.any(spec.frequencies <= 0):
        raise ValueError("thermal occupation undefined")
    with np.errstate(over="ignore"):
        occupation = 1.0 / np.expm1(spec.frequencies / kT)
    spec1 = replace(spec, couplings=np.sqrt(occupation + 1.0) * spec.couplings)
    spec2 = replace(spec, couplings=np.sqrt(occupation) * np.conj(spec.couplings))
    return ThermalPair(spec1=spec1, spec2=spec2, temperature=kT)
