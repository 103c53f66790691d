"""
Bath correlation kernels
========================

A bath of harmonic modes is summarized by its two-time correlation
function K(t, s).  This demo builds kernels from an explicit mode list
and from an ohmic spectral density, checks the symmetry K(t,s)* = K(s,t),
strips decoupled modes, and splits a finite-temperature bath into its
two vacuum components.
"""

import numpy as np

from nmqsd import (
    ContinuumBathSpec,
    DiscreteBathSpec,
    KernelHandle,
    discretize_continuum,
    faithful_reduce,
    inverse_kernel_eval,
    kernel_eval,
    quadrature_commutators,
    thermal_double,
)

# two modes, one of them decoupled
spec = DiscreteBathSpec(frequencies=[0.5, 1.5, 2.5], couplings=[1.0, 0.0, 0.5j])
reduced, was_faithful = faithful_reduce(spec, tol=0.0)
print(f"modes {spec.n_modes} -> {reduced.n_modes} after faithfulness reduction "
      f"(was faithful: {was_faithful})")

handle = KernelHandle.discrete(reduced)
for lag in (0.0, 0.5, 2.0):
    value = kernel_eval(handle, lag, 0.0)
    mirror = kernel_eval(handle, 0.0, lag)
    print(f"K(lag={lag:3.1f}) = {value:+.6f}   conj-symmetry defect "
          f"{abs(value - np.conj(mirror)):.1e}")

# the inverse kernel exists once every mode couples
g0 = inverse_kernel_eval(reduced, 0.0, 0.0)
print(f"inverse kernel at zero lag: {g0:.6f} (real, positive)")

# quadrature processes commute only for real-valued kernels
sym = KernelHandle.discrete(DiscreteBathSpec([-1.0, 1.0], [1.0, 1.0]))
_, _, commuting = quadrature_commutators(sym, 0.7, 0.0)
_, _, not_commuting = quadrature_commutators(handle, 0.7, 0.0)
print(f"symmetric spectrum commutes: {commuting}; one-sided spectrum: {not_commuting}")

# an ohmic continuum, discretized on a midpoint grid
ohmic = ContinuumBathSpec("ohmic", {"eta": 1.0, "cutoff": 1.0})
disc = discretize_continuum(ohmic, n_modes=512, omega_max=16.0)
print(f"ohmic bath: {disc.n_modes} modes, K(0) = {kernel_eval(KernelHandle.discrete(disc), 0, 0).real:.4f} "
      f"(analytic eta*cutoff^2/pi = {1.0 / np.pi:.4f})")

# a thermal bath doubles into spontaneous and stimulated vacuum baths
base = DiscreteBathSpec([1.0, 2.0], [1.0, 0.7])
pair = thermal_double(base, kT=1.5)
for k in range(2):
    g1, g2 = abs(pair.spec1.couplings[k]), abs(pair.spec2.couplings[k])
    print(f"mode {k}: |g1|^2 - |g2|^2 = {g1**2 - g2**2:.6f} "
          f"vs |g|^2 = {abs(base.couplings[k])**2:.6f}")
