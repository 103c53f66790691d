"""
Mercer decomposition and the kernel RKHS
========================================

Restricted to a finite horizon every bath kernel decomposes into
orthonormal modes, K(t,s) = sum_n lambda_n phi_n(t) phi_n(s)*.
The classic example is K = min(t,s) on [0,1], whose eigenvalues are
1/(pi (n-1/2))^2.  On top of the modes sits a reproducing-kernel
Hilbert space; bath amplitude vectors embed into it isometrically.
"""

import numpy as np

from nmqsd import (
    DiscreteBathSpec,
    KernelHandle,
    TimeGrid,
    causal_basis,
    embed_feature,
    mercer_decompose,
    representer,
    rkhs_inner,
)

grid = TimeGrid(1.0, 800)
basis = mercer_decompose(lambda t, s: np.minimum(t, s), grid)
print("min(t,s) on [0,1]: eigenvalues vs 1/(pi (n-1/2))^2")
for n in range(5):
    exact = 1.0 / ((n + 0.5) * np.pi) ** 2
    print(f"  n={n+1}:  {basis.eigenvalues[n]:.8f}   exact {exact:.8f}")

# a discrete bath kernel has rank equal to its mode count
spec = DiscreteBathSpec([0.4, 1.3, 2.7], [1.0, 0.6, 0.8])
handle = KernelHandle.discrete(spec)
bath_basis = mercer_decompose(handle, TimeGrid(3.0, 400), trunc_tol=1e-12)
print(f"\n3-mode bath kernel: numerical rank {bath_basis.rank}")

# reproducing property: pairing with a representer evaluates the function
k_t = representer(bath_basis, bath_basis.grid.points[120])
k_s = representer(bath_basis, bath_basis.grid.points[300])
gram = rkhs_inner(k_t, k_s, bath_basis)
direct = handle(bath_basis.grid.points[120], bath_basis.grid.points[300])
print(f"<k_t, k_s> = {gram:+.6f}  vs  K(t,s) = {direct:+.6f}")

# amplitude vectors embed isometrically: <emb(f1), emb(f2)> = <f1|f2>
rng = np.random.default_rng(1)
f1 = rng.normal(size=3) + 1j * rng.normal(size=3)
f2 = rng.normal(size=3) + 1j * rng.normal(size=3)
lhs = rkhs_inner(embed_feature(f1, spec, bath_basis), embed_feature(f2, spec, bath_basis), bath_basis)
print(f"isometry defect: {abs(lhs - np.vdot(f1, f2)):.2e}")

# running-horizon (causal) eigenvalues grow with the window
print("\nleading eigenvalue of the running-horizon expansion (single mode, |g|^2 = 0.81):")
single = KernelHandle.discrete(DiscreteBathSpec([1.1], [0.9]))
for t in (0.5, 1.0, 2.0):
    lam1 = causal_basis(single, t, 200).eigenvalues[0]
    print(f"  horizon {t:3.1f}: lambda_1 = {lam1:.6f} (= 0.81 t = {0.81 * t:.6f})")
