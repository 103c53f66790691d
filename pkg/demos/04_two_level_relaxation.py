"""
Two-level relaxation: memory equation, series, and the memoryless limit
=======================================================================

The excited-state amplitude factor obeys
lambda'(t) = -int_0^t K(t,u) lambda(u) du.  A resonant mode gives
cos(|g| t), an exponential kernel gives a damped oscillator, and the
delta kernel gives pure exponential decay.  The alternating series
sum_k (-1)^k I_k converges to the same function, and the ensemble mean
state norm stays one even though single trajectories are unnormalized.
"""

import numpy as np

from nmqsd import (
    DiscreteBathSpec,
    KernelHandle,
    TimeGrid,
    dyson_partial_sum,
    norm_conservation_defect,
    solve_lambda_volterra,
)

# resonant mode: lambda = cos(t)
resonant = KernelHandle.discrete(DiscreteBathSpec([1.0], [1.0], detuning=1.0))
grid = TimeGrid(2 * np.pi, 4001)
lam = solve_lambda_volterra(resonant, grid)
print(f"resonant mode: max |lambda - cos t| = {np.max(np.abs(lam.values - np.cos(grid.points))):.2e}")

# alternating series: partial sums bracket, then converge
short = TimeGrid(1.0, 2001)
reference = solve_lambda_volterra(resonant, short)
for k_max in (1, 2, 4, 8):
    partial = dyson_partial_sum(resonant, short, k_max)
    dev = np.max(np.abs(partial.values - reference.values))
    print(f"  series through k={k_max}: max deviation {dev:.2e}")

# exponential kernel: damped oscillator
amplitude, decay = 4.0, 1.0
kernel = KernelHandle.exponential(amplitude, decay)
tgrid = TimeGrid(10.0, 8001)
lam_exp = solve_lambda_volterra(kernel, tgrid)
nu = np.sqrt(amplitude - decay**2 / 4)
closed = np.exp(-decay * tgrid.points / 2) * (
    np.cos(nu * tgrid.points) + decay / (2 * nu) * np.sin(nu * tgrid.points)
)
print(f"exponential kernel: max closed-form deviation {np.max(np.abs(lam_exp.values - closed)):.2e}")

# delta kernel: closed-form exponential relaxation
markov = solve_lambda_volterra(KernelHandle.markov(2.0), TimeGrid(3.0, 301))
print(f"delta kernel gamma=2: lambda(1) = {markov.values[100].real:.6f} (e^-1 = {np.exp(-1):.6f})")

# mean norm conservation: |lambda|^2 plus the averaged ground weight is 1
for name, handle, horizon in (
    ("resonant", resonant, 2 * np.pi),
    ("exponential", kernel, 5.0),
):
    g = TimeGrid(horizon, 4001 if name == "resonant" else 8001)
    sol = solve_lambda_volterra(handle, g)
    _, defects = norm_conservation_defect(sol, handle)
    print(f"norm conservation ({name}): max defect {np.max(np.abs(defects)):.2e}")
