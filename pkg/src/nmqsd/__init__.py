"""Non-Markovian quantum state diffusion toolkit.

Builds bath correlation kernels, decomposes them on a finite horizon
(Nystrom/Mercer), samples the complex Gaussian trajectories that label
coherent bath configurations, solves the exact two-level dynamics and
its memoryless limit, Monte-Carlo-averages trajectory states into
reduced density matrices, and validates everything against a truncated
Fock-space simulation of the microscopic model.
"""

from .baths import (
    ContinuumBathSpec,
    DiscreteBathSpec,
    KernelHandle,
    ThermalPair,
    discretize_continuum,
    faithful_reduce,
    inverse_kernel_eval,
    kernel_eval,
    kernel_matrix,
    parseval_resolvent,
    quadrature_commutators,
    thermal_double,
)
from .fock_oracle import (
    FockTruncation,
    TotalState,
    bargmann_project,
    build_interaction_generator,
    ehrenfest_residual,
    equal_time_commutator_residual,
    io_relation_residual,
    propagate_total,
    propagate_unitary,
    reduced_density,
    single_excitation_propagate,
)
from .jaynes_cummings import (
    EXCITED,
    GROUND,
    JcTrajectoryState,
    LambdaSolution,
    ds_residual,
    dyson_partial_sum,
    dyson_terms,
    gateaux_state_derivative,
    jc_propagator,
    jc_state,
    jc_state_series,
    norm_conservation_defect,
    solve_lambda_volterra,
)
from .mercer import (
    MercerBasis,
    RkhsElement,
    causal_basis,
    embed_feature,
    mercer_decompose,
    representer,
    rkhs_inner,
)
from .sampling import (
    AmplitudeSample,
    ComplexTrajectory,
    empirical_covariance,
    sample_amplitudes,
    sample_trajectory_batch,
    sample_trajectory_kl,
    trajectory_from_amplitudes,
)
from .timegrid import TimeGrid
from .unravel import (
    JcNonMarkov,
    MarkovUnravelling,
    ReducedStateSeries,
    SystemModel,
    markov_propagate,
    mc_reduced_state,
    shifted_form_residual,
)

__version__ = "0.1.0"
