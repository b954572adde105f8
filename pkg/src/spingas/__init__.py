"""Simulator for semi-quantal spin gases.

Qubits ride on classically moving particles; classical proximity events apply
pairwise gates (XX, Ising or XXX). Single trajectories are evolved in the
single-excitation subspace or the full Hilbert space, and trajectory ensembles
give the density operator, its entropies and averaged concurrences.
"""

__version__ = "0.1.0"

from .classical import (  # noqa: E402
    BallState,
    InteractionEvent,
    LatticeConfiguration,
    billiard_init,
    billiard_next_event,
    billiard_resolve,
    billiard_run,
    chain_step,
    lattice_gas_step,
    random_pairs_step,
)
from .engines import (  # noqa: E402
    Coupling,
    embed_subspace,
    full_step_ising,
    full_step_xx_or_xxx,
    parity_populations,
    project_subspace,
    subspace_hamiltonian,
    subspace_step,
)
from .ensemble import (  # noqa: E402
    EnsembleAccumulator,
    InitialState,
    ModelSpec,
    TrajectoryPlan,
    convergence_monitor,
    finalize,
    run_ensemble,
    run_trajectory,
    simulate,
)
from .errors import (  # noqa: E402
    CapacityError,
    ConfigError,
    InvalidInputError,
    NumericalInvariantError,
    SpinGasError,
)
from .linalg import (  # noqa: E402
    diagonal_shannon_entropy,
    hermitian_eigendecomposition,
    partial_trace,
    unitary_exponential,
    von_neumann_entropy,
)
from .observables import (  # noqa: E402
    inhomogeneity,
    single_particle_probs,
    stationary_entropy_prediction,
    subspace_concurrence,
    total_concurrence,
    wootters_concurrence,
)
