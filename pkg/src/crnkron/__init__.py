"""Complex-balanced mass-action reaction networks.

Structure (deficiency, linkage classes, moieties), Laplacian kinetics,
equilibria and Lyapunov analysis, time integration, and Kron reduction by
Schur complements of the balanced Laplacian.
"""

from .equilibria import (
    ClassificationVerdict,
    ConvergenceError,
    KernelVector,
    complex_equilibrium_residual,
    equilibrium_membership,
    find_complex_equilibrium,
    balanced_exp_form,
    lyapunov_dissipation,
    lyapunov_value,
    positive_kernel_vector,
    sample_equilibrium_set,
    unique_equilibrium_in_class,
)
from .kinetics import (
    GaugedLaplacian,
    NotComplexEquilibriumError,
    WeightedLaplacian,
    build_laplacian,
    complex_flux_balance,
    gauge_laplacian,
    mass_action_rates,
    standard_form_field,
    vector_field,
)
from .network import (
    DuplicateReactionWarning,
    NetworkSyntaxError,
    Reaction,
    ReactionNetwork,
    StructureReport,
    build_structure,
    canonical_complex_name,
    format_network,
    parse_network,
)
from .reduction import (
    InclusionReport,
    IsolatedComplexWarning,
    ReducedNetwork,
    ReductionError,
    equilibria_inclusion_check,
    extract_rate_constants,
    reduce_network,
    schur_complement,
)
from .simulation import (
    ComparisonReport,
    IntegrationError,
    InvariantReport,
    Trajectory,
    compare,
    integrate,
    monitor,
    simulate,
    simulate_reduced,
)

__version__ = "0.1.0"
