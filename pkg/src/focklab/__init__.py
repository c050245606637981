"""focklab: desk-scale bosonic Fock-space laboratory.

Builds truncated symmetric Fock spaces over finitely many modes, the ladder
and displacement operators on them, partially factorized initial states and
their superpositions, exact many-body propagation, mean-field dynamics, and
one-particle reduced density matrices -- then measures, as empirical scaling
laws in the particle number, how fast the reduced density matrices approach
their mean-field targets.
"""

from .combinatorics import (
    KrasikovBound,
    ThetaCoefficients,
    WeightedMoment,
    admissible_m,
    harmonic_number,
    krasikov_bound,
    laguerre,
    log_dnm,
    theta_weyl_coefficients,
    weighted_number_moment,
    zeta,
)
from .dynamics import (
    PropagatorPlan,
    evolve_fock,
    fluctuation_apply,
    make_plan,
    number_moment,
)
from .errors import (
    CapacityError,
    ConfigError,
    DegeneracyError,
    ExactRegimeError,
    FocklabError,
    IntegrationError,
    KrylovError,
    SectorError,
)
from .fock import (
    FockBasis,
    FockVector,
    SparseOperator,
    basis_state,
    build_hamiltonian,
    dump_basis_json,
    dump_operator_json,
    dump_vector_json,
    enumerate_basis,
    field_apply,
    field_matrix,
    fixed,
    ladder_apply,
    ladder_matrix,
    number_operator,
    second_quantize,
    sector_project,
    truncated,
    vacuum,
    weyl_apply,
    weyl_headroom,
)
from .harness import (
    ConvergenceReport,
    ExperimentConfig,
    FitResult,
    SweepRow,
    fit_rate,
    merge_reports,
    report_from_csv,
    run_convergence_sweep,
    run_superposition_sweep,
)
from .hartree import (
    HartreeTrajectory,
    evolve_hartree,
    hartree_energy,
    hartree_rhs,
    trajectory_for_interpolation,
)
from .invariants import SuiteReport, run_invariant_suite
from .modes import ModeSystem
from .rdm import (
    OneParticleDM,
    distance,
    mixed_target,
    projector,
    reduced_dm,
    transition_matrix,
)
from .states import (
    ExcitationState,
    SuperpositionSpec,
    coherent_state,
    gram_overlap,
    product_state,
    random_excitation,
    superposition,
    theta_state,
)

__version__ = "0.1.0"
