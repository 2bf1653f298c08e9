"""Phase-estimation bounds for lossy optical probes, and a counting readout.

The package compares single-mode superposition probes (balanced and
unbalanced cats) against two-mode entangled probes (NOON states, entangled
coherent states) for estimating an optical phase when photons are lost.
It computes quantum Fisher information and Cramér–Rao bounds, optimizes
probe shape and size under a fixed photon budget, and simulates the
practical displacement-plus-counting measurement with Bayesian inference.
"""

from .channels import (
    LossChannel,
    apply_channel,
    beamsplitter_loss,
    loss_kraus,
    partial_trace,
    ucs_lossy_rho_analytic,
)
from .fock import (
    DensityOperator,
    EigenSystem,
    FockVector,
    Operator,
    TruncationError,
    coherent_vector,
    default_cutoff,
    density_from_vector,
    displacement_operator,
    eigh,
    expectation,
    identity_operator,
    number_operator,
    number_state,
    phase_generator,
    phase_shift,
    rotate_phase,
    tensor,
)
from .measurement import (
    MeasurementConfig,
    OutcomeDistribution,
    PosteriorSummary,
    PriorSupportError,
    bayesian_simulate,
    classical_fisher,
    optimize_measurement,
    optimize_ucs_measurement,
    outcome_distribution,
    propagation_error_coherent,
)
from .precision import (
    PrecisionCurve,
    PrecisionPoint,
    chop_curve,
    chop_optimize,
    crb_curve,
    eta_grid_default,
    n_phi_ceiling,
    noon_chop_curve,
    noon_chop_n_max,
    optimize_ucs_a,
    snl_curve,
    ucs_optimal_curve,
)
from .qfi import (
    CatBasisEigensystem,
    DegenerateCatBasisError,
    QfiResult,
    cat_lossy_qfi,
    crb,
    lossy_qfi,
    qfi_closed_form,
    qfi_mixed,
    qfi_pure,
    ucs_lossy_eigensystem,
    ucs_lossy_qfi,
)
from .states import (
    Cat,
    Coherent,
    ECS,
    NO,
    NOON,
    NormalizationSet,
    StateSpec,
    UCS,
    alpha_of_a_lambertw,
    build_state,
    format_state_spec,
    mean_photons_through_phase,
    n_c,
    n_e,
    n_u,
    normalization_set,
    parse_state_spec,
    solve_alpha_of_a,
)

__version__ = "0.1.0"
