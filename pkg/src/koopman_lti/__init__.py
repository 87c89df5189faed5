"""Exact LPV Koopman embeddings of control-affine systems, optimal constant
input matrices via gridded LMI synthesis, and certified error bounds."""

from .dynamics import (
    Box,
    NonlinearSystem,
    NumericOverflowError,
    Trajectory,
    builtin_example,
    simulate,
    step,
    white_noise_input,
)
from .lifting import (
    InvarianceViolationError,
    KoopmanLpvModel,
    LiftError,
    LtiKoopmanModel,
    ObservableDictionary,
    RankDeficiencyError,
    StateRecoveryError,
    builtin_example_dictionary,
    input_matrix,
    koopman_A,
    lift,
    lpv_model,
    simulate_lifted,
    simulate_lti,
)
from .edmd import (
    DataMatrices,
    RankDeficiencyWarning,
    build_data_matrices,
    edmd_autonomous,
    edmd_input_known_A,
    edmd_with_input,
)
from .sdp_solver import (
    BlockFamily,
    SdpProblem,
    SdpSolution,
    SolverOptions,
    VarLayout,
    feasibility,
    min_eig_margin,
    solve,
)
from .lmi_synthesis import (
    AxisSpec,
    CertificateError,
    GridSpec,
    InfeasibleProblemError,
    SchedulingGrid,
    SynthesisResult,
    UnstableSystemError,
    analyze,
    assemble_h2,
    assemble_l2,
    default_margin,
    make_grid,
    reduce_constraints,
    subsample,
    synthesize,
)
from .error_analysis import (
    ErrorBound,
    ErrorTrace,
    amplitude_bound,
    beta,
    dissipation_check,
    error_trajectory,
    max_singular_value,
    spectral_radius,
)

__version__ = "0.1.0"
