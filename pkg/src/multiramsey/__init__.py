"""Multi-parameter phase estimation with multi-mode Ramsey interferometers.

Fisher information and Cramer-Rao bounds for single-particle probes spread
over D+1 modes, optimal probe states, real splitter synthesis (beam-splitter
cascades and spin rotations) and a Monte-Carlo simulator of noisy population
detection with maximum-likelihood estimation.
"""

__version__ = "0.1.0"

from .core import (
    FisherMatrix,
    OrthogonalMatrix,
    ParametrizationMap,
    PhaseVector,
    ProbeState,
    make_parametrization,
    phases_from_params,
    validate_orthogonal,
)
from .errors import (
    ConfigError,
    DegenerateLikelihood,
    InvalidArgument,
    InvalidParametrization,
    NonConvergence,
    NotOrthogonal,
    RamseyError,
    SingularFisherMatrix,
    ZeroAmplitude,
    ZeroResidual,
)
from .fisher import (
    RamseyProtocol,
    cfim,
    output_probabilities,
    probability_jacobian,
    qcrb_total_variance,
    qfim_poisson,
    qfim_pure,
    ramsey,
    taylor_probabilities,
)
from .probes import (
    BoundReport,
    indirect_bound,
    indirect_phi_bound,
    neighbor_from_reference_jacobian,
    optimal_probe_phi,
    optimal_probe_theta,
    optimize_probe_numeric,
    qcrb_individual,
    qcrb_phi_opt,
    qcrb_theta_opt,
    variance_bound_theta,
)
from .simulator import (
    DetectionModel,
    ExperimentConfig,
    MleConfig,
    VarianceEstimate,
    cfim_zeta,
    mle_estimate,
    osrs_optimize,
    osrs_populations,
    osrs_protocol,
    osrs_variance,
    run_monte_carlo,
    sweep_zeta_grid,
    zeta_db,
)
from .synthesis import (
    CascadeAngles,
    SpinRotationSpec,
    bs_cascade_angles,
    bs_cascade_unitary,
    random_orthogonal,
    random_unitary,
    spin_index,
    spin_levels,
    spin_rotation,
    wigner_d_matrix,
    wigner_small_d,
)
