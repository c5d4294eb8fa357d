"""Standing waves of near-parallel vortex filaments around a central vortex.

Spectral Galerkin numerics on the torus for the homographic reduction of the
vortex filament system: central configurations, the Fourier multipliers of
the linearised operator and their zero modes, continuation of the
bifurcating standing-wave branch, and time integration for cross-checks.
"""

from .central import (
    CentralConfig,
    cc_jacobian,
    cc_residual,
    nested_polygon_seed,
    polygon_config,
    polygon_radius,
    solve_cc,
)
from .continuation import (
    AsymptoticsReport,
    Branch,
    BranchPoint,
    ContinuationSettings,
    continue_branch,
    full_space_residual,
    kernel_split,
    newton_correct,
    predictor,
    translation_defect,
    verify_asymptotics,
)
from .errors import (
    CollisionError,
    ConfigurationError,
    ContinuationError,
    DegenerateError,
    DivergenceError,
    DomainError,
    FilamentError,
    InfeasibleError,
    PreconditionError,
    SingularityError,
    SymmetryError,
)
from .evolution import (
    FilamentState,
    ScalarWave,
    StandingWaveReport,
    evolve_filaments,
    evolve_pde,
    filament_invariants,
    reconstruct,
    step_filaments,
    step_pde,
    validate_standing_wave,
)
from .field import (
    Grid2D,
    SpectralField,
    SymmetricField,
    dealiased_pointwise,
    embed,
    read_coeffs_csv,
    restrict,
    sobolev_norm,
    to_coeffs,
    to_grid,
    write_coeffs_csv,
)
from .residual import ResidualWorkspace, assemble_dense, eval_g, jacobian_apply, residual
from .spectrum import (
    BifurcationPoint,
    GapCertificate,
    OperatorParams,
    bifurcation_frequency,
    certify_gap,
    eigenpair,
    eigenvalue,
    multiplier_matrix,
    resonant_set,
)

__version__ = "0.1.0"
