"""Hyperbolized three-level explicit time integration for y' = -A*y + f.

Adding a small second time derivative to a stiff parabolic system buys a
much weaker explicit step restriction: the critical step grows from
O(1/lambda_max) to sqrt(4*eps/lambda_max).  The price is a perturbation
error proportional to eps and one-step maps whose norms can transiently
exceed one even inside the stable region.  This package implements the
stepper, the closed-form error machinery and the amplification-matrix
stability diagnostics, plus experiment drivers behind the ``hmscheme``
command line tool.
"""

from .analytic import (
    ErrorBoundInputs,
    HMModalSolution,
    central_diff_truncation,
    hm_error_bound,
    hm_modal_exact,
    hm_system_exact,
    local_error_model,
    max_abs_second_derivative,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    HMSchemeError,
    IndefiniteOperator,
    InsufficientData,
    InvalidParams,
    NegativeDiscriminant,
    NonFinite,
    NonSymmetric,
    NumericalError,
    SingularIndicator,
    StepCountOverflow,
)
from .experiments import (
    ConvergenceRow,
    ConvergenceTable,
    ExperimentConfig,
    Table,
    fit_order,
    run_block_powers,
    run_convergence,
    run_heat1d,
    run_hm_error,
    run_policy_bounds,
    run_powers,
    run_stability_report,
    run_sweep_mu,
    write_csv,
)
from .linalg import SymmetricOperator, expm_apply, phi, spectral_decompose, two_norm
from .problems import (
    Heat1DProblem,
    build_heat1d,
    heat1d_analytic_eigenvalues,
    heat1d_initial,
    scalar_problem,
)
from .scheme import (
    BootstrapMethod,
    HMParams,
    SchemeState,
    bootstrap,
    dufort_frankel_step,
    explicit_euler_integrate,
    hm_residual,
    hm_step,
    integrate,
    step_count,
)
from .stability import (
    AmplificationBlock,
    BlockEigen,
    ConstEps,
    LinearInH,
    LinearInTau,
    ModeDiagnostics,
    MonotonicityWitness,
    PolicyBound,
    SamarskiiVerdict,
    StabilityReport,
    block_eigenvalues,
    build_amplification,
    build_block,
    epsilon_policy_bounds,
    exact_separation,
    full_power_norm_curve,
    growth_indicator,
    monotonicity_witness,
    operator_blocks,
    power_norm_curve,
    reference_curves,
    samarskii_check,
    stability_report,
)

__version__ = "0.1.0"
