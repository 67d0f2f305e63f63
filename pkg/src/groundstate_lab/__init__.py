"""Radial groundstates of quasilinear equations with competing powers.

The package solves

    -Delta_p u + eps |u|^{p-2} u - |u|^{q-2} u + |u|^{l-2} u = 0

and its limit problems by shooting from the origin, evaluates norms and
integral identities, compares against closed-form extremals, and measures
the rates at which groundstates degenerate as ``eps -> 0``.
"""

from .core_model import (
    Branch,
    EquationKind,
    ParameterError,
    ProblemParams,
    RatePrediction,
    RateWarning,
    Regime,
    RegimeError,
    RegimeTag,
    classify_regime,
    f_eval,
    F_eval,
    k_factor,
    nonlinearity_coefficients,
    p_star,
    predicted_rates,
)
from .shooting import (
    BracketWarning,
    InsufficientTailError,
    IntegratorConfig,
    NoBracketError,
    RadialProfile,
    SeriesStartError,
    ShotClass,
    StepFailureError,
    TailModel,
    attach_tail,
    classify,
    find_groundstate,
    integrate,
)
from .norms import (
    IdentityReport,
    IntegrabilityError,
    NormReport,
    critical_relation_residuals,
    grad_norm_Lp,
    identity_report,
    nehari_residual,
    norm_Ls,
    norm_report,
    pohozaev_residual,
    S_from_profile,
    subcritical_limits,
    supercritical_targets,
    to_minimizer,
)
from .closed_form import (
    ConstraintError,
    ExtremalParams,
    TestFunctionParams,
    U_eval,
    W_eval,
    beta_constants,
    extremal_profile,
    extremal_residual,
    minimizer_profile,
    optimal_test_scales,
    psi_value,
    q_star,
    sobolev_constant,
    test_quotient,
)
from .asymptotics import (
    DegenerateFitError,
    FitResult,
    NoSolutionError,
    SweepError,
    SweepRecord,
    SweepTable,
    barrier_check,
    blow_up_norm_check,
    canonical_rescale,
    concentration_lambda,
    decay_exponent_check,
    default_eps_grid,
    fit_power_law,
    pointwise_bound_checks,
    radial_residual,
    run_sweep,
    sandwich_constants,
    solve_record,
)
from .estimators import GroundstateSolver, PowerLawFitter

__version__ = "0.1.0"
