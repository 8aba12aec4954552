"""Numerical checks for composition operators on the disc and bidisc.

Weighted derivative-energy norms, preimage counting functions, a
substitution identity with two independently computed sides, box and
capacity conditions on the bidisc, and a CLI that writes deterministic
reports for every check.
"""

from . import _threads  # noqa: F401  -- must run before numpy loads

from .errors import (
    AccuracyError,
    BoundaryAmbiguityError,
    ConfigError,
    ConsistencyError,
    DomainError,
    HolocompError,
    NumericalFailureError,
    UndefinedBoundError,
    UnsupportedReportError,
)
from .quadrature import (
    IntegralResult,
    QuadratureRule,
    SampleCloud,
    build_refined_rule,
    build_rule,
    coarsen_rule,
    integrate2d,
    integrate_disc,
    mc_mean,
    sample_dVbeta,
)
from .series import (
    BergmanWeight,
    TaylorGrid1D,
    TaylorGrid2D,
    WeightPair,
    antiderivative,
    bergman_norm,
    dirichlet_energy_integral,
    dirichlet_norm_coeff,
    dirichlet_seminorm_coeff_1d,
    energy_components,
    eval2d,
    mixed_partial,
    partial1,
    partial2,
    test_function,
)
from .symbols import (
    BidiscSymbol,
    DiscSymbol,
    FiniteBlaschke,
    Moebius,
    PolyPair,
    Polynomial,
    Separated,
    bidisc_from_json,
    bidisc_to_json,
    identity_symbol,
    symbol_from_json,
    symbol_to_json,
)
from .nevanlinna import (
    AlemanRecord,
    CountingFunctionQuery,
    RatioReport,
    SeparatedVerdict,
    aleman_diagnostic,
    counting_function,
    counting_function_grid,
    separated_verdict,
    sup_ratio,
    FLAG_BOUNDARY,
    FLAG_CENTER_VALUE,
    FLAG_RESIDUAL,
)
from .criteria import (
    BUILTIN_INTEGRANDS,
    BWRecord,
    EquivalenceReport,
    ExpansionReport,
    IdentityReport,
    KernelRatioQuery,
    KernelRatioReport,
    PairIntegrand,
    balooch_wu_family,
    balooch_wu_ratio,
    kernel_ratio_sup,
    operator_norm_bound,
    resolution_parameters,
    tied_weight,
    verify_change_of_variables,
    verify_separated_norm_expansion,
)
from .carleson import (
    BidiscKernel,
    BoxUnion,
    CarlesonBox,
    KernelIntegralReport,
    McEstimate,
    OneBoxReport,
    PsiReport,
    PullbackMeasure,
    box_volume,
    kernel_integral_test,
    one_box_sufficient_check,
    psi_admissibility,
    pullback_box_volume,
    v_beta_arc,
)
from .capacity import (
    BOX_CONVENTION,
    CapacityProblem,
    CapacityResult,
    ConditionReport,
    KernelOperator,
    RectUnion,
    TorusGrid,
    boxes_for_rects,
    capacity,
    capacity_bruteforce,
    capacity_condition_check,
    compare_capacity_kernels,
    kernel_matrix,
)
from .reports import (
    canonical_json_bytes,
    csv_bytes,
    emit_heatmap,
    sanitize,
    write_atomic,
    write_csv,
    write_json_report,
)

__version__ = "1.0.0"

__all__ = [
    "AccuracyError",
    "BoundaryAmbiguityError",
    "ConfigError",
    "ConsistencyError",
    "DomainError",
    "HolocompError",
    "NumericalFailureError",
    "UndefinedBoundError",
    "UnsupportedReportError",
    "IntegralResult",
    "QuadratureRule",
    "SampleCloud",
    "build_refined_rule",
    "build_rule",
    "coarsen_rule",
    "integrate2d",
    "integrate_disc",
    "mc_mean",
    "sample_dVbeta",
    "BergmanWeight",
    "TaylorGrid1D",
    "TaylorGrid2D",
    "WeightPair",
    "antiderivative",
    "bergman_norm",
    "dirichlet_energy_integral",
    "dirichlet_norm_coeff",
    "dirichlet_seminorm_coeff_1d",
    "energy_components",
    "eval2d",
    "mixed_partial",
    "partial1",
    "partial2",
    "test_function",
    "BidiscSymbol",
    "DiscSymbol",
    "FiniteBlaschke",
    "Moebius",
    "PolyPair",
    "Polynomial",
    "Separated",
    "bidisc_from_json",
    "bidisc_to_json",
    "identity_symbol",
    "symbol_from_json",
    "symbol_to_json",
    "AlemanRecord",
    "CountingFunctionQuery",
    "RatioReport",
    "SeparatedVerdict",
    "aleman_diagnostic",
    "counting_function",
    "counting_function_grid",
    "separated_verdict",
    "sup_ratio",
    "FLAG_BOUNDARY",
    "FLAG_CENTER_VALUE",
    "FLAG_RESIDUAL",
    "BUILTIN_INTEGRANDS",
    "BWRecord",
    "EquivalenceReport",
    "ExpansionReport",
    "IdentityReport",
    "KernelRatioQuery",
    "KernelRatioReport",
    "PairIntegrand",
    "balooch_wu_family",
    "balooch_wu_ratio",
    "kernel_ratio_sup",
    "operator_norm_bound",
    "resolution_parameters",
    "tied_weight",
    "verify_change_of_variables",
    "verify_separated_norm_expansion",
    "BidiscKernel",
    "BoxUnion",
    "CarlesonBox",
    "KernelIntegralReport",
    "McEstimate",
    "OneBoxReport",
    "PsiReport",
    "PullbackMeasure",
    "box_volume",
    "kernel_integral_test",
    "one_box_sufficient_check",
    "psi_admissibility",
    "pullback_box_volume",
    "v_beta_arc",
    "BOX_CONVENTION",
    "CapacityProblem",
    "CapacityResult",
    "ConditionReport",
    "KernelOperator",
    "RectUnion",
    "TorusGrid",
    "boxes_for_rects",
    "capacity",
    "capacity_bruteforce",
    "capacity_condition_check",
    "compare_capacity_kernels",
    "kernel_matrix",
    "canonical_json_bytes",
    "csv_bytes",
    "emit_heatmap",
    "sanitize",
    "write_atomic",
    "write_csv",
    "write_json_report",
]
