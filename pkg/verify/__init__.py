from verify.base import (
    DEFAULT_T_POINTS,
    SUITES,
    FunctionCase,
    Suite,
    SuiteContext,
    VerificationError,
    VerificationReport,
    WorstLocation,
    default_t_grid,
    dyadic_family,
    staircase_family,
)
from verify.suites import (
    merge_reports,
    verify_char_lower_bound,
    verify_corollary,
    verify_converse,
    verify_dilation,
    verify_fitted_stability,
    verify_forward,
    verify_gh_formulas,
    verify_lemma_identity,
    verify_lemma_infimum,
    verify_pg_qg_bounds,
    verify_remark_llogl,
    verify_remark_p0_1,
    verify_zygmund_recovery,
)

__all__ = [
    "DEFAULT_T_POINTS",
    "SUITES",
    "FunctionCase",
    "Suite",
    "SuiteContext",
    "VerificationError",
    "VerificationReport",
    "WorstLocation",
    "default_t_grid",
    "dyadic_family",
    "merge_reports",
    "staircase_family",
    "verify_char_lower_bound",
    "verify_converse",
    "verify_corollary",
    "verify_dilation",
    "verify_fitted_stability",
    "verify_forward",
    "verify_gh_formulas",
    "verify_lemma_identity",
    "verify_lemma_infimum",
    "verify_pg_qg_bounds",
    "verify_remark_llogl",
    "verify_remark_p0_1",
    "verify_zygmund_recovery",
]
