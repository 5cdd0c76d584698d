from admissible.base import (
    AdmissibleError,
    AdmissibleFunction,
    PhiDomainError,
    PhiMode,
    PhiReport,
    lemma_infimum_bound,
    lemma_infimum_numeric,
    lemma_infimum_search,
    logk,
    phi_check,
    phi_eval,
    weighted_exp_integral,
)

__all__ = [
    "AdmissibleError",
    "AdmissibleFunction",
    "PhiDomainError",
    "PhiMode",
    "PhiReport",
    "lemma_infimum_bound",
    "lemma_infimum_numeric",
    "lemma_infimum_search",
    "logk",
    "phi_check",
    "phi_eval",
    "weighted_exp_integral",
]
