from calderon.base import (
    KernelSpec,
    KernelSpecError,
    OperatorProfile,
    P_op,
    Q_op,
    R_double_star,
    R_op,
    dilation_check,
    operator_profile,
    profile_and_rearrange,
)
from calderon.kernel import Ak_bound, Ak_norm, R_weak_norm, c_phi, kernel_cumulative, kernel_eval

__all__ = [
    "Ak_bound",
    "Ak_norm",
    "KernelSpec",
    "KernelSpecError",
    "OperatorProfile",
    "P_op",
    "Q_op",
    "R_double_star",
    "R_op",
    "R_weak_norm",
    "c_phi",
    "dilation_check",
    "kernel_cumulative",
    "kernel_eval",
    "operator_profile",
    "profile_and_rearrange",
]
