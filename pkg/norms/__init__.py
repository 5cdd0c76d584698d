from admissible.base import logk
from norms.base import (
    LorentzParams,
    lexp_norm,
    llogl_log3_norm,
    llogl_norm,
    lorentz_norm,
    lorentz_norm_from_distribution,
    mphi_norm,
    philog_norm,
    weak_lorentz_norm,
    weak_lorentz_norm_from_distribution,
)

__all__ = [
    "LorentzParams",
    "lexp_norm",
    "llogl_log3_norm",
    "llogl_norm",
    "logk",
    "lorentz_norm",
    "lorentz_norm_from_distribution",
    "mphi_norm",
    "philog_norm",
    "weak_lorentz_norm",
    "weak_lorentz_norm_from_distribution",
]
