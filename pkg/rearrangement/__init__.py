from rearrangement.base import (
    DecreasingStep,
    FunctionError,
    PiecewiseHyperbolic,
    SimpleFunction,
    StepFunction,
)
from rearrangement.operations import distribution, double_star, gh_split, rearrange, rearrange_step, to_simple

__all__ = [
    "DecreasingStep",
    "FunctionError",
    "PiecewiseHyperbolic",
    "SimpleFunction",
    "StepFunction",
    "distribution",
    "double_star",
    "gh_split",
    "rearrange",
    "rearrange_step",
    "to_simple",
]
