"""Verification reports, function families and the suite registry."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Iterable, List, Optional, Sequence, Tuple, Type, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from calderon.base import KernelSpec
from libs.utils import XlabError, log_grid
from rearrangement.base import DecreasingStep, SimpleFunction

logger = logging.getLogger(__name__)

SUITES: Dict[str, Type["Suite"]] = {}

RATIO_SLACK = 1e-9
"""rounding allowance on inequalities whose constants are displayed exactly"""
DEFAULT_T_POINTS = 400
DEFAULT_SPAN_DECADES = 4.0


class VerificationError(XlabError, ValueError):
    """Suite preconditions not met."""

    pass


class WorstLocation(BaseModel):
    function: str = ""
    t: Optional[float] = None
    s: Optional[float] = None


class VerificationReport(BaseModel):
    """Outcome of one suite for one kernel spec."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    suite: str
    spec: Optional[Dict[str, Any]] = Field(None, description="Kernel spec echo")
    params: Dict[str, Any] = Field(default_factory=dict, description="Auxiliary parameters: p, V, grid, seed")
    worst_ratio: float
    worst_location: WorstLocation = Field(default_factory=WorstLocation)
    threshold: float
    passed: bool = False
    details: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _passed_matches_ratio(self):
        self.passed = bool(self.worst_ratio <= self.threshold)
        return self


def spec_summary(spec: Optional[KernelSpec]) -> Optional[Dict[str, Any]]:
    if spec is None:
        return None
    return {
        "p0": spec.p0,
        "p1": "inf" if spec.p1_infinite else spec.p1,
        "phi": spec.phi.label,
        "gamma": spec.phi.gamma,
        "log_exponents": list(spec.phi.log_exponents),
        "delta": spec.delta,
    }


@dataclass(frozen=True)
class FunctionCase:
    """A family member with a stable identifier for reports."""

    id: str
    f: SimpleFunction


Family = Sequence[Union[FunctionCase, SimpleFunction]]


def as_cases(family: Family) -> List[FunctionCase]:
    return [item if isinstance(item, FunctionCase) else FunctionCase(f"f{i}", item) for i, item in enumerate(family)]


def staircase_family(
    count: int,
    seed: int,
    min_pieces: int = 4,
    max_pieces: int = 32,
    max_value: float = 10.0,
    min_length: float = 1e-2,
    max_length: float = 1e2,
) -> List[FunctionCase]:
    """
    Seeded random staircases.

    Values are uniform in (0, max_value], lengths log-uniform in [min_length, max_length]; the atom order is random,
    so `SimpleFunction.as_step` gives non-monotone layouts.
    """
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(count):
        n = int(rng.integers(min_pieces, max_pieces + 1))
        values = max_value - rng.uniform(0.0, max_value, n)
        lengths = np.exp(rng.uniform(math.log(min_length), math.log(max_length), n))
        atoms = tuple((float(v), float(m)) for v, m in zip(values, lengths) if v > 0)
        cases.append(FunctionCase(f"staircase-{seed}-{i}", SimpleFunction(atoms)))
    return cases


def dyadic_family() -> List[FunctionCase]:
    """Indicators of (0, 2^k], k = -3..3, and dyadic staircases in decreasing and increasing layout."""
    cases = [FunctionCase(f"indicator-2^{k}", SimpleFunction.indicator(2.0**k)) for k in range(-3, 4)]
    steps = tuple((4.0 - j, 1.0) for j in range(4))
    halving = tuple((2.0**-j, 2.0**j) for j in range(5))
    cases.append(FunctionCase("staircase-4321", SimpleFunction(steps)))
    cases.append(FunctionCase("staircase-1234", SimpleFunction(tuple(reversed(steps)))))
    cases.append(FunctionCase("halving", SimpleFunction(halving)))
    cases.append(FunctionCase("halving-reversed", SimpleFunction(tuple(reversed(halving)))))
    return cases


def default_t_grid(
    fstar: DecreasingStep, points: int = DEFAULT_T_POINTS, span_decades: float = DEFAULT_SPAN_DECADES
) -> np.ndarray:
    """Log grid over [10^-span b_1, 10^span b_n] around the support of f*."""
    span = 10.0**span_decades
    if fstar.is_zero:
        return log_grid(1.0 / span, span, points)
    return log_grid(fstar.breakpoints[0] / span, fstar.support_end * span, points)


def safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """numerator / denominator with 0/0 read as 0."""
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denominator > 0, numerator / np.where(denominator > 0, denominator, 1.0), math.inf)
    return np.where(numerator <= 0, 0.0, out)


def worst_of(results: Iterable[Tuple[float, WorstLocation]]) -> Tuple[float, WorstLocation]:
    """Largest ratio in iteration order; ties keep the first."""
    best, where = 0.0, WorstLocation()
    for ratio, location in results:
        if ratio > best:
            best, where = ratio, location
    return best, where


@dataclass
class SuiteContext:
    """Resolved inputs shared by all suites of one run."""

    spec: Optional[KernelSpec] = None
    family: List[FunctionCase] = field(default_factory=dyadic_family)
    family_count: int = 8
    """size of each seeded family a suite draws on its own"""
    t_values: Optional[Tuple[float, ...]] = None
    """explicit t points, a default grid per function otherwise"""
    t_points: Optional[int] = None
    """points of the default grids, each suite's own default when unset"""
    t_span_decades: float = DEFAULT_SPAN_DECADES
    p: Optional[float] = None
    m_values: Tuple[float, ...] = (0.1, 1.0, 10.0)
    volume: float = 1.0
    alpha: float = 1.0
    samples: Optional[int] = None
    """random draws for lemma-infimum and dilation, their own defaults otherwise"""
    seed: int = 0

    def points(self, default: int = DEFAULT_T_POINTS) -> int:
        return self.t_points or default

    def t_grid(self, fstar: DecreasingStep) -> np.ndarray:
        if self.t_values:
            return np.unique(np.asarray(self.t_values, dtype=float))
        return default_t_grid(fstar, self.points(), self.t_span_decades)


class Suite:
    """
    Base class of the verification suites, adding subclasses to a global registry under `name`.

    Subclasses whose class name starts with '_' are not registered.
    """

    name: ClassVar[str] = ""
    needs_spec: ClassVar[bool] = True

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if not cls.__name__.startswith("_"):
            if cls.name in SUITES:
                logger.error(f"'{cls.name}' suite already registered by {SUITES[cls.name].__name__}")
            SUITES[cls.name] = cls

    @classmethod
    def run(cls, ctx: SuiteContext) -> VerificationReport:
        """
        Run the suite.

        :param ctx: resolved inputs
        :return: VerificationReport
        :raises VerificationError: when the inputs do not meet the suite preconditions
        """
        raise NotImplementedError()
