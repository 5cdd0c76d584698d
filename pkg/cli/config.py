"""Run configuration: pydantic models, file loading and command-line overrides."""

import json
import logging
import math
from typing import Any, Dict, List, Literal, Optional, Set, Tuple, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, field_serializer, field_validator, model_validator

from admissible.base import AdmissibleFunction
from calderon.base import KernelSpec
from libs.utils import XlabError
from rearrangement.base import SimpleFunction, StepFunction
from rearrangement.operations import to_simple
from verify.base import FunctionCase, dyadic_family, staircase_family

logger = logging.getLogger(__name__)


class ConfigError(XlabError):
    """Malformed configuration file, literal or override."""

    pass


def _inf_from_text(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "+inf"):
        return math.inf
    return value


class PhiConfig(BaseModel):
    gamma: float = Field(0.0, ge=0, description="Power exponent, 0 gives phi = 1")
    log_exponents: List[float] = Field(default_factory=list, description="Exponents of log_1, log_2, ... factors")

    @field_validator("log_exponents")
    @classmethod
    def _nonnegative(cls, value: List[float]) -> List[float]:
        if any(not (math.isfinite(b) and b >= 0) for b in value):
            raise ValueError(f"log exponents must be finite and >= 0, got {value}")
        return value

    def build(self) -> AdmissibleFunction:
        return AdmissibleFunction(gamma=self.gamma, log_exponents=tuple(self.log_exponents))


class SpecConfig(BaseModel):
    p0: float = Field(2.0, ge=1, allow_inf_nan=False, description="P exponent")
    p1: float = Field(4.0, description='Q exponent, "inf" accepted')
    phi: PhiConfig = Field(default_factory=PhiConfig)
    delta: Literal[0, 1] = Field(0, description="1 multiplies the P-weight by u, needs p0 = 1")

    @field_validator("p1", mode="before")
    @classmethod
    def _parse_inf(cls, value: Any) -> Any:
        return _inf_from_text(value)

    @field_serializer("p1")
    def _dump_inf(self, value: float) -> Union[float, str]:
        return "inf" if math.isinf(value) else value

    @model_validator(mode="after")
    def _check_range(self):
        if not self.p1 > self.p0:
            raise ValueError(f"p1 must be > p0, got p0={self.p0}, p1={self.p1}")
        if self.delta == 1 and self.p0 != 1:
            raise ValueError(f"delta = 1 needs p0 = 1, got p0={self.p0}")
        return self

    def build(self) -> KernelSpec:
        return KernelSpec(self.p0, self.p1, self.phi.build(), self.delta)


class FunctionConfig(BaseModel):
    """Function literal: atoms [[value, mass], ...] or steps [[breakpoint, value], ...]."""

    atoms: Optional[List[Tuple[float, float]]] = None
    steps: Optional[List[Tuple[float, float]]] = None

    @model_validator(mode="after")
    def _one_form(self):
        if self.atoms is not None and self.steps is not None:
            raise ValueError("function literal takes either 'atoms' or 'steps', not both")
        # raises FunctionError, a ValueError
        self.as_step()
        return self

    def as_step(self) -> StepFunction:
        if self.steps is not None:
            return StepFunction.from_pairs(self.steps)
        return SimpleFunction(tuple(self.atoms or ())).as_step()

    def as_simple(self) -> SimpleFunction:
        if self.steps is not None:
            return to_simple(self.as_step())
        return SimpleFunction(tuple(self.atoms or ()))


class FamilyConfig(BaseModel):
    kind: Literal["dyadic", "staircase", "mixed", "explicit"] = "dyadic"
    count: int = Field(8, ge=1, description="Number of random staircases")
    seed: int = Field(0, ge=0, description="Seed of the random staircases and random suites")
    functions: List[FunctionConfig] = Field(default_factory=list, description="Members of an explicit family")

    @model_validator(mode="after")
    def _explicit_needs_functions(self):
        if self.kind == "explicit" and not self.functions:
            raise ValueError("explicit family needs at least one function")
        return self

    def build(self) -> List[FunctionCase]:
        cases = []
        if self.kind in ("dyadic", "mixed"):
            cases.extend(dyadic_family())
        if self.kind in ("staircase", "mixed"):
            cases.extend(staircase_family(self.count, self.seed))
        if self.kind == "explicit":
            cases.extend(FunctionCase(f"function-{i}", f.as_simple()) for i, f in enumerate(self.functions))
        return cases


class GridConfig(BaseModel):
    t_points: Optional[int] = Field(
        None, ge=2, description="Points of the log grids; each suite keeps its own default when unset, 400 elsewhere"
    )
    t_span_decades: float = Field(4.0, gt=0, allow_inf_nan=False)
    t_values: Optional[List[float]] = Field(None, description="Explicit t points, overriding the log grid")

    @field_validator("t_values")
    @classmethod
    def _positive(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and (not value or any(not (math.isfinite(t) and t > 0) for t in value)):
            raise ValueError("t_values must be a nonempty list of finite positive numbers")
        return value


class ToleranceConfig(BaseModel):
    abs: float = Field(1e-10, gt=0, allow_inf_nan=False)
    rel: float = Field(1e-8, gt=0, allow_inf_nan=False)


class NormConfig(BaseModel):
    kind: Literal["lorentz", "weak-lorentz", "llogl", "llogl-log3", "philog", "mphi", "lexp"] = "lorentz"
    p: float = Field(2.0, ge=1, allow_inf_nan=False)
    q: float = Field(1.0, gt=0, description='Lorentz second index, "inf" accepted')
    alpha: float = Field(1.0, ge=0, allow_inf_nan=False)
    phi: PhiConfig = Field(default_factory=PhiConfig)

    @field_validator("q", mode="before")
    @classmethod
    def _parse_inf(cls, value: Any) -> Any:
        return _inf_from_text(value)

    @field_serializer("q")
    def _dump_inf(self, value: float) -> Union[float, str]:
        return "inf" if math.isinf(value) else value


class VerifyConfig(BaseModel):
    p: Optional[float] = Field(None, description="Exponent of the converse suite, p1 when missing")
    m_values: List[float] = Field([0.1, 1.0, 10.0], description="Set measures of the char-bound suite")
    volume: float = Field(1.0, gt=0, allow_inf_nan=False, description="V, measure of the target space")
    alpha: float = Field(1.0, ge=0, allow_inf_nan=False, description="Power of phi in the remark-llogl suite")
    samples: Optional[int] = Field(None, ge=1, description="Random draws of lemma-infimum and dilation")


class OutputConfig(BaseModel):
    path: Optional[str] = Field(None, description="Output file, stdout when missing")
    format: Literal["json", "csv"] = "json"


class RunConfig(BaseModel):
    """Everything one xlab invocation needs."""

    command: str = ""
    suite: Optional[str] = None
    phi: PhiConfig = Field(default_factory=PhiConfig, description="Function checked by check-phi")
    phi_grid_max: float = Field(1e6, gt=1, allow_inf_nan=False)
    specs: List[SpecConfig] = Field(default_factory=lambda: [SpecConfig()], min_length=1)
    function: FunctionConfig = Field(default_factory=lambda: FunctionConfig(atoms=[(1.0, 1.0)]))
    norm: NormConfig = Field(default_factory=NormConfig)
    family: FamilyConfig = Field(default_factory=FamilyConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


def deep_merge(dict1: Dict, dict2: Dict, overwrite_keys: Optional[Set[str]] = None, current_path: str = "") -> Dict:
    """
    Recursively merge two dictionaries, preserving keys from dict1 except for overwritable keys.

    :param dict1: base dictionary
    :param dict2: dictionary whose missing keys are added
    :param overwrite_keys: dot-notation paths (e.g. 'family.seed') that dict2 may overwrite
    :param current_path: path of dict1 inside the outermost dictionary
    :return: merged copy
    """
    merged = dict1.copy()
    for key, value in dict2.items():
        path = f"{current_path}.{key}".lstrip(".")
        if key not in merged:
            merged[key] = value
        elif isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = deep_merge(merged[key], value, overwrite_keys, path)
        elif overwrite_keys is not None and path in overwrite_keys:
            merged[key] = value
    return merged


def _paths(data: Dict, prefix: str = "") -> Set[str]:
    out = set()
    for key, value in data.items():
        path = f"{prefix}.{key}".lstrip(".")
        if isinstance(value, dict):
            out |= _paths(value, path)
        else:
            out.add(path)
    return out


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Read a YAML or JSON config file, apply command-line overrides and validate.

    :param path: config file, defaults only when None
    :param overrides: nested dict of values that replace the file's, e.g. {"family": {"seed": 3}}
    :return: RunConfig
    :raises ConfigError: unreadable file, malformed YAML or invalid values
    """
    data: Any = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fd:
                data = yaml.safe_load(fd) or {}
        except OSError as e:
            raise ConfigError(f"cannot read config '{path}': {e}")
        except yaml.YAMLError as e:
            raise ConfigError(f"error parsing config '{path}': {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"config '{path}' must hold a mapping, got {type(data).__name__}")
    overrides = overrides or {}
    merged = deep_merge(data, overrides, _paths(overrides))
    try:
        config = RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}")
    logger.debug(f"config: {config}")
    return config


def dump_config(config: RunConfig) -> str:
    """JSON text that `load_config` turns back into an equal RunConfig."""
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, indent=2)
