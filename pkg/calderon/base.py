"""Calderon-type operators P, Q and R acting on step and hyperbolic functions."""

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

from admissible.base import AdmissibleFunction, weighted_exp_integral
from libs.quadrature import integrate_segments
from libs.utils import XlabError, decade_grid
from rearrangement.base import DecreasingStep, PiecewiseHyperbolic, StepFunction
from rearrangement.operations import rearrange_step

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
Operand = Union[StepFunction, PiecewiseHyperbolic]

PROFILE_POINTS_PER_DECADE = 512
PROFILE_SPAN_DECADES = 4


class KernelSpecError(XlabError, ValueError):
    """Invalid (p0, p1, delta)."""

    pass


@dataclass(frozen=True)
class KernelSpec:
    """
    Parameters of R = P + Q.

    The P-weight is u^delta * phi(u) evaluated at u = 1 - log(s/t); delta = 1 is only meaningful with p0 = 1.
    """

    p0: float
    p1: float
    phi: AdmissibleFunction = field(default_factory=AdmissibleFunction.one)
    delta: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.p0) and self.p0 >= 1):
            raise KernelSpecError(f"p0 must be finite and >= 1, got {self.p0}")
        if not self.p1 > self.p0:
            raise KernelSpecError(f"p1 must be > p0, got p0={self.p0}, p1={self.p1}")
        if self.delta not in (0, 1):
            raise KernelSpecError(f"delta must be 0 or 1, got {self.delta}")
        if self.delta == 1 and self.p0 != 1:
            raise KernelSpecError(f"delta = 1 needs p0 = 1, got p0={self.p0}")

    @property
    def p1_infinite(self) -> bool:
        return math.isinf(self.p1)

    @property
    def weight_beta(self) -> float:
        """Envelope exponent of the P-weight: u^delta phi(u) <= u^(beta + delta)."""
        return self.phi.beta_cert + self.delta

    @property
    def label(self) -> str:
        p1 = "inf" if self.p1_infinite else f"{self.p1:g}"
        return f"({self.p0:g},{p1},{self.phi.label},delta={self.delta})"

    def weight(self, u: ArrayLike) -> ArrayLike:
        w = self.phi(u)
        return w * np.asarray(u, dtype=float) ** self.delta if self.delta else w

    def moment(self, rate: float, lo: ArrayLike, hi: ArrayLike) -> ArrayLike:
        """Integral of weight(u) e^(-rate u) over [lo, hi]."""
        return weighted_exp_integral(self.phi, rate, lo, hi, power=float(self.delta))


@dataclass(frozen=True)
class OperatorProfile:
    """Sampled operator output on a strictly increasing log grid."""

    grid: Tuple[float, ...]
    values: Tuple[float, ...]
    spec: KernelSpec
    input_id: str = ""

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise ValueError("profile grid and values differ in length")
        if any(hi <= lo for lo, hi in zip(self.grid, self.grid[1:])):
            raise ValueError("profile grid must be strictly increasing")
        if any(v < 0 for v in self.values):
            raise ValueError("profile values must be nonnegative")

    def as_step(self) -> StepFunction:
        """Value at g_i on (g_(i-1), g_i], with g_(-1) = 0, and 0 beyond the last grid point."""
        return StepFunction(self.grid, self.values)


def _positive(t: ArrayLike) -> np.ndarray:
    ts = np.asarray(t, dtype=float)
    if not np.all(ts > 0):
        raise ValueError("operators are evaluated at t > 0")
    return ts


def _shaped(out: np.ndarray, ts: np.ndarray) -> ArrayLike:
    out = out.reshape(ts.shape)
    return float(out) if out.ndim == 0 else out


def P_op(spec: KernelSpec, f: Operand, t: ArrayLike) -> ArrayLike:
    """
    P f(t) = t^(-1/p0) * integral over (0, t) of w(1 - log(s/t)) f(s) s^(1/p0 - 1) ds.

    With u = 1 - log(s/t) a piece a/s + b on (l, u] contributes
    b e^(1/p0) J(1/p0) + (a/t) e^(1/p0 - 1) J(1/p0 - 1), J(rate) the integral of w(u) e^(-rate u) over the u-image.

    :param spec: kernel parameters
    :param f: step or hyperbolic function
    :param t: point(s) > 0
    :return: P f(t), shaped like t
    """
    ts = _positive(t)
    flat = ts.ravel()
    out = np.zeros(flat.size)
    rate = 1.0 / spec.p0
    # per rate the (point indices, lo, hi, coefficient) of every piece, then one moment call per rate
    terms = {rate: [], rate - 1.0: []}
    for l, u, a, b in f.pieces():
        index = np.nonzero(flat > l)[0]
        if not index.size:
            break
        tt = flat[index]
        lo = 1.0 + np.log(tt / np.minimum(u, tt))
        hi = 1.0 + np.log(tt / l) if l > 0 else np.full(tt.shape, math.inf)
        if b:
            terms[rate].append((index, lo, hi, np.full(tt.shape, b * math.exp(rate))))
        if a:
            terms[rate - 1.0].append((index, lo, hi, (a / tt) * math.exp(rate - 1.0)))
    for r, parts in terms.items():
        if not parts:
            continue
        index, lo, hi, coefficient = (np.concatenate(column) for column in zip(*parts))
        np.add.at(out, index, coefficient * np.asarray(spec.moment(r, lo, hi), dtype=float))
    return _shaped(out, ts)


def Q_op(spec: KernelSpec, f: Operand, t: ArrayLike) -> ArrayLike:
    """
    Q f(t) = t^(-1/p1) * integral over (t, inf) of f(s) s^(1/p1 - 1) ds, or of f(s)/s for p1 = inf.

    :param spec: kernel parameters
    :param f: step or hyperbolic function
    :param t: point(s) > 0
    :return: Q f(t), shaped like t
    """
    ts = _positive(t)
    flat = ts.ravel()
    out = np.zeros(flat.size)
    inv = 0.0 if spec.p1_infinite else 1.0 / spec.p1
    for l, u, a, b in f.pieces():
        mask = flat < u
        if not mask.any():
            continue
        tt = flat[mask]
        x = np.maximum(l, tt)
        contribution = np.zeros(tt.size)
        if b:
            log_ratio = np.log(u / x)
            if spec.p1_infinite:
                contribution += b * log_ratio
            else:
                contribution += b * spec.p1 * (x / tt) ** inv * np.expm1(log_ratio * inv)
        if a:
            upper = 0.0 if math.isinf(u) else u ** (inv - 1.0)
            contribution += a * (x ** (inv - 1.0) - upper) / (1.0 - inv) * tt ** (-inv)
        out[mask] += contribution
    return _shaped(out, ts)


def R_op(spec: KernelSpec, f: Operand, t: ArrayLike) -> ArrayLike:
    """R = P + Q; spec (1, inf, 1) is the classical Calderon operator."""
    return P_op(spec, f, t) + Q_op(spec, f, t)


def dilation_check(spec: KernelSpec, f: StepFunction, lam: float, t: float) -> Tuple[float, float]:
    """
    Both sides of R(f(lam .))(t) = (R f)(lam t).

    :return: (R of the dilated function at t, R f at lam t)
    """
    if lam <= 0 or t <= 0:
        raise ValueError(f"lambda and t must be positive, got lambda={lam}, t={t}")
    return float(R_op(spec, f.dilate(lam), t)), float(R_op(spec, f, lam * t))


def default_profile_grid(f: StepFunction, per_decade: int = PROFILE_POINTS_PER_DECADE) -> np.ndarray:
    """Log grid over [10^-4 b_1, 10^4 b_n] around the support of f."""
    if f.is_zero:
        return decade_grid(1e-4, 1e4, per_decade)
    span = 10.0**PROFILE_SPAN_DECADES
    return decade_grid(f.breakpoints[0] / span, f.support_end * span, per_decade)


def operator_profile(spec: KernelSpec, f: StepFunction, grid=None, input_id: str = "") -> OperatorProfile:
    """Sample R f on a log grid."""
    grid = default_profile_grid(f) if grid is None else np.unique(np.asarray(grid, dtype=float))
    decades = math.log10(grid[-1] / grid[0]) if grid.size > 1 else 0.0
    if decades and (grid.size - 1) / decades < PROFILE_POINTS_PER_DECADE:
        logger.warning(
            f"profile grid has {(grid.size - 1) / decades:.0f} points per decade, "
            f"below {PROFILE_POINTS_PER_DECADE}: (Rf)* is coarse"
        )
    values = np.maximum(np.asarray(R_op(spec, f, grid), dtype=float), 0.0)
    return OperatorProfile(tuple(grid.tolist()), tuple(values.tolist()), spec, input_id)


def profile_and_rearrange(spec: KernelSpec, f: StepFunction, grid=None) -> DecreasingStep:
    """
    Grid approximation of (R f)*.

    R f is sampled on the grid, held constant on (g_(i-1), g_i] at its value in g_i, and rearranged. For a
    nonincreasing f the result agrees with R f at every grid point.

    :param spec: kernel parameters
    :param f: step function, not necessarily monotone
    :param grid: increasing positive points; default 512 per decade over the support widened by 4 decades each side
    :return: DecreasingStep
    """
    if f.is_zero:
        return DecreasingStep()
    return rearrange_step(operator_profile(spec, f, grid).as_step())


def R_double_star(spec: KernelSpec, fstar: DecreasingStep, t: ArrayLike) -> ArrayLike:
    """
    (R f*)**(t) = (1/t) * integral of R f*(s) over (0, t).

    Below the smallest node e_0 <= b_1 the function f* is the constant v_1, where P f* = v_1 P(1) and
    Q f*(s) = v_1 p1 ((e_0/s)^(1/p1) - 1) + (e_0/s)^(1/p1) Q f*(e_0), so that part of the integral is closed form;
    the rest runs by segment quadrature between the sorted union of t values and breakpoints.

    :param spec: kernel parameters
    :param fstar: nonincreasing step function
    :param t: point(s) > 0
    :return: (R f*)**(t), shaped like t
    """
    ts = _positive(t)
    if fstar.is_zero:
        return _shaped(np.zeros(ts.size), ts)
    edges = np.unique(np.concatenate([ts.ravel(), np.asarray(fstar.breakpoints)]))
    start = float(edges[0])
    level = fstar.values[0]
    rate = 1.0 / spec.p0
    p_of_one = math.exp(rate) * float(spec.moment(rate, 1.0, math.inf))
    q_factor = 1.0 if spec.p1_infinite else spec.p1 / (spec.p1 - 1.0)
    head = start * (level * p_of_one + (level + float(Q_op(spec, fstar, start))) * q_factor)
    cumulative, _ = integrate_segments(lambda s: R_op(spec, fstar, s), edges, max_step=math.inf)
    flat = ts.ravel()
    totals = head + cumulative[np.searchsorted(edges, flat)]
    return _shaped(totals / flat, ts)
