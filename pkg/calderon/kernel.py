"""The kernel k(t, r) of R, its cumulative integral, the A_k functional and the constant C_phi."""

import logging
import math
from typing import Union

import numpy as np
from scipy import optimize

from calderon.base import KernelSpec, R_op
from libs.quadrature import integrate_log_singular
from libs.utils import log_grid
from rearrangement.base import DecreasingStep

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

RATIO_MIN = 1e-12
RATIO_POINTS = 400


def kernel_eval(spec: KernelSpec, t: float, r: float) -> float:
    """
    k(t, r) = w(1 - log(r/t)) (r/t)^(1/p0) / r for r < t and (r/t)^(1/p1) / r for r >= t.

    :param spec: kernel parameters; w is the delta-aware weight
    :param t: > 0
    :param r: > 0
    :return: kernel value
    """
    if t <= 0 or r <= 0:
        raise ValueError(f"kernel needs t, r > 0, got t={t}, r={r}")
    x = r / t
    if x < 1.0:
        return float(spec.weight(1.0 - math.log(x))) * x ** (1.0 / spec.p0) / r
    if spec.p1_infinite:
        return 1.0 / r
    return x ** (1.0 / spec.p1) / r


def _cumulative_ratio(spec: KernelSpec, x: ArrayLike) -> ArrayLike:
    """Integral of k(t, r) over r in (0, x t); it depends on x = s/t only."""
    xs = np.asarray(x, dtype=float)
    rate = 1.0 / spec.p0
    below = np.asarray(spec.moment(rate, 1.0 - np.log(np.minimum(xs, 1.0)), math.inf), dtype=float)
    log_beyond = np.log(np.maximum(xs, 1.0))
    if spec.p1_infinite:
        beyond = log_beyond
    else:
        beyond = spec.p1 * np.expm1(log_beyond / spec.p1)
    out = math.exp(rate) * below + beyond
    return float(out) if out.ndim == 0 else out


def kernel_cumulative(spec: KernelSpec, t: ArrayLike, s: ArrayLike) -> ArrayLike:
    """
    Integral of k(t, r) over 0 < r < s, elementwise over broadcast t, s.

    The part r < min(s, t) is P-type: e^(1/p0) times the integral of w(u) e^(-u/p0) over [1 - log(min(s/t, 1)), inf).
    The part t <= r <= s is p1 ((s/t)^(1/p1) - 1), or log(s/t) for p1 = inf.
    """
    ts, ss = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    if np.any(ts <= 0) or np.any(ss < 0):
        raise ValueError("cumulative kernel needs t > 0 and s >= 0")
    x = ss / ts
    out = np.zeros(x.shape)
    positive = x > 0
    if positive.any():
        out[positive] = _cumulative_ratio(spec, x[positive])
    return float(out) if out.ndim == 0 else out


def c_phi(spec: KernelSpec) -> float:
    """
    C_phi: integral of w(1 - log u) u^(1/p0 - 1) over (0, 1).

    :param spec: kernel parameters, w = u^delta phi(u)
    :return: constant, finite by w(u) <= u^(beta + delta)
    """
    result = integrate_log_singular(lambda s: 1.0, 1.0, spec.p0, lambda u: float(spec.weight(u)), spec.weight_beta)
    logger.debug(f"C_phi{spec.label} = {result.value} +- {result.error_estimate}")
    return result.value


def Ak_bound(spec: KernelSpec, p: float) -> float:
    """2 p1 beta0^beta0 phi(1 / (1/p0 - 1/p)); inf for p1 = inf."""
    _check_exponent(spec, p)
    if spec.p1_infinite:
        return math.inf
    beta0 = spec.phi.beta0
    return 2.0 * spec.p1 * beta0**beta0 * float(spec.phi(1.0 / (1.0 / spec.p0 - 1.0 / p)))


def _check_exponent(spec: KernelSpec, p: float):
    if not (spec.p0 < p <= spec.p1 and math.isfinite(p)):
        raise ValueError(f"p must lie in (p0, p1] = ({spec.p0}, {spec.p1}], got {p}")


def _beyond_one_sup(spec: KernelSpec, p: float, k1: float) -> float:
    """
    sup over x >= 1 of x^(-1/p) (K(1) + p1 (x^(1/p1) - 1)).

    With K(1) < p the function rises to a single maximum at x^(1/p1) = (p1 - K(1)) / (p1 - p), which moves to
    infinity as p -> p1 where the limit is p1; otherwise it decreases from K(1).
    """
    if spec.p1_infinite:
        # x^(-1/p) (K(1) + log x) peaks at log x = p - K(1)
        return k1 if k1 >= p else math.exp(-(p - k1) / p) * p
    if p == spec.p1:
        return max(k1, spec.p1)
    if k1 >= p:
        return k1
    y = (spec.p1 - k1) / (spec.p1 - p)
    return math.exp(-spec.p1 * math.log(y) / p) * (k1 + spec.p1 * (y - 1.0))


def Ak_norm(spec: KernelSpec, p: float, x_grid=None) -> float:
    """
    sup over t, s of (t/s)^(1/p) times the integral of k(t, r) over (0, s).

    The objective depends on x = s/t only. For x <= 1 it is swept on a log grid and the best cell refined by a
    bounded scalar search; for x > 1 it has the closed form handled by `_beyond_one_sup`.

    :param spec: kernel parameters
    :param p: exponent in (p0, p1]
    :param x_grid: ratio grid in (0, 1], default 400 log-spaced points from 1e-12
    :return: A_k
    """
    _check_exponent(spec, p)
    xs = log_grid(RATIO_MIN, 1.0, RATIO_POINTS) if x_grid is None else np.unique(np.asarray(x_grid, dtype=float))
    xs = xs[(xs > 0) & (xs <= 1.0)]

    def objective(log_x: float) -> float:
        x = math.exp(log_x)
        return x ** (-1.0 / p) * float(_cumulative_ratio(spec, x))

    values = xs ** (-1.0 / p) * np.asarray(_cumulative_ratio(spec, xs), dtype=float)
    best = int(np.argmax(values))
    inside = float(values[best])
    if 0 < best < xs.size - 1:
        found = optimize.minimize_scalar(
            lambda v: -objective(v),
            bounds=(math.log(xs[best - 1]), math.log(xs[best + 1])),
            method="bounded",
            options={"xatol": 1e-10},
        )
        inside = max(inside, -float(found.fun))
    k1 = float(_cumulative_ratio(spec, 1.0))
    value = max(inside, _beyond_one_sup(spec, p, k1))
    logger.debug(f"A_k{spec.label}, p={p}: {value} (K(1) = {k1})")
    return value


def R_weak_norm(spec: KernelSpec, fstar: DecreasingStep, p: float, points: int = 2000) -> float:
    """
    sup over t of t^(1/p) R f*(t).

    Swept on a log grid spanning six decades beyond the support on both sides, refined around the best point; for
    p = p1 the t -> 0 limit ||f||_(p1,1) is included.

    :param spec: kernel parameters
    :param fstar: nonincreasing step function
    :param p: exponent, p0 < p <= p1
    :param points: grid size
    :return: weak-type norm of R f*
    """
    if fstar.is_zero:
        return 0.0
    grid = log_grid(fstar.breakpoints[0] * 1e-6, fstar.support_end * 1e6, points)
    inv = 1.0 / p
    values = grid**inv * np.asarray(R_op(spec, fstar, grid), dtype=float)
    best = int(np.argmax(values))
    value = float(values[best])
    if 0 < best < grid.size - 1:
        found = optimize.minimize_scalar(
            lambda v: -math.exp(v * inv) * float(R_op(spec, fstar, math.exp(v))),
            bounds=(math.log(grid[best - 1]), math.log(grid[best + 1])),
            method="bounded",
            options={"xatol": 1e-10},
        )
        value = max(value, -float(found.fun))
    if not spec.p1_infinite and p == spec.p1:
        limit = math.fsum(v * spec.p1 * (u**inv - l**inv) for l, u, _, v in fstar.pieces())
        value = max(value, limit)
    return value
