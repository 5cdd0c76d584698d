"""Rearrangement-invariant norms of decreasing step functions and their averages."""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import List

from admissible.base import AdmissibleFunction, weighted_exp_integral
from rearrangement.base import DecreasingStep, PiecewiseHyperbolic, SimpleFunction

logger = logging.getLogger(__name__)

LLOG_LOG3 = AdmissibleFunction(gamma=1.0, log_exponents=(0.0, 1.0))
"""x * log_2(x); with x = log_1(1/t) it is log_1(1/t) * log_3(1/t)"""


@dataclass(frozen=True)
class LorentzParams:
    """Indices of L^(p,q)."""

    p: float
    q: float = 1.0

    def __post_init__(self):
        if not (self.p >= 1 and math.isfinite(self.p)):
            raise ValueError(f"Lorentz p must be finite and >= 1, got {self.p}")
        if not self.q > 0:
            raise ValueError(f"Lorentz q must be > 0 or inf, got {self.q}")


def _finite_or_inf(value: float, what: str) -> float:
    if not math.isfinite(value):
        logger.warning(f"{what} diverges, returning inf")
        return math.inf
    return value


def _below_one(fstar: DecreasingStep):
    """Pieces (l, min(u, 1), v) of f* inside (0, 1)."""
    for l, u, _, v in fstar.pieces():
        if l < 1.0:
            yield l, min(u, 1.0), v


def _plain_beyond_one(fstar: DecreasingStep) -> List[float]:
    return [v * (u - max(l, 1.0)) for l, u, _, v in fstar.pieces() if u > 1.0]


def _log_variable(t: float) -> float:
    """x = 1 - log t, infinite at t = 0."""
    return math.inf if t == 0 else 1.0 - math.log(t)


def lorentz_norm(fstar: DecreasingStep, params: LorentzParams) -> float:
    """
    (integral of t^(q/p - 1) f*(t)^q dt)^(1/q), piecewise in closed form.

    :param fstar: decreasing rearrangement
    :param params: Lorentz indices, q = inf gives the weak norm
    :return: norm
    """
    p, q = params.p, params.q
    if math.isinf(q):
        return weak_lorentz_norm(fstar, p)
    if fstar.is_zero:
        return 0.0
    e = q / p
    total = math.fsum(v**q * (p / q) * (u**e - l**e) for l, u, _, v in fstar.pieces())
    return _finite_or_inf(total ** (1.0 / q), f"L^({p},{q}) norm")


def weak_lorentz_norm(fstar: DecreasingStep, p: float) -> float:
    """sup over t of t^(1/p) f*(t), attained at a right end of a piece."""
    if fstar.is_zero:
        return 0.0
    exponent = 0.0 if math.isinf(p) else 1.0 / p
    return max(u**exponent * v for _, u, _, v in fstar.pieces())


def lorentz_norm_from_distribution(f: SimpleFunction, params: LorentzParams) -> float:
    """
    The same norm through the distribution function: (p * integral of y^(q-1) lambda_f(y)^(q/p) dy)^(1/q).

    lambda_f is constant between consecutive atom values, so the integral is a finite sum.
    """
    p, q = params.p, params.q
    levels = _levels(f)
    if not levels:
        return 0.0
    if math.isinf(q):
        return max(w * m ** (1.0 / p) for w, m in levels)
    below = [w for w, _ in levels[1:]] + [0.0]
    total = math.fsum(p * m ** (q / p) * (w**q - lower**q) / q for (w, m), lower in zip(levels, below))
    return total ** (1.0 / q)


def weak_lorentz_norm_from_distribution(f: SimpleFunction, p: float) -> float:
    """sup over y of y lambda_f(y)^(1/p)."""
    return lorentz_norm_from_distribution(f, LorentzParams(p, math.inf))


def _levels(f: SimpleFunction):
    """[(w_k, lambda_f just below w_k)] for the distinct positive values w_1 > w_2 > ..."""
    masses = defaultdict(list)
    for value, mass in f.atoms:
        if value > 0:
            masses[value].append(mass)
    out, seen = [], []
    for value in sorted(masses, reverse=True):
        seen.extend(masses[value])
        out.append((value, math.fsum(seen)))
    return out


def llogl_norm(fstar: DecreasingStep, alpha: float) -> float:
    """
    Integral of f*(t) (1 + log+(1/t))^alpha.

    Below t = 1 the substitution x = 1 - log t turns each piece into e * (Gamma(alpha+1, x_lo) - Gamma(alpha+1, x_hi)).

    :param fstar: decreasing rearrangement
    :param alpha: >= 0
    :return: norm
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if fstar.is_zero:
        return 0.0
    weight = AdmissibleFunction.power(alpha)
    parts = _plain_beyond_one(fstar)
    for l, u, v in _below_one(fstar):
        parts.append(v * math.e * weighted_exp_integral(weight, 1.0, _log_variable(u), _log_variable(l)))
    return _finite_or_inf(math.fsum(parts), f"L(log L)^{alpha} norm")


def llogl_log3_norm(fstar: DecreasingStep) -> float:
    """Integral of f*(t) log_1(1/t) log_3(1/t), the same substitution as llogl_norm."""
    if fstar.is_zero:
        return 0.0
    parts = _plain_beyond_one(fstar)
    for l, u, v in _below_one(fstar):
        parts.append(v * math.e * weighted_exp_integral(LLOG_LOG3, 1.0, _log_variable(u), _log_variable(l)))
    return _finite_or_inf(math.fsum(parts), "L log L log_3 L norm")


def philog_norm(fstar: DecreasingStep, p: float, phi: AdmissibleFunction) -> float:
    """
    Integral of phi(1 + log+(1/r)) f*(r) r^(1/p - 1).

    :param fstar: decreasing rearrangement
    :param p: >= 1
    :param phi: admissible function
    :return: norm of L^(p,1) phi(log L)
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if fstar.is_zero:
        return 0.0
    rate = 1.0 / p
    parts = [v * p * (u**rate - max(l, 1.0) ** rate) for l, u, _, v in fstar.pieces() if u > 1.0]
    for l, u, v in _below_one(fstar):
        parts.append(v * math.exp(rate) * weighted_exp_integral(phi, rate, _log_variable(u), _log_variable(l)))
    return _finite_or_inf(math.fsum(parts), f"L^({p},1) {phi.label}(log L) norm")


def mphi_norm(fdoublestar: PiecewiseHyperbolic) -> float:
    """
    sup over t of t f**(t) / (1 + log+ t).

    For t <= 1 the objective t f**(t) is increasing, so only t >= 1 matters. On a piece it reads (a + b t)/(1 + log t),
    whose derivative has the sign of b log t - a/t, increasing in t: any critical point is a minimum and the sup
    sits at an end of a piece.
    """
    best = 0.0
    for l, u, a, b in fdoublestar.pieces():
        if u < 1.0:
            continue
        for t in (max(l, 1.0), u):
            if math.isfinite(t):
                best = max(best, (a + b * t) / (1.0 + math.log(t)))
    return best


def lexp_norm(fdoublestar: PiecewiseHyperbolic) -> float:
    """
    sup over 0 < t < 1 of f**(t) / (1 + log(1/t)).

    On a piece the derivative has the sign of a log t + b t, increasing in t, so the sup is an end value; at t -> 0
    the objective vanishes.
    """
    best = 0.0
    for l, u, a, b in fdoublestar.pieces():
        if l >= 1.0:
            break
        for t in (l, min(u, 1.0)):
            if t > 0:
                best = max(best, (a / t + b) / (1.0 - math.log(t)))
    return best
