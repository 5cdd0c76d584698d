"""
Adaptive 1-D quadrature with error estimates and tail/singularity substitutions.

The engine is QUADPACK's adaptive Gauss-Kronrod integrator (`scipy.integrate.quad`), which bisects the
worst subinterval until the embedded 21/10-point error estimate meets the tolerance. Integrals to infinity
are truncated where an analytic tail bound drops below a tenth of the absolute tolerance.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special

from libs.utils import XlabError

logger = logging.getLogger(__name__)


@dataclass
class quadrature_settings:
    """
    Store the process-wide quadrature settings.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000


QUADRATURE_SETTINGS = quadrature_settings()


def set_default_tolerances(abs_tol: float = None, rel_tol: float = None):
    """
    Change the default tolerances used when a call does not pass its own.

    :param abs_tol: absolute tolerance, > 0
    :param rel_tol: relative tolerance, > 0
    """
    if abs_tol is not None:
        if abs_tol <= 0:
            raise ValueError(f"abs_tol must be positive, got {abs_tol}")
        QUADRATURE_SETTINGS.abs_tol = abs_tol
    if rel_tol is not None:
        if rel_tol <= 0:
            raise ValueError(f"rel_tol must be positive, got {rel_tol}")
        QUADRATURE_SETTINGS.rel_tol = rel_tol


@dataclass(frozen=True)
class QuadratureResult:
    """Value of an integral together with its error estimate and the number of integrand evaluations."""

    value: float
    error_estimate: float
    evaluations: int

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value, self.error_estimate + other.error_estimate, self.evaluations + other.evaluations
        )


ZERO = QuadratureResult(0.0, 0.0, 0)


class QuadratureError(XlabError, ArithmeticError):
    """Adaptive integration did not reach the requested tolerance."""

    def __init__(self, message: str, partial: QuadratureResult):
        super().__init__(message)
        self.partial = partial


def _tolerances(abs_tol: Optional[float], rel_tol: Optional[float]):
    return (
        QUADRATURE_SETTINGS.abs_tol if abs_tol is None else abs_tol,
        QUADRATURE_SETTINGS.rel_tol if rel_tol is None else rel_tol,
    )


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = None,
    rel_tol: float = None,
    points: Iterable[float] = None,
    max_subdivisions: int = None,
) -> QuadratureResult:
    """
    Integrate f over the finite interval [a, b].

    :param f: integrand, evaluated at interior points only
    :param a: lower limit
    :param b: upper limit, a <= b
    :param abs_tol: absolute tolerance, default from QUADRATURE_SETTINGS
    :param rel_tol: relative tolerance, default from QUADRATURE_SETTINGS
    :param points: interior points where f has jumps or kinks; the interval is split there first
    :param max_subdivisions: cap on the number of bisections
    :return: QuadratureResult
    :raises QuadratureError: when the estimate stays above tolerance after max_subdivisions
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"integration limits must be finite, got [{a}, {b}]")
    if a > b:
        raise ValueError(f"integration limits reversed: [{a}, {b}]")
    if a == b:
        return ZERO
    abs_tol, rel_tol = _tolerances(abs_tol, rel_tol)
    limit = max_subdivisions or QUADRATURE_SETTINGS.max_subdivisions
    breaks = None
    if points is not None:
        breaks = sorted({float(p) for p in points if a < p < b})
        limit = max(limit, 2 * len(breaks) + 50)
    ret = sp_integrate.quad(
        f, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=limit, points=breaks or None, full_output=1
    )
    value, error, info = ret[0], ret[1], ret[2]
    result = QuadratureResult(float(value), float(error), int(info["neval"]))
    if len(ret) > 3:
        # QUADPACK reported ier > 0; accept when the estimate still meets the tolerance
        if error > max(abs_tol, rel_tol * abs(value)) * 10.0 or not math.isfinite(value):
            raise QuadratureError(f"no convergence on [{a}, {b}]: {ret[3]}", result)
        logger.debug(f"quadrature on [{a}, {b}] accepted with warning: {ret[3]}")
    return result


def integrate_to_infinity(
    f: Callable[[float], float],
    a: float,
    tail_bound: Callable[[float], float],
    abs_tol: float = None,
    rel_tol: float = None,
    points: Iterable[float] = None,
) -> QuadratureResult:
    """
    Integrate f over [a, inf) by truncation.

    The cut U is the first of a + 1, a + 2, a + 4, ... with tail_bound(U) below abs_tol / 10; the discarded tail
    is added to the error estimate.

    :param f: integrand
    :param a: finite lower limit
    :param tail_bound: U -> upper bound of the integral of |f| over [U, inf), nonincreasing in U
    :param abs_tol: absolute tolerance
    :param rel_tol: relative tolerance
    :param points: interior break points, those beyond the cut are ignored
    :return: QuadratureResult
    """
    abs_tol, rel_tol = _tolerances(abs_tol, rel_tol)
    step = 1.0
    upper = a + step
    while tail_bound(upper) > abs_tol / 10.0:
        step *= 2.0
        upper = a + step
        if step > 1e6:
            raise QuadratureError(f"tail bound does not decay beyond {a}", ZERO)
    if points is not None:
        # keep the cut beyond every break point
        upper = max([upper] + [p + 1.0 for p in points if math.isfinite(p)])
    body = integrate(f, a, upper, abs_tol=abs_tol * 0.9, rel_tol=rel_tol, points=points)
    return QuadratureResult(body.value, body.error_estimate + tail_bound(upper), body.evaluations)


def gamma_tail(k: float, rate: float, u: float) -> float:
    """
    Upper incomplete gamma integral of u^k e^(-rate u) over [u, inf).

    :param k: power, > -1
    :param rate: decay rate, > 0
    :param u: lower limit, >= 0
    :return: rate^-(k+1) * Gamma(k+1, rate u)
    """
    return float(special.gammaincc(k + 1.0, rate * u) * special.gamma(k + 1.0) / rate ** (k + 1.0))


def integrate_log_singular(
    f: Callable[[float], float],
    t_upper: float,
    p0: float,
    weight: Callable[[float], float],
    beta: float,
    f_sup: float = 1.0,
    abs_tol: float = None,
    rel_tol: float = None,
    points: Iterable[float] = None,
) -> QuadratureResult:
    """
    Integrate w(1 - log(s/t)) f(s) s^(1/p0 - 1) over (0, t).

    With s = t e^(1-u) the integral becomes t^(1/p0) e^(1/p0) times the integral of w(u) f(t e^(1-u)) e^(-u/p0)
    over [1, inf), which has no endpoint singularity; the u-tail is cut using w(u) <= u^beta and |f| <= f_sup.

    :param f: function of s on (0, t)
    :param t_upper: t > 0
    :param p0: exponent >= 1
    :param weight: w on [1, inf)
    :param beta: envelope exponent of the weight
    :param f_sup: bound of |f| on (0, t)
    :param abs_tol: absolute tolerance
    :param rel_tol: relative tolerance
    :param points: jump locations of f in the s variable
    :return: QuadratureResult
    """
    if t_upper <= 0:
        raise ValueError(f"t must be positive, got {t_upper}")
    if p0 < 1:
        raise ValueError(f"p0 must be >= 1, got {p0}")
    abs_tol, rel_tol = _tolerances(abs_tol, rel_tol)
    rate = 1.0 / p0
    scale = t_upper**rate * math.exp(rate)

    def integrand(u: float) -> float:
        return weight(u) * f(t_upper * math.exp(1.0 - u)) * math.exp(-rate * u)

    def tail(u: float) -> float:
        return scale * f_sup * gamma_tail(beta, rate, u)

    u_points = None
    if points is not None:
        u_points = [1.0 - math.log(s / t_upper) for s in points if 0 < s < t_upper]
    inner = integrate_to_infinity(
        integrand, 1.0, lambda u: tail(u) / scale, abs_tol=abs_tol / scale, rel_tol=rel_tol, points=u_points
    )
    return QuadratureResult(scale * inner.value, scale * inner.error_estimate, inner.evaluations)


@lru_cache(maxsize=8)
def _legendre_rule(order: int):
    return np.polynomial.legendre.leggauss(order)


def _gauss(f: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray, order: int) -> np.ndarray:
    nodes, weights = _legendre_rule(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    values = f(mid[:, None] + half[:, None] * nodes[None, :])
    return half * (values @ weights)


def integrate_segments(
    f: Callable[[np.ndarray], np.ndarray],
    edges: Iterable[float],
    abs_tol: float = None,
    rel_tol: float = None,
    max_step: float = 1.0,
    max_subdivisions: int = None,
) -> Tuple[np.ndarray, float]:
    """
    Cumulative integrals of a vectorised integrand over consecutive segments.

    Every segment is cut into pieces no longer than max_step; each piece is integrated by 20 and 10 point Gauss-Legendre
    rules at once and the difference is its error estimate. Pieces above tolerance are bisected until all pass.

    f must be smooth inside every segment: jumps and kinks belong on the edges. A jump inside a piece can leave both
    rules in agreement and is then accepted with an error estimate that does not see it.

    :param f: integrand accepting numpy arrays of any shape
    :param edges: finite, nondecreasing integration nodes e_0 <= ... <= e_n
    :param abs_tol: absolute tolerance per piece
    :param rel_tol: relative tolerance per piece
    :param max_step: longest piece before the first estimate
    :param max_subdivisions: cap on the number of bisection rounds times pieces
    :return: (C, error) with C[i] the integral over [e_0, e_i] and error the summed estimates
    """
    edges = np.asarray(list(edges), dtype=float)
    if edges.size == 0:
        return edges, 0.0
    if not np.all(np.isfinite(edges)) or np.any(np.diff(edges) < 0):
        raise ValueError("segment edges must be finite and nondecreasing")
    abs_tol, rel_tol = _tolerances(abs_tol, rel_tol)
    limit = max_subdivisions or QUADRATURE_SETTINGS.max_subdivisions
    widths = np.diff(edges)
    counts = np.maximum(1, np.ceil(widths / max_step)).astype(int)
    owner = np.repeat(np.arange(widths.size), counts)
    offset = np.arange(owner.size) - np.repeat(np.cumsum(counts) - counts, counts)
    lo = edges[owner] + widths[owner] * offset / counts[owner]
    hi = edges[owner] + widths[owner] * (offset + 1) / counts[owner]
    totals = np.zeros(widths.size)
    error = 0.0
    evaluations = 0
    bisections = 0
    while lo.size:
        fine = _gauss(f, lo, hi, 20)
        coarse = _gauss(f, lo, hi, 10)
        evaluations += 30 * lo.size
        local = np.abs(fine - coarse)
        done = local <= np.maximum(abs_tol, rel_tol * np.abs(fine))
        np.add.at(totals, owner[done], fine[done])
        error += float(local[done].sum())
        if done.all():
            break
        bisections += int((~done).sum())
        if bisections > limit:
            partial = QuadratureResult(float(totals.sum()), error + float(local[~done].sum()), evaluations)
            raise QuadratureError(f"segment integration did not converge after {bisections} bisections", partial)
        lo, hi, owner = lo[~done], hi[~done], owner[~done]
        mid = 0.5 * (lo + hi)
        lo, hi, owner = np.concatenate([lo, mid]), np.concatenate([mid, hi]), np.concatenate([owner, owner])
    logger.debug(f"segment integration: {widths.size} segments, {evaluations} evaluations")
    return np.concatenate([[0.0], np.cumsum(totals)]), error
