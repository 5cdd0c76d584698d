"""Distribution functions, decreasing rearrangements, f** and the g/h splitting."""

import logging
import math
from collections import defaultdict
from typing import Dict, List, Tuple

from rearrangement.base import DecreasingStep, PiecewiseHyperbolic, SimpleFunction, StepFunction

logger = logging.getLogger(__name__)


def distribution(f: SimpleFunction, y: float) -> float:
    """
    Measure of the superlevel set {f > y}.

    :param f: simple function
    :param y: level, >= 0
    :return: total mass of the atoms with value strictly greater than y
    """
    if y < 0:
        raise ValueError(f"level must be nonnegative, got {y}")
    return math.fsum(mass for value, mass in f.atoms if value > y)


def rearrange(f: SimpleFunction) -> DecreasingStep:
    """
    Decreasing rearrangement f* of a simple function.

    Atoms with equal values are merged and zero atoms dropped. The breakpoint of level v is the correctly rounded sum of
    all masses with value >= v, the same multiset `distribution` sums, so both distribution functions agree exactly.

    :param f: simple function
    :return: f* as a DecreasingStep
    """
    levels: Dict[float, List[float]] = defaultdict(list)
    for value, mass in f.atoms:
        if value > 0:
            levels[value].append(mass)
    breakpoints, values = [], []
    masses: List[float] = []
    for value in sorted(levels, reverse=True):
        masses.extend(levels[value])
        b = math.fsum(masses)
        if breakpoints and b <= breakpoints[-1]:
            # level lost in rounding against a much larger mass
            logger.debug(f"level {value} absorbed by rounding at breakpoint {b}")
            continue
        breakpoints.append(b)
        values.append(value)
    return DecreasingStep(tuple(breakpoints), tuple(values))


def to_simple(g: StepFunction) -> SimpleFunction:
    """Atoms (value, piece length) of the positive pieces of g."""
    return SimpleFunction(tuple((v, length) for v, length in zip(g.values, g.lengths()) if v > 0))


def rearrange_step(g: StepFunction) -> DecreasingStep:
    """
    Decreasing rearrangement of a finite-support step function with respect to Lebesgue measure.

    :param g: step function
    :return: g*, equal to g when g is already nonincreasing
    """
    if isinstance(g, DecreasingStep):
        return g
    if all(later <= earlier for earlier, later in zip(g.values, g.values[1:])):
        return DecreasingStep(g.breakpoints, g.values)
    return rearrange(to_simple(g))


def double_star(f: DecreasingStep) -> PiecewiseHyperbolic:
    """
    Exact running average f**(t) = (1/t) * integral of f over (0, t).

    On (b_(i-1), b_i] it equals (A_(i-1) + v_i (t - b_(i-1))) / t with A the cumulative integral; beyond the support
    it is A_n / t.

    :param f: nonincreasing step function
    :return: PiecewiseHyperbolic
    """
    if f.is_zero:
        return PiecewiseHyperbolic()
    bounds = [0.0]
    a, b = [], []
    parts: List[float] = []
    previous = 0.0
    for breakpoint, value in zip(f.breakpoints, f.values):
        cumulative = math.fsum(parts)
        a.append(max(cumulative - value * previous, 0.0) if previous else 0.0)
        b.append(value)
        bounds.append(breakpoint)
        parts.append(value * (breakpoint - previous))
        previous = breakpoint
    a.append(math.fsum(parts))
    b.append(0.0)
    bounds.append(math.inf)
    return PiecewiseHyperbolic(tuple(bounds), tuple(a), tuple(b))


def gh_split(fstar: DecreasingStep, t: float) -> Tuple[DecreasingStep, DecreasingStep]:
    """
    Split f* at the level c = f*(t) into the parts above and below c.

    gstar(s) = (f*(s) - c)+ on (0, t) and hstar(s) = min(f*(s), c), so gstar + hstar = f* on (0, t).

    :param fstar: nonincreasing step function
    :param t: split point, > 0
    :return: (gstar, hstar)
    """
    if t <= 0:
        raise ValueError(f"split point must be positive, got {t}")
    level = fstar(t)
    g_breaks, g_values = [], []
    for breakpoint, value in zip(fstar.breakpoints, fstar.values):
        if value <= level:
            break
        g_breaks.append(breakpoint)
        g_values.append(value - level)
    gstar = DecreasingStep(tuple(g_breaks), tuple(g_values))
    hstar = DecreasingStep(fstar.breakpoints, tuple(min(value, level) for value in fstar.values))
    return gstar, hstar
