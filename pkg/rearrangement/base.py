"""Simple functions, step functions on the half-line and the exact form of f**."""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from libs.utils import XlabError

logger = logging.getLogger(__name__)

Piece = Tuple[float, float, float, float]
"""(l, u, a, b): the function equals a/t + b on (l, u]"""


class FunctionError(XlabError, ValueError):
    """Malformed simple, step or hyperbolic function."""

    pass


@dataclass(frozen=True)
class SimpleFunction:
    """
    A mu-simple function given by its atoms.

    Every atom (value, mass) is a level set of measure `mass` on which the function equals `value`.
    """

    atoms: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        atoms = tuple((float(v), float(m)) for v, m in self.atoms)
        for value, mass in atoms:
            if not (math.isfinite(value) and value >= 0):
                raise FunctionError(f"atom value must be finite and nonnegative, got {value}")
            if not (math.isfinite(mass) and mass > 0):
                raise FunctionError(f"atom mass must be finite and positive, got {mass}")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def indicator(cls, mass: float, value: float = 1.0) -> "SimpleFunction":
        """value times the characteristic function of a set of measure `mass`."""
        return cls(((value, mass),))

    @property
    def total_mass(self) -> float:
        return math.fsum(m for _, m in self.atoms)

    @property
    def sup(self) -> float:
        """L-infinity norm."""
        return max((v for v, _ in self.atoms), default=0.0)

    def scale(self, c: float) -> "SimpleFunction":
        return SimpleFunction(tuple((c * v, m) for v, m in self.atoms))

    def as_step(self) -> "StepFunction":
        """
        Lay the atoms on the half-line in their given order.

        Atom j occupies (M_(j-1), M_j] with M_j the cumulative mass, so the result is in general not monotone.
        """
        breakpoints, values = [], []
        masses = []
        for value, mass in self.atoms:
            masses.append(mass)
            breakpoints.append(math.fsum(masses))
            values.append(value)
        return StepFunction(tuple(breakpoints), tuple(values))


@dataclass(frozen=True)
class StepFunction:
    """
    Right-closed piecewise-constant function on (0, inf).

    Equals values[i] on (breakpoints[i-1], breakpoints[i]] with breakpoints[-1] read as 0, and 0 beyond the last
    breakpoint. Construction brings it to canonical form: adjacent equal values merged, trailing zeros dropped.
    """

    breakpoints: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        breakpoints = tuple(float(b) for b in self.breakpoints)
        values = tuple(float(v) for v in self.values)
        if len(breakpoints) != len(values):
            raise FunctionError(f"{len(breakpoints)} breakpoints but {len(values)} values")
        previous = 0.0
        for b in breakpoints:
            if not (math.isfinite(b) and b > previous):
                raise FunctionError(f"breakpoints must be finite and strictly increasing from 0, got {breakpoints}")
            previous = b
        for v in values:
            if not (math.isfinite(v) and v >= 0):
                raise FunctionError(f"values must be finite and nonnegative, got {v}")
        breakpoints, values = self._canonical(breakpoints, values)
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)

    @staticmethod
    def _canonical(breakpoints: Sequence[float], values: Sequence[float]) -> Tuple[tuple, tuple]:
        out_b: List[float] = []
        out_v: List[float] = []
        for b, v in zip(breakpoints, values):
            if out_v and out_v[-1] == v:
                out_b[-1] = b
            else:
                out_b.append(b)
                out_v.append(v)
        while out_v and out_v[-1] == 0.0:
            out_b.pop()
            out_v.pop()
        return tuple(out_b), tuple(out_v)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[float, float]]):
        """Build from [(breakpoint, value), ...]."""
        return cls(tuple(b for b, _ in pairs), tuple(v for _, v in pairs))

    @property
    def support_end(self) -> float:
        return self.breakpoints[-1] if self.breakpoints else 0.0

    @property
    def is_zero(self) -> bool:
        return not self.values

    def __call__(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Evaluate at t > 0; arrays are evaluated elementwise."""
        ts = np.asarray(t, dtype=float)
        table = np.append(np.asarray(self.values, dtype=float), 0.0)
        out = table[np.searchsorted(np.asarray(self.breakpoints, dtype=float), ts, side="left")]
        return float(out) if out.ndim == 0 else out

    def lengths(self) -> List[float]:
        previous = 0.0
        out = []
        for b in self.breakpoints:
            out.append(b - previous)
            previous = b
        return out

    def pieces(self) -> Iterator[Piece]:
        previous = 0.0
        for b, v in zip(self.breakpoints, self.values):
            yield previous, b, 0.0, v
            previous = b

    def integral(self) -> float:
        """Integral over (0, inf)."""
        return math.fsum(v * length for v, length in zip(self.values, self.lengths()))

    def distribution(self, y: float) -> float:
        """Lebesgue measure of {t > 0: f(t) > y}."""
        return math.fsum(length for v, length in zip(self.values, self.lengths()) if v > y)

    def scale(self, c: float):
        return type(self)(self.breakpoints, tuple(c * v for v in self.values))

    def dilate(self, lam: float):
        """t -> f(lam t)."""
        if lam <= 0:
            raise FunctionError(f"dilation factor must be positive, got {lam}")
        return type(self)(tuple(b / lam for b in self.breakpoints), self.values)


@dataclass(frozen=True)
class DecreasingStep(StepFunction):
    """
    Nonincreasing step function; the canonical home of a decreasing rearrangement f*.

    In canonical form the values are strictly decreasing and positive.
    """

    def __post_init__(self):
        super().__post_init__()
        if any(later > earlier for earlier, later in zip(self.values, self.values[1:])):
            raise FunctionError(f"values must be nonincreasing, got {self.values}")

    @property
    def sup(self) -> float:
        return self.values[0] if self.values else 0.0

    def distribution(self, y: float) -> float:
        """Measure of {f* > y}: the right end of the last piece above y."""
        level = 0.0
        for b, v in zip(self.breakpoints, self.values):
            if v > y:
                level = b
            else:
                break
        return level


@dataclass(frozen=True)
class PiecewiseHyperbolic:
    """
    Continuous function made of pieces t -> a/t + b on (l, u], the exact form of f** for a step f*.

    The first piece starts at 0 with a = 0, the last one ends at inf with b = 0.
    """

    bounds: Tuple[float, ...] = (0.0, math.inf)
    a: Tuple[float, ...] = (0.0,)
    b: Tuple[float, ...] = (0.0,)
    _arrays: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        bounds = tuple(float(x) for x in self.bounds)
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        if len(bounds) != len(a) + 1 or len(a) != len(b) or not a:
            raise FunctionError(f"inconsistent hyperbolic pieces: {len(bounds)} bounds, {len(a)} a, {len(b)} b")
        if bounds[0] != 0.0 or bounds[-1] != math.inf:
            raise FunctionError(f"pieces must cover (0, inf), got bounds {bounds}")
        if any(hi <= lo for lo, hi in zip(bounds, bounds[1:])):
            raise FunctionError(f"bounds must be strictly increasing, got {bounds}")
        if a[0] != 0.0 or b[-1] != 0.0:
            raise FunctionError("first piece must be constant and the last one must vanish at infinity")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        arrays = (np.asarray(bounds[1:-1], dtype=float), np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        object.__setattr__(self, "_arrays", arrays)

    def __call__(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        ts = np.asarray(t, dtype=float)
        inner, a, b = self._arrays
        idx = np.searchsorted(inner, ts, side="left")
        out = a[idx] / ts + b[idx]
        return float(out) if out.ndim == 0 else out

    def pieces(self) -> Iterator[Piece]:
        for i in range(len(self.a)):
            yield self.bounds[i], self.bounds[i + 1], self.a[i], self.b[i]

    @property
    def sup(self) -> float:
        """Value on the first piece, the maximum of a nonincreasing f**."""
        return self.b[0]

    def integral(self, lo: float, hi: float) -> float:
        """Exact integral over (lo, hi], 0 <= lo <= hi < inf."""
        if hi <= lo:
            return 0.0
        parts = []
        for l, u, a, b in self.pieces():
            x, y = max(l, lo), min(u, hi)
            if y <= x:
                continue
            parts.append(b * (y - x))
            if a:
                parts.append(a * math.log(y / x))
        return math.fsum(parts)
