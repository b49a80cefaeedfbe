"""The unit-interval map family behind the generator, with its digit
expansions and invariant-measure formulas.

The classic continued-fraction shift is G(x) = frac(1/x) on (0, 1] with
G(0) = 0.  Dividing the argument by a contraction parameter r > 0 gives
the generalized map T_r(x) = G(x/r) = frac(r/x), and raising x to a
power alpha > 0 before dividing gives the two-parameter variant
G(x**alpha / r).  Orbits of T_r extract digit expansions of the form

    x = a0 + r/(a1 + r/(a2 + ...)),

and the weighted measure with density 1/((r + x) * log(1 + 1/r)) plays
the role the Gauss-Kuzmin measure plays for r = 1: it is preserved
exactly when r is a natural number and approximately (with an O(1/r)
defect) otherwise.

Digit extraction runs on exact rational arithmetic (floats convert to
rationals losslessly), so expansions are faithful to the stored input
at any depth.  The scalar map evaluations use ordinary double
precision; the extended-precision iteration contract lives in
:mod:`rcfgen.generator`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import DomainError

Rational = Union[int, float, Fraction]


@dataclass(frozen=True)
class MapParams:
    """Parameters of the two-parameter map x -> frac(r / x**alpha)."""

    r: float
    alpha: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class DigitSequence:
    """Integer part and partial quotients of a digit expansion at parameter r."""

    a0: int
    partial_quotients: tuple
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if any(a < 1 for a in self.partial_quotients):
            raise DomainError("partial quotients must be >= 1")


@dataclass(frozen=True)
class IntervalMass:
    """Measure assigned to the subinterval [a, b] of the unit interval."""

    a: float
    b: float
    mass: float


def _check_unit(x: float, name: str = "x") -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {x}")


def _check_subinterval(a: float, b: float) -> None:
    if not 0.0 <= a <= b <= 1.0:
        raise DomainError(f"[{a}, {b}] is not a subinterval of [0, 1]")


def gauss_map(x: float) -> float:
    """frac(1/x) for x in (0, 1], and 0 at x = 0."""
    _check_unit(x)
    if x == 0.0:
        return 0.0
    q = 1.0 / x
    return q - math.floor(q)


def rcf_map(x: float, params: MapParams) -> float:
    """frac(r/x) for x in (0, 1], and 0 at x = 0."""
    _check_unit(x)
    if x == 0.0:
        return 0.0
    q = params.r / x
    return q - math.floor(q)


def rcf_alpha_map(x: float, params: MapParams) -> float:
    """frac(r / x**alpha); reduces to :func:`rcf_map` at alpha = 1.

    Raises OverflowError when x**alpha underflows to zero for x > 0 or
    the quotient leaves the representable range, so the caller can
    decide between resampling and reseeding.
    """
    _check_unit(x)
    if x == 0.0:
        return 0.0
    p = x**params.alpha
    if p == 0.0:
        raise OverflowError(f"x**alpha underflowed for x={x}, alpha={params.alpha}")
    q = params.r / p
    if not math.isfinite(q):
        raise OverflowError(f"r / x**alpha overflowed for x={x}, params={params}")
    return q - math.floor(q)


def log_abs_derivative(x: float, params: MapParams) -> float:
    """log |d/dx frac(r / x**alpha)| = log(alpha) + log(r) - (alpha+1) log(x).

    Within any continuity branch the map is r * x**(-alpha) minus a
    constant, so the slope magnitude is alpha * r / x**(alpha + 1).
    """
    _check_unit(x)
    if x == 0.0:
        raise DomainError("derivative is undefined at x = 0")
    return math.log(params.alpha) + math.log(params.r) - (params.alpha + 1.0) * math.log(x)


def gauss_kuzmin_mass(r: float, a: float, b: float) -> IntervalMass:
    """Mass of [a, b] under the density 1/((r + x) * log(1 + 1/r)).

    Equals [log(r+b) - log(r+a)] / log(1 + 1/r); the numerator is
    evaluated as log1p((b-a)/(r+a)) so that [0, 1] has mass exactly 1
    and narrow intervals do not lose precision.
    """
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    _check_subinterval(a, b)
    mass = math.log1p((b - a) / (r + a)) / math.log1p(1.0 / r)
    return IntervalMass(a=a, b=b, mass=mass)


def preimage_mass(r: float, a: float, b: float) -> IntervalMass:
    """Mass of the full preimage of [a, b] under the parameter-r map.

    The preimage of [a, b] is the union of the branch intervals
    [r/(k+b), r/(k+a)] for k >= ceil(r); its mass telescopes to
    [log(ceil(r)+b) - log(ceil(r)+a)] / log(1 + 1/r).  For integer r
    this coincides exactly with :func:`gauss_kuzmin_mass` (the measure
    is invariant); for non-integer r it is strictly smaller on any
    nonempty interval.
    """
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    _check_subinterval(a, b)
    c = math.ceil(r)
    mass = math.log1p((b - a) / (c + a)) / math.log1p(1.0 / r)
    return IntervalMass(a=a, b=b, mass=mass)


def cdf_of_mapped_uniform(r: float, x: float, tail_tolerance: float = 1e-6) -> float:
    """CDF at x of frac(r/X) for X uniform on [0, 1], for r > 1.

    Evaluates x * sum_{k >= ceil(r)} r / (k (k + x)) by direct
    summation.  Comparison with the telescoping series r/(k(k-1))
    bounds the unsummed tail by x*r/(k-1), and summation stops once
    that bound falls below ``tail_tolerance``; the result therefore
    undershoots the exact series by less than the tolerance.  Work
    scales like x*r/tail_tolerance.
    """
    if not r > 1:
        raise DomainError(f"r must exceed 1, got {r}")
    _check_unit(x)
    if not tail_tolerance > 0:
        raise DomainError("tail_tolerance must be positive")
    if x == 0.0:
        return 0.0
    total = 0.0
    k = math.ceil(r)
    chunk = 65536
    while x * r / (k - 1) >= tail_tolerance:
        ks = np.arange(k, k + chunk, dtype=np.float64)
        total += float((x * r / (ks * (ks + x))).sum())
        k += chunk
        if chunk < 1 << 24:
            chunk *= 2
    return total


def rcf_expand(x: Rational, r: Rational, max_depth: int) -> DigitSequence:
    """Digit expansion of x in (0, 1) at parameter r >= 1.

    Digits are a_{t+1} = floor(r / x_t) along the orbit x_{t+1} =
    r/x_t - a_{t+1}, computed in exact rational arithmetic (a float
    argument is expanded as the rational it stores).  Stops at
    ``max_depth`` digits, or earlier if the orbit hits 0 exactly.
    """
    xf = Fraction(x)
    rf = Fraction(r)
    if not 0 < xf < 1:
        raise DomainError(f"x must lie strictly inside (0, 1), got {x}")
    if rf < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if max_depth < 1:
        raise DomainError(f"max_depth must be >= 1, got {max_depth}")
    digits = []
    for _ in range(max_depth):
        q = rf / xf
        a = q.numerator // q.denominator
        digits.append(int(a))
        xf = q - a
        if xf == 0:
            break
    return DigitSequence(a0=0, partial_quotients=tuple(digits), r=float(rf))


def evaluate_convergent(d: DigitSequence) -> float:
    """Value of the finite expansion a0 + r/(a1 + r/(a2 + ...)).

    Backward recurrence: numerically stable because every partial
    quotient is at least 1.
    """
    v = None
    for a in reversed(d.partial_quotients):
        v = float(a) if v is None else a + d.r / v
    if v is None:
        return float(d.a0)
    return d.a0 + d.r / v
