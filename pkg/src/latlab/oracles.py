"""Quadrature oracles for the region integrals that bound V(L, t).

The admissible region is {A <= |l| <= t, |l1 l2| >= C} with weight
1/(l1 l2)^2.  In polar coordinates the angular integral is explicit: with
s = 2C/r^2, the set {|sin 2 theta| >= s} contributes 4 sqrt(1 - s^2)/s per
unit r^-3, which gives the 1-D integrands below.  The log-weighted variant
replaces the floor C by C |log r|^(-1-alpha).

Two independent cross-checks are provided: a 2-D Monte Carlo of the defining
integral (log-uniform sampling in each coordinate) and, for the asymmetric
integral, two different orders of integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import rng
from .errors import DomainError

EPSREL = 1e-10
MC_BLOCK = 1 << 16


@dataclass(frozen=True)
class IntegralRegionSpec:
    A: float
    C: float
    t: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.A > 0 and self.C > 0):
            raise DomainError(f"need A > 0 and C > 0, got A={self.A}, C={self.C}")
        if self.t < self.A:
            raise DomainError(f"need t >= A, got t={self.t}, A={self.A}")
        if self.alpha < 0:
            raise DomainError("alpha must be nonnegative")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abserr: float


def _quad(f, a, b, epsrel=EPSREL, points=None):
    if b <= a:
        return QuadratureResult(0.0, 0.0)
    pts = None if points is None else [p for p in points if a < p < b] or None
    val, err = integrate.quad(f, a, b, epsabs=0.0, epsrel=epsrel, limit=500, points=pts)
    return QuadratureResult(float(val), float(err))


def admissible_tail_integral(spec: IntegralRegionSpec, epsrel: float = EPSREL) -> QuadratureResult:
    """16 int_A^t r^-3 (r^2 / 2C) sqrt(1 - (2C/r^2)^2) dr  (~ (8/C) log(t/A)).

    Computed in the variable s = log r, where the integrand becomes
    (8/C) sqrt(1 - 4 C^2 e^(-4s)).
    """
    A, C = spec.A, spec.C
    if 2.0 * C / (A * A) > 1.0:
        raise DomainError(f"need 2C/A^2 <= 1, got {2.0 * C / (A * A)!r}")
    pref = 8.0 / C
    res = _quad(lambda s: math.sqrt(max(0.0, 1.0 - 4.0 * C * C * math.exp(-4.0 * s))), math.log(A), math.log(spec.t), epsrel)
    return QuadratureResult(pref * res.value, pref * res.abserr)


def log_weighted_tail_integral(spec: IntegralRegionSpec, epsrel: float = EPSREL) -> QuadratureResult:
    """Same region with the floor C |log r|^(-1-alpha):

        16 int_A^t r^-3 (r^2 |log r|^(1+alpha) / 2C) sqrt(1 - s(r)^2) dr,
        s(r) = 2C |log r|^(-1-alpha) / r^2,

    which grows like (8/C) log(t)^(2+alpha) / (2+alpha).
    """
    A, C, a = spec.A, spec.C, spec.alpha
    if A <= 1.0:
        raise DomainError("the log-weighted floor needs A > 1")

    def s_of(u):  # u = log r
        return 2.0 * C * u ** (-1.0 - a) * math.exp(-2.0 * u)

    if s_of(math.log(A)) > 1.0:
        raise DomainError(f"floor exceeds the circle at r=A (s={s_of(math.log(A))!r})")

    def f(u):
        s = s_of(u)
        return u ** (1.0 + a) * math.sqrt(max(0.0, 1.0 - s * s))

    res = _quad(f, math.log(A), math.log(spec.t), epsrel)
    return QuadratureResult(8.0 / C * res.value, 8.0 / C * res.abserr)


def _asym_breaks(A, C, T):
    pts = [A]
    disc = A**4 - 4.0 * C * C
    if disc >= 0:
        pts += [math.sqrt((A * A - math.sqrt(disc)) / 2.0), math.sqrt((A * A + math.sqrt(disc)) / 2.0)]
    return sorted(p for p in pts if 0 < p < T)


def asymmetric_integral(A: float, C: float, T: float, epsrel: float = 1e-9, swap: bool = False) -> QuadratureResult:
    """int of l1^-3 l2^-2 over {A <= |l| <= T, l1, l2 > 0, l1 l2 >= C}.

    The inner integral is done analytically, the outer one by adaptive
    quadrature.  ``swap=True`` integrates the other way round (inner l2^-2,
    outer l1^-3); by the symmetry l1 <-> l2 this is the value for the weight
    l1^-2 l2^-3 and must agree.
    """
    if not (A > 0 and C > 0):
        raise DomainError("need A > 0 and C > 0")
    if T < A:
        raise DomainError("need T >= A")

    def bounds(v):
        lo = max(C / v, math.sqrt(max(A * A - v * v, 0.0)))
        hi = math.sqrt(max(T * T - v * v, 0.0))
        return lo, hi

    if not swap:

        def outer(l2):
            lo, hi = bounds(l2)
            return 0.0 if lo >= hi else 0.5 * (lo**-2 - hi**-2) / (l2 * l2)

    else:

        def outer(l1):
            lo, hi = bounds(l1)
            return 0.0 if lo >= hi else (1.0 / lo - 1.0 / hi) / l1**3

    # the region is nonempty for C/T < v < T
    v_lo = C / T
    res = _quad(outer, v_lo, T, epsrel, points=_asym_breaks(A, C, T))
    return res


@dataclass(frozen=True)
class MCResult:
    value: float
    stderr: float
    n: int


def region_integral_mc(spec: IntegralRegionSpec, n: int, seed: int, log_floor: bool = False) -> MCResult:
    """2-D Monte Carlo of the defining region integral of 1/(l1 l2)^2.

    Both |l1| and |l2| are drawn log-uniform on [lo, t], where lo = (smallest
    floor)/t bounds every coordinate of the region from below; the four sign
    quadrants contribute equally.  ``log_floor`` selects the floor
    C |log r|^(-1-alpha) instead of C.
    """
    A, C, t = spec.A, spec.C, spec.t
    floor_min = C * math.log(t) ** (-1.0 - spec.alpha) if log_floor else C
    if log_floor and A <= 1.0:
        raise DomainError("the log-weighted floor needs A > 1")
    lo = min(floor_min, C) / t if log_floor else C / t
    span = math.log(t / lo)
    sums = []
    sq = []
    for b, s, e in rng.blocks(n, MC_BLOCK):
        u = rng.stream(seed, b).random((e - s, 2))
        l1 = lo * np.exp(span * u[:, 0])
        l2 = lo * np.exp(span * u[:, 1])
        r = np.hypot(l1, l2)
        num = l1 * l2
        floor = C * np.log(r) ** (-1.0 - spec.alpha) if log_floor else C
        inside = (r >= A) & (r <= t) & (num >= floor)
        # f / density = (l1 l2)^-2 * l1 l2 * span^2
        w = np.where(inside, 4.0 * span * span / num, 0.0)
        sums.append(math.fsum(w))
        sq.append(math.fsum(w * w))
    mean = math.fsum(sums) / n
    var = max(math.fsum(sq) / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return MCResult(mean, math.sqrt(var / n), n)
