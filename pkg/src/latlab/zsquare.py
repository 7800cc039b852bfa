"""Exact analysis of the square lattice Z^2 with the window [-1,1]^2 and
diagonal translation X = (x, x).

The count factorizes: N = c^2 with c = floor(t+x) - ceil(-t+x) + 1 the number
of integers in [x-t, x+t].  The normalized error R/t is then the sawtooth

    Delta(t, x) = 4 (c - 2t)

up to the envelope (c - 2t)^2 / t.  Under a random dilation t, Delta
converges to the law beta(y) = y U[-4y, 4y] + (1-y) U[-4(1-y), 4(1-y)], where
y is the gap between the two phase offsets of x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .densities import DensitySpec, sample_t


@dataclass(frozen=True)
class ZSquarePhase:
    x: float
    t10: float  # first t >= 0 with t + x integer
    t20: float  # first t >= 0 with -t + x integer
    y: float


def phase_offsets(x: float) -> ZSquarePhase:
    t10 = (-x) % 1.0
    t20 = x % 1.0
    return ZSquarePhase(float(x), t10, t20, abs(t20 - t10))


def _floor_sum(a, b):
    """floor(a + b) for float arrays, exact even when a + b rounds onto an integer."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)  # two-sum: s + err == a + b exactly
    f = np.floor(s)
    return np.where((s == f) & (err < 0), f - 1, f)


def integer_count(t, x):
    """Number of integers in [x - t, x + t]."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    # ceil(-t + x) = -floor(t - x)
    return _floor_sum(t, x) + _floor_sum(t, -x) + 1


def delta_sawtooth(t, x):
    """Delta(t, x) = 4 (floor(t+x) - ceil(-t+x) + 1 - 2t); lies in [-4, 4]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    out = 4.0 * (integer_count(t, x) - 2.0 * t)
    return float(out) if out.ndim == 0 else out


def r_over_t_exact(t, x):
    """R(t[-1,1]^2 + (x,x), Z^2) / t = (c^2 - 4 t^2) / t."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    # e = c - 2t is exact (Sterbenz); 4e + e^2/t avoids cancelling c^2 - 4t^2
    e = integer_count(t, x) - 2.0 * t
    out = 4.0 * e + e * e / t
    return float(out) if out.ndim == 0 else out


def limit_moment(k: int, y: float) -> float:
    """a_k = 4^k (1 + (-1)^k) (y^(k+1) + (1-y)^(k+1)) / (2(k+1))."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k % 2:
        return 0.0
    return 4.0**k * (y ** (k + 1) + (1.0 - y) ** (k + 1)) / (k + 1)


def _components(y: float):
    return [(w, 4.0 * w) for w in (y, 1.0 - y) if w > 0]


def beta_cdf(z, y: float):
    """CDF of the two-component uniform mixture beta(y)."""
    z = np.asarray(z, dtype=float)
    F = np.zeros_like(z)
    # a tiny weight gives a near-point mass; the overflow clips to 0 or 1
    with np.errstate(over="ignore"):
        for w, h in _components(y):
            F = F + w * np.clip((z + h) / (2.0 * h), 0.0, 1.0)
    return float(F) if F.ndim == 0 else F


def beta_pdf(z, y: float):
    z = np.asarray(z, dtype=float)
    f = np.zeros_like(z)
    for w, h in _components(y):
        f = f + np.where(np.abs(z) <= h, w / (2.0 * h), 0.0)
    return float(f) if f.ndim == 0 else f


def mixture_moment(k: int, y: float) -> float:
    """k-th moment of beta(y), integrating each uniform component numerically
    (Gauss-Legendre, exact for polynomial degree <= 2 * nodes - 1)."""
    nodes, weights = np.polynomial.legendre.leggauss(k // 2 + 1)
    total = 0.0
    for w, h in _components(y):
        total += w * 0.5 * math.fsum(weights * (h * nodes) ** k)
    return total


def _stderr(p: np.ndarray, scheme: str) -> float:
    n = len(p)
    if scheme == "stratified":
        # collapsed strata: neighbouring strata paired, (f_2j - f_2j+1)^2
        # estimates their summed variance (biased upwards)
        m = n // 2 * 2
        diff = p[0:m:2] - p[1:m:2]
        return math.sqrt(math.fsum(diff * diff)) / n
    return float(np.std(p, ddof=1)) / math.sqrt(n)


@dataclass
class ZSquareReport:
    x: float
    y: float
    n: int
    ks: float
    moments: dict  # k -> empirical mean of Delta^k
    stderr: dict  # k -> standard error of that mean
    moment_errors: dict  # k -> |empirical - a_k|


def empirical_vs_beta(
    x: float,
    T: float,
    n: int,
    rho: DensitySpec = DensitySpec(),
    seed: int = 0,
    k_list=(0, 1, 2, 3, 4),
    scheme: str = "iid",
) -> ZSquareReport:
    """Sample t from rho on [0,T], compare Delta(t,x) with beta(y(x))."""
    if n < 100:
        raise ValueError("n must be >= 100")
    y = phase_offsets(x).y
    d = delta_sawtooth(sample_t(rho, T, n, seed, scheme=scheme), x)
    ks = float(stats.kstest(d, lambda z: beta_cdf(z, y)).statistic)
    moments, se, err = {}, {}, {}
    for k in k_list:
        p = d ** int(k)
        m = math.fsum(p) / n
        moments[k] = m
        se[k] = _stderr(p, scheme)
        err[k] = abs(m - limit_moment(int(k), y))
    return ZSquareReport(float(x), y, n, ks, moments, se, err)
