"""Statistics along the integer diagonal orbit {delta L : delta in Delta_r}.

Delta_r is the set of Diag(e^t1, ..., e^td) with integer exponents summing to
zero and Euclidean exponent norm <= r.  The shortest vector of every delta L
is obtained by walking the exponent lattice one unit step at a time and
re-reducing, so each step only multiplies an already reduced basis by
Diag(e, 1/e).  The diagonal flow amplifies rounding errors by up to
e^(max t - min t), so the walk runs in mpmath with the working precision
grown accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import stats

from . import rng
from .errors import NotUnimodular
from .lattice import LatticeBasis
from .reduction import dot, greedy_reduce

SQRT3 = math.sqrt(3.0)
TRIAL_BLOCK = 1024
GUARD_BITS = 96


@dataclass(frozen=True)
class OrbitElement:
    exponents: tuple[int, ...]

    @property
    def norm(self) -> float:
        return math.sqrt(sum(e * e for e in self.exponents))

    def matrix(self) -> np.ndarray:
        return np.diag(np.exp(np.array(self.exponents, dtype=float)))


@dataclass(frozen=True)
class SignModel:
    """Distribution of the iid symmetric signs theta_delta.

    ``constant`` (theta = 1) is a degenerate hook for tests only.
    """

    kind: str = "rademacher"

    def __post_init__(self):
        if self.kind not in ("rademacher", "uniform", "constant"):
            raise ValueError(f"unknown sign model {self.kind!r}")

    @property
    def second_moment(self) -> float:
        return 1.0

    @property
    def third_abs_moment(self) -> float:
        # uniform on [-sqrt 3, sqrt 3]: E|theta|^3 = 3 sqrt(3) / 4
        return 3.0 * SQRT3 / 4.0 if self.kind == "uniform" else 1.0

    def draw(self, gen: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "rademacher":
            return gen.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
        if self.kind == "uniform":
            return gen.uniform(-SQRT3, SQRT3, size=shape)
        return np.ones(shape)


@dataclass(frozen=True)
class OrbitStats:
    r: float
    count: int
    v_tilde: float
    t1_sum: float  # sum |delta L|^(-3d) * E|theta|^3
    be_bound: float


@dataclass(frozen=True)
class OrbitNorms:
    elements: list
    norms: np.ndarray  # |delta L| per element, same order
    d: int

    @property
    def v_tilde(self) -> float:
        return math.fsum(self.norms ** (-2 * self.d))

    @property
    def t1_raw(self) -> float:
        return math.fsum(self.norms ** (-3 * self.d))

    @property
    def weights(self) -> np.ndarray:
        return self.norms ** (-self.d)


def enumerate_orbit(d: int, r: float) -> list[OrbitElement]:
    """Integer exponent vectors with zero sum and Euclidean norm <= r."""
    if d not in (2, 3):
        raise ValueError("orbits are supported for d = 2 or 3")
    if r < 0:
        return []
    rr = r * r * (1 + 1e-12)
    if d == 2:
        jmax = int(math.floor(r / math.sqrt(2.0) + 1e-12))
        return [OrbitElement((j, -j)) for j in range(-jmax, jmax + 1) if 2 * j * j <= rr]
    m = int(math.floor(r))
    out = []
    for t1 in range(-m, m + 1):
        for t2 in range(-m, m + 1):
            t3 = -t1 - t2
            if t1 * t1 + t2 * t2 + t3 * t3 <= rr:
                out.append(OrbitElement((t1, t2, t3)))
    return out


def _check(L: LatticeBasis, d: int):
    if L.dim != d:
        raise ValueError(f"lattice has dim {L.dim}, orbit needs dim {d}")
    if abs(L.covol - 1.0) > 1e-9:
        raise NotUnimodular(f"covolume {L.covol!r} is not 1 (use the !unimodular flag)")


def orbit_norms(L: LatticeBasis, d: int, r: float) -> OrbitNorms:
    """Shortest-vector norm of delta L for every delta in Delta_r."""
    _check(L, d)
    elements = enumerate_orbit(d, r)
    wanted = {e.exponents for e in elements}
    found: dict[tuple, float] = {}
    spread = max((max(e.exponents) - min(e.exponents) for e in elements), default=0)
    ctx = mpmath.MPContext()
    ctx.prec = GUARD_BITS + int(math.ceil(spread / math.log(2.0)))
    floor = lambda x: int(ctx.floor(x))  # noqa: E731
    grow, shrink = ctx.e, 1 / ctx.e

    def _step(cols, up, down, sign):
        fu, fd = (grow, shrink) if sign > 0 else (shrink, grow)
        scaled = [[x * fu if i == up else x * fd if i == down else x for i, x in enumerate(c)] for c in cols]
        return greedy_reduce(scaled, floor)

    B0 = greedy_reduce(L.hp_columns(ctx), floor)

    def walk_row(Bstart, start, up, down, lo, hi):
        # walk coordinate ``up`` from start over [lo, hi] (down compensates)
        for sign, stop in ((1, hi), (-1, lo)):
            B = Bstart
            e = list(start)
            while True:
                key = tuple(e)
                if key in wanted:
                    found[key] = float(ctx.sqrt(dot(B[0], B[0])))
                if (sign > 0 and e[up] >= stop) or (sign < 0 and e[up] <= stop):
                    break
                B = _step(B, up, down, sign)
                e[up] += sign
                e[down] -= sign

    if d == 2:
        j = max((abs(e.exponents[0]) for e in elements), default=0)
        walk_row(B0, (0, 0), 0, 1, -j, j)
    else:
        m = int(math.floor(r))
        # walk the t2 axis, then every t1 row from it
        Brow = {0: B0}
        for sign in (1, -1):
            B = B0
            for k in range(1, m + 1):
                B = _step(B, 1, 2, sign)
                Brow[sign * k] = B
        for t2, B in Brow.items():
            row = [e.exponents[0] for e in elements if e.exponents[1] == t2]
            if row:
                walk_row(B, (0, t2, -t2), 0, 2, min(min(row), 0), max(max(row), 0))
    norms = np.array([found[e.exponents] for e in elements])
    return OrbitNorms(elements, norms, d)


def orbit_v_and_norms(L: LatticeBasis, d: int, r: float) -> dict:
    """Record {v_tilde, norms, t1_raw} with v_tilde = sum |delta L|^(-2d)."""
    on = orbit_norms(L, d, r)
    return {"v_tilde": on.v_tilde, "norms": on.norms, "t1_raw": on.t1_raw, "count": len(on.norms)}


def orbit_stats(L: LatticeBasis, d: int, r: float, model: SignModel = SignModel(), on: OrbitNorms = None) -> OrbitStats:
    on = orbit_norms(L, d, r) if on is None else on
    v1 = on.v_tilde * model.second_moment
    t1 = on.t1_raw * model.third_abs_moment
    be = 40.0 * t1 / v1**1.5 if v1 > 0 else math.inf
    return OrbitStats(float(r), len(on.norms), on.v_tilde, t1, be)


def simulate_s_tilde(
    L: LatticeBasis,
    d: int,
    r: float,
    model: SignModel = SignModel(),
    trials: int = 10_000,
    seed: int = 0,
    on: OrbitNorms = None,
) -> np.ndarray:
    """Normalized orbit sums sum_delta theta_delta |delta L|^-d / sqrt(V~), one per trial."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    on = orbit_norms(L, d, r) if on is None else on
    w = on.weights
    scale = 1.0 / math.sqrt(on.v_tilde)
    out = np.empty(trials)
    for b, s, e in rng.blocks(trials, TRIAL_BLOCK):
        theta = model.draw(rng.stream(seed, b), (e - s, len(w)))
        out[s:e] = (theta @ w) * scale
    return out


@dataclass(frozen=True)
class BerryEsseenResult:
    ks_distance: float
    be_bound: float
    passed: bool


def berry_esseen_check(values, orbit: OrbitStats) -> BerryEsseenResult:
    """KS distance of ``values`` to N(0,1) against the Berry-Esseen envelope
    40 T1 / V1^(3/2), with 1.36/sqrt(n) of sampling slack."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("values must be nonempty")
    ks = float(stats.kstest(values, "norm").statistic)
    slack = 1.36 / math.sqrt(values.size)
    return BerryEsseenResult(ks, orbit.be_bound, ks <= orbit.be_bound + slack)


def num_via_orbit(L: LatticeBasis, d: int, r: float) -> float:
    """d^(-d/2) min over Delta_r of |delta L|^d (nonincreasing in r)."""
    on = orbit_norms(L, d, r)
    return d ** (-d / 2) * float(np.min(on.norms)) ** d


def ergodic_average(L: LatticeBasis, d: int, r: float, m: float) -> float:
    """(1/|Delta_r|) sum_delta min(m, |delta L|^-d)."""
    if m < 1:
        raise ValueError("clip level m must be >= 1")
    on = orbit_norms(L, d, r)
    return math.fsum(np.minimum(m, on.weights)) / len(on.norms)
