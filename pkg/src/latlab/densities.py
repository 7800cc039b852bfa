"""Densities rho on [0,1] and sampling of dilation factors t in [0, T].

A dilation t is drawn with density rho(t/T)/T.  Text specs (CLI/config):

    uniform
    window:<alpha>                      uniform on [alpha, 1]
    steps:<w>@<lo>-<hi>;<w>@<lo>-<hi>   piecewise constant, masses w
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import BadDensity

MASS_TOL = 1e-12
T_STREAM = 0  # stream namespace for t-sampling


@dataclass(frozen=True)
class DensitySpec:
    kind: str = "uniform"
    alpha: float = 0.5
    steps: tuple = field(default_factory=tuple)  # ((weight, lo, hi), ...)

    def __post_init__(self):
        if self.kind == "uniform":
            return
        if self.kind == "window":
            if not 0.0 < self.alpha < 1.0:
                raise BadDensity(f"window needs 0 < alpha < 1, got {self.alpha!r}")
            return
        if self.kind != "steps":
            raise BadDensity(f"unknown density kind {self.kind!r}")
        if not self.steps:
            raise BadDensity("steps density needs at least one step")
        pieces = sorted(self.steps, key=lambda s: s[1])
        for w, lo, hi in pieces:
            if not (w > 0 and 0.0 <= lo < hi <= 1.0):
                raise BadDensity(f"bad step (weight={w}, lo={lo}, hi={hi})")
        for (_, _, hi0), (_, lo1, _) in zip(pieces, pieces[1:]):
            if lo1 < hi0:
                raise BadDensity("steps must be disjoint")
        if abs(math.fsum(w for w, _, _ in pieces) - 1.0) > MASS_TOL:
            raise BadDensity("step weights must sum to 1")
        object.__setattr__(self, "steps", tuple(tuple(map(float, s)) for s in pieces))

    @classmethod
    def parse(cls, text: str) -> DensitySpec:
        text = text.strip()
        try:
            if text == "uniform":
                return cls("uniform")
            if text.startswith("window:"):
                return cls("window", alpha=float(text[7:]))
            if text.startswith("steps:"):
                steps = []
                for part in text[6:].split(";"):
                    w, rng_ = part.split("@")
                    lo, hi = rng_.split("-")
                    steps.append((float(w), float(lo), float(hi)))
                return cls("steps", steps=tuple(steps))
        except ValueError as exc:
            raise BadDensity(f"cannot parse density {text!r}: {exc}") from None
        raise BadDensity(f"cannot parse density {text!r}")

    def __str__(self):
        if self.kind == "window":
            return f"window:{self.alpha!r}"
        if self.kind == "steps":
            return "steps:" + ";".join(f"{w!r}@{lo!r}-{hi!r}" for w, lo, hi in self.steps)
        return "uniform"

    def _pieces(self):
        if self.kind == "uniform":
            return ((1.0, 0.0, 1.0),)
        if self.kind == "window":
            return ((1.0, self.alpha, 1.0),)
        return self.steps

    def inverse_cdf(self, u) -> np.ndarray:
        """Quantile function on [0,1] (piecewise linear)."""
        u = np.asarray(u, dtype=float)
        pieces = self._pieces()
        w = np.array([p[0] for p in pieces])
        cum = np.concatenate([[0.0], np.cumsum(w)])
        cum[-1] = 1.0
        i = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(pieces) - 1)
        lo = np.array([p[1] for p in pieces])[i]
        hi = np.array([p[2] for p in pieces])[i]
        frac = np.clip((u - cum[i]) / w[i], 0.0, 1.0)
        return lo + frac * (hi - lo)

    def mass(self, lo: float, hi: float) -> float:
        """rho-mass of [lo, hi]."""
        total = 0.0
        for w, a, b in self._pieces():
            overlap = max(0.0, min(hi, b) - max(lo, a))
            total += w * overlap / (b - a)
        return total


def sample_t(rho: DensitySpec, bigT: float, n: int, seed: int, scheme: str = "iid") -> np.ndarray:
    """n dilations in [0, bigT] with density rho(t/T)/T, by inverse CDF.

    ``scheme="stratified"`` draws one point per equal-mass stratum
    (u_i = (i + U_i)/n) instead of iid; every point is still marginally
    rho-distributed, but the sample mean of a function of t has a much smaller
    variance.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not bigT > 0:
        raise ValueError("bigT must be positive")
    U = np.empty(n)
    for b, s, e in rng.blocks(n):
        U[s:e] = rng.stream(seed, T_STREAM, b).random(e - s)
    if scheme == "stratified":
        U = (np.arange(n) + U) / n
    elif scheme != "iid":
        raise ValueError(f"unknown sampling scheme {scheme!r}")
    return bigT * rho.inverse_cdf(U)
