"""Exact lattice point counts in dilated, translated rectangles and the
mean square of the counting error over translations."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import rng
from .errors import BallTooLarge
from .lattice import DEFAULT_CAP, LatticeBasis


@dataclass(frozen=True)
class RectWindow:
    """Rectangle centred at 0 with summits (+-a, +-b)."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"window half-sides must be positive, got a={self.a}, b={self.b}")

    @property
    def area(self) -> float:
        return 4.0 * self.a * self.b


@dataclass(frozen=True)
class TorusPoint:
    """Translation X together with its coordinates u in [0,1)^2, X = B u."""

    X: tuple[float, float]
    frac_coords: tuple[float, float]

    @classmethod
    def from_frac(cls, L: LatticeBasis, u) -> TorusPoint:
        u = np.mod(np.asarray(u, dtype=float), 1.0)
        X = L.basis @ u
        return cls((float(X[0]), float(X[1])), (float(u[0]), float(u[1])))

    @classmethod
    def from_point(cls, L: LatticeBasis, X) -> TorusPoint:
        X = np.asarray(X, dtype=float)
        u = np.mod(np.linalg.solve(L.basis, X), 1.0)
        return cls((float(X[0]), float(X[1])), (float(u[0]), float(u[1])))


XLike = Union[TorusPoint, tuple, list, np.ndarray]


def _as_xy(X: XLike) -> np.ndarray:
    if isinstance(X, TorusPoint):
        return np.array(X.X, dtype=float)
    return np.asarray(X, dtype=float)


def in_box(n1, n2, B: np.ndarray, lo, hi) -> np.ndarray:
    """Closed-box membership of the lattice points n1 b1 + n2 b2.

    This is the single definition of "inside" used by every counting route;
    ``lo``/``hi`` are (..., 2) corner arrays broadcastable against n1, n2.
    """
    x = n1 * B[0, 0] + n2 * B[0, 1]
    y = n1 * B[1, 0] + n2 * B[1, 1]
    return (lo[..., 0] <= x) & (x <= hi[..., 0]) & (lo[..., 1] <= y) & (y <= hi[..., 1])


def _count_batch(L: LatticeBasis, P: RectWindow, t: float, Xs: np.ndarray, cap: int) -> np.ndarray:
    """Line-sweep counts for a batch of translations (rows of Xs)."""
    B = L.basis
    half = np.array([t * P.a, t * P.b])
    lo = Xs - half  # (K, 2)
    hi = Xs + half
    # sweep over the coefficient whose column has the larger |y| component
    j = 0 if abs(B[1, 0]) >= abs(B[1, 1]) else 1
    i = 1 - j
    Binv = np.linalg.inv(B)
    corners = np.stack([lo, np.stack([lo[:, 0], hi[:, 1]], 1), np.stack([hi[:, 0], lo[:, 1]], 1), hi], axis=1)
    cj = corners @ Binv[j]  # (K, 4)
    nj_min = int(math.floor(cj.min())) - 1
    nj_max = int(math.ceil(cj.max())) + 1
    nlines = nj_max - nj_min + 1
    if nlines * len(Xs) > cap:
        raise BallTooLarge(f"count needs {nlines} lines per translation (cap {cap})")
    nj = np.arange(nj_min, nj_max + 1, dtype=float)[None, :]  # (1, M)

    lower = np.full((len(Xs), nlines), -np.inf)
    upper = np.full((len(Xs), nlines), np.inf)
    alive = np.ones((len(Xs), nlines), dtype=bool)
    for axis in (0, 1):
        bi, bj = B[axis, i], B[axis, j]
        rest = nj * bj
        lo_a = lo[:, axis : axis + 1]
        hi_a = hi[:, axis : axis + 1]
        if bi == 0.0:
            alive &= (lo_a <= rest) & (rest <= hi_a)
            continue
        q1 = (lo_a - rest) / bi
        q2 = (hi_a - rest) / bi
        lower = np.maximum(lower, np.minimum(q1, q2))
        upper = np.minimum(upper, np.maximum(q1, q2))
    lower = np.where(np.isfinite(lower), lower, 0.0)
    upper = np.where(np.isfinite(upper), upper, -1.0)  # only reachable if both bi are 0
    n_lo = np.ceil(lower)
    n_hi = np.floor(upper)
    # candidate lines: estimate nonempty or empty by at most one slot
    alive &= n_lo <= n_hi + 1

    lo3 = lo[:, None, :]
    hi3 = hi[:, None, :]

    def member(ni):
        if i == 0:
            return in_box(ni, nj, B, lo3, hi3)
        return in_box(nj, ni, B, lo3, hi3)

    # exact endpoint repair by direct substitution (rounding moves ends by <= 1)
    for _ in range(2):
        grow = alive & member(n_lo - 1)
        n_lo = np.where(grow, n_lo - 1, n_lo)
        grow = alive & member(n_hi + 1)
        n_hi = np.where(grow, n_hi + 1, n_hi)
    for _ in range(2):
        shrink = alive & (n_lo <= n_hi) & ~member(n_lo)
        n_lo = np.where(shrink, n_lo + 1, n_lo)
        shrink = alive & (n_lo <= n_hi) & ~member(n_hi)
        n_hi = np.where(shrink, n_hi - 1, n_hi)
    per_line = np.where(alive, np.maximum(n_hi - n_lo + 1, 0), 0)
    return per_line.sum(axis=1).astype(np.int64)


def count_points_many(L: LatticeBasis, P: RectWindow, t: float, Xs, cap: int = DEFAULT_CAP, batch: int = 4096) -> np.ndarray:
    """Counts N(tP + X, L) for each row X of ``Xs``."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    if L.dim != 2:
        raise ValueError("counting is implemented for planar lattices only")
    Xs = np.atleast_2d(np.asarray(Xs, dtype=float))
    out = np.empty(len(Xs), dtype=np.int64)
    for s in range(0, len(Xs), batch):
        out[s : s + batch] = _count_batch(L, P, float(t), Xs[s : s + batch], cap)
    return out


def count_points(L: LatticeBasis, P: RectWindow, t: float, X: XLike = (0.0, 0.0), cap: int = DEFAULT_CAP) -> int:
    """Number of lattice points in the closed box [X1-ta, X1+ta] x [X2-tb, X2+tb]."""
    return int(count_points_many(L, P, t, _as_xy(X)[None, :], cap=cap)[0])


def count_error(L: LatticeBasis, P: RectWindow, t: float, X: XLike = (0.0, 0.0)) -> float:
    """R(tP + X, L) = N - t^2 Area(P) / Covol(L)."""
    return count_points(L, P, t, X) - t * t * P.area / L.covol


def count_error_many(L: LatticeBasis, P: RectWindow, t: float, Xs) -> np.ndarray:
    return count_points_many(L, P, t, Xs) - t * t * P.area / L.covol


@dataclass(frozen=True)
class MomentEstimate:
    m2: float
    stderr: float
    n: int


def torus_grid(n: int) -> np.ndarray:
    """Cell-centred n x n grid of fractional coordinates in [0,1)^2."""
    g = (np.arange(n) + 0.5) / n
    U1, U2 = np.meshgrid(g, g, indexing="ij")
    return np.stack([U1.ravel(), U2.ravel()], axis=1)


def torus_samples(n: int, seed: int, keys: tuple = ()) -> np.ndarray:
    """n iid uniform points of [0,1)^2, drawn block-wise from streams keyed by
    (seed, *keys, block)."""
    U = np.empty((n, 2))
    for b, s, e in rng.blocks(n):
        U[s:e] = rng.stream(seed, *keys, b).random((e - s, 2))
    return U


def second_moment_over_X(
    L: LatticeBasis,
    P: RectWindow,
    t: float,
    n_x: int,
    seed: int = 0,
    mode: str = "random",
    workers: int = 1,
    keys: tuple = (),
) -> MomentEstimate:
    """Mean of R(tP + X, L)^2 over translations X in R^2 / L.

    ``mode="random"`` uses n_x iid uniform translations (seeded) and reports
    the sample standard error; ``mode="grid"`` averages over a cell-centred
    n_x x n_x grid of the torus and reports stderr 0.
    """
    if n_x < 2:
        raise ValueError("n_x must be at least 2")
    if mode == "grid":
        U = torus_grid(n_x)
    elif mode == "random":
        U = torus_samples(n_x, seed, keys)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    Xs = U @ L.basis.T
    chunks = [Xs[s : s + 4096] for s in range(0, len(Xs), 4096)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda c: count_error_many(L, P, t, c), chunks))
    else:
        parts = [count_error_many(L, P, t, c) for c in chunks]
    R = np.concatenate(parts)
    sq = R * R
    m2 = math.fsum(sq) / len(sq)
    if mode == "grid":
        return MomentEstimate(m2, 0.0, len(sq))
    var = math.fsum((sq - m2) ** 2) / (len(sq) - 1)
    return MomentEstimate(m2, math.sqrt(var / len(sq)), len(sq))
