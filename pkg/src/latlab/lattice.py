"""Planar (and small-dimensional) lattices: construction, duality, reduction,
enumeration of short vectors and Haar sampling of unimodular lattices.

A lattice is stored by a basis matrix whose *columns* are the basis vectors,
so the lattice vector with integer coordinates ``n`` is ``basis @ n``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import mpmath
import numpy as np

from . import reduction

from .errors import (
    BallTooLarge,
    DegenerateBasis,
    EmptyBall,
    EqualRoots,
    SpecError,
)

DEFAULT_CAP = 10**8
DET_RTOL = 1e-12
# Num(l) below this (relative to max(1, |l|^2)) counts as exactly zero.
NUM_ZERO_RTOL = 1e-12
# Hermite's constant in dimension 2 gives |L| <= (2/sqrt(3))^(1/2) when covol = 1.
HERMITE_2D = math.sqrt(2.0 / math.sqrt(3.0))


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Full-rank lattice given by the columns of ``basis``."""

    basis: np.ndarray
    reduced_shortest: Optional[float] = None
    # integer matrix U with basis @ U reduced; only set by reduce_basis
    _transform: Optional[np.ndarray] = field(default=None, repr=False)
    # ctx -> list of columns at ctx's precision, for lattices known beyond
    # double precision (e.g. quadratic irrationals); None means the float
    # entries are the exact definition
    exact: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise DegenerateBasis(f"basis must be square, got shape {b.shape}")
        if not np.all(np.isfinite(b)):
            raise DegenerateBasis("basis has non-finite entries")
        scale = float(np.max(np.linalg.norm(b, axis=0)))
        det = float(np.linalg.det(b))
        if scale == 0.0 or abs(det) < DET_RTOL * scale ** b.shape[0]:
            raise DegenerateBasis(f"determinant {det!r} is zero at scale {scale!r}")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def covol(self) -> float:
        return abs(float(np.linalg.det(self.basis)))

    @property
    def columns(self) -> list[np.ndarray]:
        return [self.basis[:, i] for i in range(self.dim)]

    def hp_columns(self, ctx) -> list:
        """Basis columns as numbers of the mpmath context ``ctx``."""
        if self.exact is not None:
            return self.exact(ctx)
        return [[ctx.mpf(float(x)) for x in self.basis[:, j]] for j in range(self.dim)]

    def vector(self, coeffs) -> np.ndarray:
        return self.basis @ np.asarray(coeffs, dtype=float)

    def integer_coords(self, vectors: np.ndarray) -> np.ndarray:
        """Integer coordinates of lattice vectors (rows of ``vectors``).

        Raises ValueError when a row is not a lattice vector within 1e-9.
        """
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        raw = np.linalg.solve(self.basis, v.T).T
        n = np.rint(raw)
        back = n @ self.basis.T
        err = np.linalg.norm(back - v, axis=1)
        if np.any(err > 1e-9 * (1.0 + np.linalg.norm(v, axis=1))):
            raise ValueError("vector is not in the lattice")
        return n.astype(np.int64)

    def __repr__(self):
        return f"LatticeBasis(dim={self.dim}, covol={self.covol:.12g}, basis={self.basis.tolist()})"


@dataclass(frozen=True)
class QuadraticPair:
    alpha: float
    alpha_prime: float

    def __post_init__(self):
        if self.alpha == self.alpha_prime:
            raise EqualRoots(f"alpha == alpha' == {self.alpha!r}")


@dataclass(frozen=True)
class FreqVector:
    coords: tuple[float, float]
    int_coords: tuple[int, int]
    num: float
    norm: float
    is_prime: bool


@dataclass
class VectorSet:
    """Column store for many lattice vectors; iterating yields FreqVector."""

    coords: np.ndarray  # (N, 2)
    int_coords: np.ndarray  # (N, 2) w.r.t. the lattice's own basis
    norm: np.ndarray
    num: np.ndarray
    is_prime: np.ndarray

    def __len__(self):
        return len(self.norm)

    def __iter__(self) -> Iterator[FreqVector]:
        for i in range(len(self)):
            yield FreqVector(
                coords=(float(self.coords[i, 0]), float(self.coords[i, 1])),
                int_coords=(int(self.int_coords[i, 0]), int(self.int_coords[i, 1])),
                num=float(self.num[i]),
                norm=float(self.norm[i]),
                is_prime=bool(self.is_prime[i]),
            )

    def __getitem__(self, idx) -> VectorSet:
        return VectorSet(
            self.coords[idx], self.int_coords[idx], self.norm[idx], self.num[idx], self.is_prime[idx]
        )

    @classmethod
    def empty(cls) -> VectorSet:
        z = np.zeros((0, 2))
        return cls(z, z.astype(np.int64), np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool))

    @classmethod
    def concat(cls, parts: list[VectorSet]) -> VectorSet:
        if not parts:
            return cls.empty()
        return cls(
            np.concatenate([p.coords for p in parts]),
            np.concatenate([p.int_coords for p in parts]),
            np.concatenate([p.norm for p in parts]),
            np.concatenate([p.num for p in parts]),
            np.concatenate([p.is_prime for p in parts]),
        )


def num_is_zero(num, norm):
    return np.abs(num) < NUM_ZERO_RTOL * np.maximum(1.0, np.asarray(norm) ** 2)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def zsquare() -> LatticeBasis:
    return LatticeBasis(np.eye(2))


def quad(alpha, alpha_prime, unimodular: bool = False) -> LatticeBasis:
    """The lattice {(n + m alpha, n + m alpha')}: basis columns (1, 1), (alpha, alpha').

    Arguments may be floats or real-spec strings such as ``"sqrt:2"``; strings
    keep an exact high-precision definition for long orbit computations.
    """
    ra, rb = _real_expr(alpha), _real_expr(alpha_prime)
    pair = QuadraticPair(ra.value, rb.value)

    def exact(ctx):
        return [[ctx.mpf(1), ctx.mpf(1)], [ra(ctx), rb(ctx)]]

    L = LatticeBasis(np.array([[1.0, pair.alpha], [1.0, pair.alpha_prime]]), exact=exact)
    return make_unimodular(L) if unimodular else L


def from_basis(basis, unimodular: bool = False) -> LatticeBasis:
    L = LatticeBasis(np.asarray(basis, dtype=float))
    return make_unimodular(L) if unimodular else L


def _hp_det(cols, ctx):
    return ctx.det(ctx.matrix([[c[i] for c in cols] for i in range(len(cols))]))


def make_unimodular(L: LatticeBasis) -> LatticeBasis:
    """Rescale by covol^(-1/dim) so the covolume becomes 1."""
    d = L.dim

    def exact(ctx):
        cols = L.hp_columns(ctx)
        f = abs(_hp_det(cols, ctx)) ** (ctx.mpf(-1) / d)
        return [[f * x for x in c] for c in cols]

    with_scale = L.basis * L.covol ** (-1.0 / d)
    return LatticeBasis(with_scale, exact=exact)


_REAL = re.compile(r"^\s*([+-]?)\s*sqrt:\s*([0-9.eE+]+)\s*$")


class _RealExpr:
    """A real number given by text; evaluates exactly at any precision."""

    def __init__(self, text):
        self.text = text.strip()
        m = _REAL.match(self.text)
        if m:
            self.sign = -1 if m.group(1) == "-" else 1
            self.radicand = m.group(2)
            self.value = self.sign * math.sqrt(float(self.radicand))
        else:
            self.radicand = None
            try:
                self.value = float(self.text)
            except ValueError:
                raise SpecError(f"cannot parse real number {text!r}") from None

    def __call__(self, ctx):
        if self.radicand is not None:
            return self.sign * ctx.sqrt(ctx.mpf(self.radicand))
        return ctx.mpf(self.text)


class _FloatExpr:
    def __init__(self, x):
        self.value = float(x)

    def __call__(self, ctx):
        return ctx.mpf(self.value)


def _real_expr(x):
    return _RealExpr(x) if isinstance(x, str) else _FloatExpr(x)


def parse_real(text: str) -> float:
    """Parse a decimal number or ``sqrt:<n>`` (optionally signed)."""
    return _RealExpr(text).value


def construct_lattice(spec: str) -> LatticeBasis:
    """Build a lattice from the spec grammar::

        zsquare | quad:<a>,<a'> | basis:<b11>,<b21>,<b12>,<b22> | haar:<seed>

    with an optional ``!unimodular`` suffix.  ``basis:`` also accepts nine
    entries (column-major) for a 3-dimensional lattice.
    """
    text = spec.strip()
    unimodular = False
    if text.endswith("!unimodular"):
        unimodular = True
        text = text[: -len("!unimodular")].strip()
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    parts = [p for p in args.split(",")] if args else []

    if kind == "zsquare":
        if parts:
            raise SpecError("zsquare takes no arguments")
        L = zsquare()
    elif kind == "quad":
        if len(parts) != 2:
            raise SpecError(f"quad needs two reals, got {args!r}")
        L = quad(parts[0], parts[1])
    elif kind == "basis":
        exprs = [_RealExpr(p) for p in parts]
        d = int(round(math.sqrt(len(exprs))))
        if d * d != len(exprs) or d not in (2, 3):
            raise SpecError(f"basis needs 4 or 9 entries, got {len(exprs)}")
        cols = [exprs[j * d : (j + 1) * d] for j in range(d)]
        L = LatticeBasis(
            np.array([[e.value for e in c] for c in cols]).T,
            exact=lambda ctx: [[e(ctx) for e in c] for c in cols],
        )
    elif kind == "haar":
        try:
            seed = int(args)
        except ValueError:
            raise SpecError(f"haar needs an integer seed, got {args!r}") from None
        L = sample_haar_lattice_2d(seed)
    else:
        raise SpecError(f"unknown lattice kind {kind!r} in {spec!r}")
    return make_unimodular(L) if unimodular else L


def _random_real(seed: int, key: int, ctx):
    """Uniform real in [0, 1) at the working precision of ``ctx``.

    Its binary digits are the raw 64-bit words of a seeded stream, so every
    precision sees a prefix of the same infinite expansion.
    """
    n = ctx.prec // 64 + 2
    words = np.random.default_rng([seed, key]).bit_generator.random_raw(n)
    acc = 0
    for w in words.tolist():
        acc = (acc << 64) | w
    return ctx.ldexp(ctx.mpf(acc), -64 * n)


def sample_haar_lattice_2d(seed: int) -> LatticeBasis:
    """Unimodular planar lattice drawn from the Haar probability measure.

    The point x + iy is drawn from the hyperbolic measure dx dy / y^2 on the
    standard fundamental domain (|x| <= 1/2, x^2 + y^2 >= 1), then a uniform
    rotation is applied.  The entries are random reals, not doubles: a double
    basis is a rational lattice, whose diagonal orbit runs off to the cusp.
    """

    def exact(ctx):
        theta = (_random_real(seed, 0, ctx) - ctx.mpf(0.5)) * ctx.pi / 3
        x = ctx.sin(theta)
        u = 1 - _random_real(seed, 1, ctx)  # (0, 1]
        y = ctx.sqrt(1 - x * x) / u
        s = ctx.sqrt(y)
        phi = 2 * ctx.pi * _random_real(seed, 2, ctx)
        c, sn = ctx.cos(phi), ctx.sin(phi)
        # columns of rot @ [[1/s, x/s], [0, s]]
        return [[c / s, sn / s], [(c * x - sn * y) / s, (sn * x + c * y) / s]]

    ctx = mpmath.MPContext()
    ctx.prec = 80
    cols = exact(ctx)
    return LatticeBasis(np.array([[float(v) for v in col] for col in cols]).T, exact=exact)


# ---------------------------------------------------------------------------
# duality
# ---------------------------------------------------------------------------


def dual_lattice(L: LatticeBasis) -> LatticeBasis:
    """Dual lattice; its basis D satisfies D^T B = I."""
    d = L.dim

    def exact(ctx):
        cols = L.hp_columns(ctx)
        B = ctx.matrix([[c[i] for c in cols] for i in range(d)])
        D = (B**-1).T
        return [[D[i, j] for i in range(d)] for j in range(d)]

    return LatticeBasis(np.linalg.inv(L.basis).T, exact=exact)


def same_lattice(L1: LatticeBasis, L2: LatticeBasis, tol: float = 1e-9) -> bool:
    """True when each basis has integer coordinates in the other lattice."""
    if L1.dim != L2.dim:
        return False
    for A, B in ((L1.basis, L2.basis), (L2.basis, L1.basis)):
        U = np.linalg.solve(A, B)
        if np.max(np.abs(U - np.rint(U))) > tol * (1.0 + np.max(np.abs(U))):
            return False
    return abs(L1.covol - L2.covol) <= tol * max(L1.covol, L2.covol)


def quad_dual_formula(alpha, alpha_prime) -> LatticeBasis:
    """The explicit set (1/(alpha'-alpha)) {(n + m alpha, n + m alpha')}.

    This equals the true dual of quad(alpha, alpha') only after the coordinate
    map (u, v) -> (v, -u); see ``swap_map``.
    """
    pair = QuadraticPair(_real_expr(alpha).value, _real_expr(alpha_prime).value)
    c = 1.0 / (pair.alpha_prime - pair.alpha)
    return LatticeBasis(c * np.array([[1.0, pair.alpha], [1.0, pair.alpha_prime]]))


def swap_map(L: LatticeBasis) -> LatticeBasis:
    """Image of a planar lattice under (u, v) -> (v, -u)."""
    return LatticeBasis(np.array([[0.0, 1.0], [-1.0, 0.0]]) @ L.basis)


def prime_triple(alpha: float, alpha_prime: float, k: int):
    """Vectors v1(k), v2(k), v3(k) of (1/(alpha'-alpha)) Gamma built from the
    consecutive index pairs (k, k+1), (k+1, k+2), (k+2, k+3).

    Returns ``(vectors, int_pairs)``; they satisfy -v1 + 2 v2 = v3.
    """
    W = quad_dual_formula(alpha, alpha_prime)
    pairs = [(k, k + 1), (k + 1, k + 2), (k + 2, k + 3)]
    return [W.vector(p) for p in pairs], pairs


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------


def _ball_search(R: np.ndarray, radius: float) -> np.ndarray:
    """All nonzero integer coefficient vectors c with |R c| <= radius (small balls)."""
    inv_rows = np.linalg.norm(np.linalg.inv(R), axis=1)
    bounds = [int(math.floor(radius * r + 1e-9)) for r in inv_rows]
    grids = np.meshgrid(*[np.arange(-b, b + 1) for b in bounds], indexing="ij")
    C = np.stack([g.ravel() for g in grids], axis=1)
    C = C[np.any(C != 0, axis=1)]
    V = C @ R.T
    keep = np.einsum("ij,ij->i", V, V) <= radius * radius * (1 + 1e-12)
    return C[keep]


def reduced_columns(B: np.ndarray) -> np.ndarray:
    """Reduced basis columns with column 0 a shortest nonzero vector."""
    B = np.asarray(B, dtype=float)
    cols = reduction.greedy_reduce([[float(x) for x in B[:, j]] for j in range(B.shape[1])])
    R = np.array(cols, dtype=float).T
    if R.shape[1] == 3:
        # exhaustive confirmation of the first minimum
        r0 = float(np.linalg.norm(R[:, 0]))
        C = _ball_search(R, r0)
        if len(C):
            norms = np.linalg.norm(C @ R.T, axis=1)
            if norms.min() < r0 * (1 - 1e-9):
                raise RuntimeError("greedy reduction missed a shorter vector")
    return R


def shortest_norm(B: np.ndarray) -> float:
    return float(np.linalg.norm(reduced_columns(B)[:, 0]))


def reduce_basis(L: LatticeBasis) -> LatticeBasis:
    """Equivalent basis whose first column is a shortest nonzero vector.

    In dimension 2 the result is Lagrange-Gauss reduced: |b1| <= |b2| and
    |<b1, b2>| <= |b1|^2 / 2.
    """
    R = reduced_columns(L.basis)
    U = np.rint(np.linalg.solve(L.basis, R))
    R = L.basis @ U  # snap to exact integer combinations of the input basis
    return LatticeBasis(R, reduced_shortest=float(np.linalg.norm(R[:, 0])), _transform=U.astype(np.int64))


def shortest_vector_norm(L: LatticeBasis) -> float:
    if L.reduced_shortest is not None:
        return L.reduced_shortest
    return reduce_basis(L).reduced_shortest


# ---------------------------------------------------------------------------
# enumeration (dimension 2)
# ---------------------------------------------------------------------------


def _sweep_plan(R: np.ndarray, t: float):
    """Per second-coefficient m, the candidate range of the first coefficient
    for |n r1 + m r2| <= t, padded by one on each side."""
    r1, r2 = R[:, 0], R[:, 1]
    a = float(r1 @ r1)
    b = float(r1 @ r2)
    c = float(r2 @ r2)
    m_max = int(math.floor(t * np.linalg.norm(np.linalg.inv(R)[1]) + 1e-9))
    m = np.arange(-m_max, m_max + 1, dtype=np.int64)
    disc = (m * b) ** 2 - a * (m * m * c - t * t)
    ok = disc >= -1e-9 * t * t * a
    m = m[ok]
    root = np.sqrt(np.maximum(disc[ok], 0.0))
    lo = np.floor((-m * b - root) / a).astype(np.int64) - 1
    hi = np.ceil((-m * b + root) / a).astype(np.int64) + 1
    return m, lo, hi


def _materialize(m, lo, hi, R):
    widths = hi - lo + 1
    mm = np.repeat(m, widths)
    starts = np.repeat(lo - np.cumsum(np.concatenate([[0], widths[:-1]])), widths)
    nn = np.arange(len(mm), dtype=np.int64) + starts
    coords = np.outer(nn, R[:, 0]) + np.outer(mm, R[:, 1])
    return nn, mm, coords


def iter_ball_blocks(L: LatticeBasis, t: float, cap: int = DEFAULT_CAP, block: int = 2_000_000) -> Iterator[VectorSet]:
    """Stream the nonzero vectors of norm <= t in blocks of roughly ``block`` rows."""
    if L.dim != 2:
        raise ValueError("vector enumeration is implemented for dim 2 only")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    red = reduce_basis(L)
    R = red.basis
    U = red._transform
    m, lo, hi = _sweep_plan(R, t)
    widths = hi - lo + 1
    predicted = int(widths.sum())
    if predicted > cap:
        raise BallTooLarge(f"enumeration of radius {t} needs ~{predicted} candidates (cap {cap})")
    csum = np.cumsum(widths)
    start = 0
    while start < len(m):
        stop = int(np.searchsorted(csum, (csum[start - 1] if start else 0) + block, side="right"))
        stop = max(stop, start + 1)
        nn, mm, coords = _materialize(m[start:stop], lo[start:stop], hi[start:stop], R)
        norm = np.hypot(coords[:, 0], coords[:, 1])
        keep = (norm <= t) & ((nn != 0) | (mm != 0))
        nn, mm, coords, norm = nn[keep], mm[keep], coords[keep], norm[keep]
        orig = np.stack([nn, mm], axis=1) @ U.T  # coords w.r.t. the input basis
        prime = np.gcd(np.abs(orig[:, 0]), np.abs(orig[:, 1])) == 1
        yield VectorSet(coords, orig, norm, coords[:, 0] * coords[:, 1], prime)
        start = stop


def enumerate_vectors(L: LatticeBasis, t: float, filter: str = "all", cap: int = DEFAULT_CAP) -> VectorSet:
    """Nonzero lattice vectors with norm <= t.

    ``filter="prime_positive"`` keeps prime vectors with first coordinate > 0.
    Output is sorted by norm (ties broken by coordinates) for reproducibility.
    """
    if filter not in ("all", "prime_positive"):
        raise ValueError(f"unknown filter {filter!r}")
    parts = []
    for vs in iter_ball_blocks(L, t, cap=cap):
        if filter == "prime_positive":
            vs = vs[vs.is_prime & (vs.coords[:, 0] > 0)]
        parts.append(vs)
    out = VectorSet.concat(parts)
    order = np.lexsort((out.coords[:, 1], out.coords[:, 0], out.norm))
    return out[order]


def num_of_lattice(L: LatticeBasis, t: float) -> float:
    """min |Num(l)| over nonzero vectors with |l| <= t (upper estimate of Num(L))."""
    vs = enumerate_vectors(L, t)
    if len(vs) == 0:
        raise EmptyBall(f"no nonzero lattice vector of norm <= {t}")
    num = np.abs(vs.num)
    num[num_is_zero(vs.num, vs.norm)] = 0.0
    return float(num.min())
